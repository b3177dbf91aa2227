//! Exact revised simplex under Bland's rule, and exact certification of a
//! basis proposed by the float guide.

use num_traits::{Signed, Zero};

use super::sparse_lu::SparseLu;
use super::standard::{StdForm, StdSolution};
use super::Status;
use crate::error::{Error, Result};
use crate::rational::{one, zero, Rational};

/// Column `j` of `[A | I]`; indices `>= n` are artificial unit columns.
fn column<'a>(std: &'a StdForm, j: usize, units: &'a [Vec<(usize, Rational)>]) -> &'a [(usize, Rational)] {
    if j < std.n {
        &std.cols[j]
    } else {
        &units[j - std.n]
    }
}

fn unit_columns(m: usize) -> Vec<Vec<(usize, Rational)>> {
    (0..m).map(|i| vec![(i, one())]).collect()
}

fn dot_col(y: &[Rational], col: &[(usize, Rational)]) -> Rational {
    let mut s = zero();
    for (i, a) in col {
        if !y[*i].is_zero() {
            s += a * &y[*i];
        }
    }
    s
}

/// Checks that `basis` (restricted to non-redundant rows) is primal and dual
/// feasible in exact arithmetic and returns the corresponding solution.
pub(crate) fn certify_basis(std: &StdForm, basis: &[usize], redundant: &[bool]) -> Result<StdSolution> {
    let kept: Vec<usize> = (0..std.m).filter(|&i| !redundant[i]).collect();
    let mut pos = vec![usize::MAX; std.m];
    for (p, &i) in kept.iter().enumerate() {
        pos[i] = p;
    }
    let mut cols: Vec<Vec<(usize, Rational)>> = Vec::with_capacity(kept.len());
    for &i in &kept {
        let j = basis[i];
        if j >= std.n {
            return Err(Error::Solver(format!("artificial column basic in row {i}")));
        }
        cols.push(
            std.cols[j]
                .iter()
                .filter(|(r, _)| pos[*r] != usize::MAX)
                .map(|(r, a)| (pos[*r], a.clone()))
                .collect(),
        );
    }
    let refs: Vec<&[(usize, Rational)]> = cols.iter().map(|c| c.as_slice()).collect();
    let lu = SparseLu::factor(kept.len(), &refs)?;
    let b: Vec<Rational> = kept.iter().map(|&i| std.b[i].clone()).collect();
    let xb = lu.solve(&b);
    if let Some(k) = xb.iter().position(|v| v.is_negative()) {
        return Err(Error::Solver(format!("basic variable {} is negative", basis[kept[k]])));
    }
    let mut z = vec![zero(); std.n];
    for (p, &i) in kept.iter().enumerate() {
        z[basis[i]] = xb[p].clone();
    }
    let mut ax = vec![zero(); std.m];
    for (j, col) in std.cols.iter().enumerate() {
        if z[j].is_zero() {
            continue;
        }
        for (i, a) in col {
            ax[*i] += a * &z[j];
        }
    }
    if let Some(i) = (0..std.m).find(|&i| ax[i] != std.b[i]) {
        return Err(Error::Solver(format!("row {i} not satisfied by the basic solution")));
    }
    let cb: Vec<Rational> = kept.iter().map(|&i| std.c[basis[i]].clone()).collect();
    let yk = lu.solve_transpose(&cb);
    let mut y = vec![zero(); std.m];
    for (p, &i) in kept.iter().enumerate() {
        y[i] = yk[p].clone();
    }
    for j in 0..std.n {
        let d = &std.c[j] - dot_col(&y, &std.cols[j]);
        if d.is_negative() {
            return Err(Error::Solver(format!("reduced cost of column {j} is {d}")));
        }
    }
    Ok(StdSolution { status: Status::Optimal, z, y })
}

struct Revised<'a> {
    std: &'a StdForm,
    units: Vec<Vec<(usize, Rational)>>,
    basis: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> Revised<'a> {
    fn factor(&self) -> Result<SparseLu> {
        let refs: Vec<&[(usize, Rational)]> =
            self.basis.iter().map(|&j| column(self.std, j, &self.units)).collect();
        SparseLu::factor(self.std.m, &refs)
    }

    fn cost(&self, j: usize, phase1: bool) -> Rational {
        match (phase1, j < self.std.n) {
            (true, true) => zero(),
            (true, false) => one(),
            (false, true) => self.std.c[j].clone(),
            (false, false) => zero(),
        }
    }

    fn iterate(&mut self, phase1: bool, limit: usize) -> Result<Outcome> {
        let n = self.std.n;
        for _ in 0..limit {
            let lu = self.factor()?;
            let xb = lu.solve(&self.std.b);
            let cb: Vec<Rational> = self.basis.iter().map(|&j| self.cost(j, phase1)).collect();
            let y = lu.solve_transpose(&cb);
            let mut in_basis = vec![false; n];
            for &j in &self.basis {
                if j < n {
                    in_basis[j] = true;
                }
            }
            // Bland: lowest-index improving column; artificials never enter.
            let entering = (0..n).find(|&j| {
                !in_basis[j] && (self.cost(j, phase1) - dot_col(&y, &self.std.cols[j])).is_negative()
            });
            let Some(q) = entering else { return Ok(Outcome::Optimal) };
            let mut dense = vec![zero(); self.std.m];
            for (i, a) in &self.std.cols[q] {
                dense[*i] = a.clone();
            }
            let u = lu.solve(&dense);
            let mut leave: Option<(usize, Rational)> = None;
            for p in 0..self.std.m {
                let artificial = self.basis[p] >= n;
                let ratio = if !phase1 && artificial && !u[p].is_zero() {
                    // Artificials at zero level must stay at zero.
                    zero()
                } else if u[p].is_positive() {
                    &xb[p] / &u[p]
                } else {
                    continue;
                };
                let better = match &leave {
                    None => true,
                    Some((lp, lr)) => ratio < *lr || (ratio == *lr && self.basis[p] < self.basis[*lp]),
                };
                if better {
                    leave = Some((p, ratio));
                }
            }
            let Some((p, _)) = leave else { return Ok(Outcome::Unbounded) };
            self.basis[p] = q;
        }
        Err(Error::Solver(format!("exact simplex exceeded {limit} iterations")))
    }
}

/// Full two-phase exact solve. A warm-start basis is used for phase 2 when it
/// is nonsingular and primal feasible.
pub(crate) fn solve(std: &StdForm, warm: Option<&[usize]>) -> Result<StdSolution> {
    let m = std.m;
    let limit = 100 * (m + std.n) + 1000;
    let mut rs = Revised { std, units: unit_columns(m), basis: Vec::new() };
    let mut warmed = false;
    if let Some(w) = warm {
        rs.basis = w.iter().enumerate().map(|(i, &j)| if j < std.n { j } else { std.n + i }).collect();
        let mut seen = vec![false; std.n + m];
        let distinct = rs.basis.iter().all(|&j| !std::mem::replace(&mut seen[j], true));
        if distinct {
            if let Ok(lu) = rs.factor() {
                let xb = lu.solve(&std.b);
                let art_zero = rs.basis.iter().zip(&xb).all(|(&j, v)| j < std.n || v.is_zero());
                warmed = art_zero && xb.iter().all(|v| !v.is_negative());
            }
        }
    }
    if !warmed {
        rs.basis = (0..m).map(|i| std.unit_col[i].unwrap_or(std.n + i)).collect();
        if rs.basis.iter().any(|&j| j >= std.n) {
            rs.iterate(true, limit)?;
            let lu = rs.factor()?;
            let xb = lu.solve(&std.b);
            let infeasible = rs.basis.iter().zip(&xb).any(|(&j, v)| j >= std.n && !v.is_zero());
            if infeasible {
                return Ok(StdSolution { status: Status::Infeasible, z: Vec::new(), y: Vec::new() });
            }
        }
    }
    match rs.iterate(false, limit)? {
        Outcome::Unbounded => Ok(StdSolution { status: Status::Unbounded, z: Vec::new(), y: Vec::new() }),
        Outcome::Optimal => {
            let lu = rs.factor()?;
            let xb = lu.solve(&std.b);
            let cb: Vec<Rational> = rs.basis.iter().map(|&j| rs.cost(j, false)).collect();
            let y = lu.solve_transpose(&cb);
            let mut z = vec![zero(); std.n];
            for (p, &j) in rs.basis.iter().enumerate() {
                if j < std.n {
                    z[j] = xb[p].clone();
                }
            }
            Ok(StdSolution { status: Status::Optimal, z, y })
        }
    }
}
