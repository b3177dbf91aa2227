//! Two-phase dense-tableau simplex in `f64`.
//!
//! Entering column by most negative reduced cost. The leaving row comes from
//! a Harris ratio test; after a run of pivots without objective progress it
//! comes from a lexicographic ratio test instead, which rules out cycling,
//! until progress resumes. Its output is a basis suggestion; exact optimality
//! is decided elsewhere.

use super::standard::{FloatStd, StdForm};
use super::Status;
use crate::error::{Error, Result};
use crate::rational;

const PIVOT_TOL: f64 = 1e-7;
const FEAS_TOL: f64 = 1e-9;
const CLEAN_TOL: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;
const MAX_ENTRIES: usize = 60_000_000;

struct Tableau {
    m: usize,
    ncols: usize,
    t: Vec<f64>,
    rhs: Vec<f64>,
    d: Vec<f64>,
    obj: f64,
    basis: Vec<usize>,
    pivots: usize,
    scratch: Vec<usize>,
    /// Column that started as the unit vector of each row; together they
    /// hold the basis inverse.
    units: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncols + j]
    }

    /// Lexicographic comparison of rows `i` and `k` of the basis inverse,
    /// each scaled by its entry in column `q`.
    fn lex_less(&self, i: usize, k: usize, q: usize) -> bool {
        let (ai, ak) = (self.at(i, q), self.at(k, q));
        for &u in &self.units {
            let (x, y) = (self.at(i, u) / ai, self.at(k, u) / ak);
            if (x - y).abs() > 1e-9 {
                return x < y;
            }
        }
        false
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + q];
        let inv = 1.0 / p;
        self.scratch.clear();
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < CLEAN_TOL {
                        *v = 0.0;
                    } else {
                        self.scratch.push(j);
                    }
                }
            }
            row[q] = 1.0;
        }
        self.rhs[r] = (self.rhs[r] * inv).max(0.0);
        let rr = self.rhs[r];
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        let update = |row: &mut [f64], rhs: &mut f64, nz: &[usize]| {
            let f = row[q];
            if f == 0.0 {
                return;
            }
            for &j in nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < CLEAN_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
            *rhs -= f * rr;
            if *rhs < CLEAN_TOL && *rhs > -10.0 * FEAS_TOL {
                *rhs = 0.0;
            }
        };
        for (i, row) in before.chunks_mut(nc).enumerate() {
            update(row, &mut self.rhs[i], &self.scratch);
        }
        for (k, row) in after.chunks_mut(nc).enumerate() {
            update(row, &mut self.rhs[r + 1 + k], &self.scratch);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &self.scratch {
                let v = self.d[j] - f * prow[j];
                self.d[j] = if v.abs() < CLEAN_TOL { 0.0 } else { v };
            }
            self.d[q] = 0.0;
            self.obj -= f * rr;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Harris two-pass ratio test: bound the step with slightly relaxed
    /// right-hand sides, then take the largest pivot within that bound.
    fn harris_ratio(&self, q: usize) -> Option<usize> {
        let mut theta = f64::INFINITY;
        for i in 0..self.m {
            let a = self.at(i, q);
            if a > PIVOT_TOL {
                theta = theta.min((self.rhs[i].max(0.0) + FEAS_TOL) / a);
            }
        }
        let mut r: Option<usize> = None;
        for i in 0..self.m {
            let a = self.at(i, q);
            if a > PIVOT_TOL && self.rhs[i].max(0.0) / a <= theta && r.is_none_or(|ri| a > self.at(ri, q)) {
                r = Some(i);
            }
        }
        r
    }

    /// Minimum ratio with ties broken lexicographically.
    fn lex_ratio(&self, q: usize) -> Option<usize> {
        let mut r: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, q);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[i].max(0.0) / a;
            r = match r {
                None => Some((i, ratio)),
                Some((_, best)) if ratio < best - FEAS_TOL => Some((i, ratio)),
                Some((k, best)) if ratio <= best + FEAS_TOL && self.lex_less(i, k, q) => Some((i, ratio.min(best))),
                keep => keep,
            };
        }
        r.map(|(i, _)| i)
    }

    /// Runs simplex iterations on the current objective row. Returns
    /// `Ok(true)` at optimality, `Ok(false)` if unbounded.
    fn run(&mut self, allowed: usize, tol: f64, limit: usize) -> Result<bool> {
        let mut degenerate = 0usize;
        let mut in_basis = vec![false; self.ncols];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        loop {
            if self.pivots > limit {
                return Err(Error::Solver(format!("float simplex exceeded {limit} pivots")));
            }
            let lexicographic = degenerate >= DEGENERATE_RUN;
            let mut q = None;
            let mut best = -tol;
            for j in 0..allowed {
                if !in_basis[j] && self.d[j] < best {
                    q = Some(j);
                    best = self.d[j];
                }
            }
            let Some(q) = q else { return Ok(true) };
            let r = if lexicographic { self.lex_ratio(q) } else { self.harris_ratio(q) };
            let Some(r) = r else { return Ok(false) };
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            let before = self.obj;
            self.pivot(r, q);
            // Progress is judged on the objective, so rhs noise cannot reset the run.
            if (self.obj - before).abs() <= 1e-9 * (1.0 + before.abs()) {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }
}

pub(crate) fn solve(std: &StdForm, tol: f64) -> Result<FloatStd> {
    let (m, n) = (std.m, std.n);
    let art_rows: Vec<usize> = (0..m).filter(|&i| std.unit_col[i].is_none()).collect();
    let ncols = n + art_rows.len();
    if m.saturating_mul(ncols) > MAX_ENTRIES {
        return Err(Error::TooLarge(format!(
            "dense tableau of {m} x {ncols} exceeds {MAX_ENTRIES} entries"
        )));
    }
    let mut tab = Tableau {
        m,
        ncols,
        t: vec![0.0; m * ncols],
        rhs: std.b.iter().map(rational::to_f64).collect(),
        d: vec![0.0; ncols],
        obj: 0.0,
        basis: vec![0; m],
        pivots: 0,
        scratch: Vec::with_capacity(ncols),
        units: Vec::new(),
    };
    for (j, col) in std.colsf.iter().enumerate() {
        for &(i, a) in col {
            tab.t[i * ncols + j] = a;
        }
    }
    let mut unit_of_row = vec![0usize; m];
    for i in 0..m {
        if let Some(j) = std.unit_col[i] {
            tab.basis[i] = j;
            unit_of_row[i] = j;
        }
    }
    for (k, &i) in art_rows.iter().enumerate() {
        tab.t[i * ncols + n + k] = 1.0;
        tab.basis[i] = n + k;
        unit_of_row[i] = n + k;
    }
    tab.units = unit_of_row.clone();
    let limit = 50 * (m + ncols) + 10_000;
    let scale = std.b.iter().map(rational::to_f64).fold(1.0f64, |a, b| a.max(b.abs()));

    let mut redundant = vec![false; m];
    if !art_rows.is_empty() {
        for &i in &art_rows {
            for j in 0..n {
                tab.d[j] -= tab.at(i, j);
            }
            tab.obj -= tab.rhs[i];
        }
        tab.run(n, tol, limit)?;
        log::trace!("phase 1 done after {} pivots", tab.pivots);
        if -tab.obj > 1e-7 * scale {
            return Ok(FloatStd {
                status: Status::Infeasible,
                z: Vec::new(),
                y: Vec::new(),
                basis: tab.basis,
                redundant_rows: redundant,
                pivots: tab.pivots,
            });
        }
        let mut in_basis = vec![false; ncols];
        for &b in &tab.basis {
            in_basis[b] = true;
        }
        for i in 0..m {
            if tab.basis[i] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let a = tab.at(i, j).abs();
                if a > 1e-7 && !in_basis[j] && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => {
                    in_basis[tab.basis[i]] = false;
                    in_basis[j] = true;
                    tab.pivot(i, j);
                }
                None => redundant[i] = true,
            }
        }
    }
    // Phase 2 objective row.
    tab.d.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        tab.d[j] = rational::to_f64(&std.c[j]);
    }
    tab.obj = 0.0;
    for i in 0..m {
        let b = tab.basis[i];
        let cb = if b < n { rational::to_f64(&std.c[b]) } else { 0.0 };
        if cb != 0.0 {
            for j in 0..ncols {
                let a = tab.at(i, j);
                if a != 0.0 {
                    tab.d[j] -= cb * a;
                }
            }
            tab.obj -= cb * tab.rhs[i];
        }
    }
    let bounded = tab.run(n, tol, limit)?;
    if !bounded {
        return Ok(FloatStd {
            status: Status::Unbounded,
            z: Vec::new(),
            y: Vec::new(),
            basis: tab.basis,
            redundant_rows: redundant,
            pivots: tab.pivots,
        });
    }
    let mut z = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            z[tab.basis[i]] = tab.rhs[i].max(0.0);
        }
    }
    // Reduced cost of a row's initial unit column is c_u − y_i.
    let y = (0..m)
        .map(|i| {
            let u = unit_of_row[i];
            let cu = if u < n { rational::to_f64(&std.c[u]) } else { 0.0 };
            cu - tab.d[u]
        })
        .collect();
    Ok(FloatStd { status: Status::Optimal, z, y, basis: tab.basis, redundant_rows: redundant, pivots: tab.pivots })
}
