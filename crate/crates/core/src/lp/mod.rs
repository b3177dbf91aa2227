//! Linear programs over exact rationals.
//!
//! The default solver runs a floating-point simplex to locate an optimal basis,
//! then recomputes the primal and dual solutions of that basis exactly with a
//! rational sparse LU and checks optimality. When that check fails it falls back
//! to a fully exact revised simplex under Bland's rule. Results always carry a
//! dual vector that [`verify_certificate`] can re-check independently.
//!
//! Dual convention: for a maximization, multipliers of `≤` rows are
//! nonnegative, of `≥` rows nonpositive, and of `=` rows free; for a
//! minimization the signs are reversed. With reduced costs `d = c − Aᵀy`, the
//! dual bound is `bᵀy + Σ_j opt_{x_j ∈ [l_j,u_j]} d_j x_j`.

mod exact_simplex;
mod float_simplex;
mod sparse_lu;
mod standard;
pub mod symmetry;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, zero, Rational};

pub use sparse_lu::SparseLu;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
    group: usize,
}

impl Constraint {
    pub fn group(&self) -> usize {
        self.group
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<(usize, Rational)>,
    constraints: Vec<Constraint>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    groups: Vec<String>,
}

/// Sorts by column, merges duplicates and drops zeros.
fn normalize_row(mut coeffs: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    coeffs.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

impl LinProgram {
    /// Variables default to `x ≥ 0`.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
            lower: vec![Some(zero()); num_vars],
            upper: vec![None; num_vars],
            groups: vec!["default".into()],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower(&self) -> &[Option<Rational>] {
        &self.lower
    }

    pub fn upper(&self) -> &[Option<Rational>] {
        &self.upper
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, Rational)>) -> Result<()> {
        self.check_indices(&coeffs)?;
        self.objective = normalize_row(coeffs);
        Ok(())
    }

    /// Returns the id of group `name`, creating it if needed.
    pub fn group(&mut self, name: &str) -> usize {
        if let Some(i) = self.groups.iter().position(|g| g == name) {
            return i;
        }
        self.groups.push(name.to_owned());
        self.groups.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> Result<usize> {
        self.add_constraint_in(0, coeffs, rel, rhs)
    }

    pub fn add_constraint_in(
        &mut self,
        group: usize,
        coeffs: Vec<(usize, Rational)>,
        rel: Relation,
        rhs: Rational,
    ) -> Result<usize> {
        self.check_indices(&coeffs)?;
        if group >= self.groups.len() {
            return Err(Error::Invalid(format!("unknown constraint group {group}")));
        }
        self.constraints.push(Constraint { coeffs: normalize_row(coeffs), rel, rhs, group });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> Result<()> {
        if var >= self.num_vars {
            return Err(Error::Invalid(format!("variable {var} out of range")));
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l > u {
                return Err(Error::Invalid(format!("variable {var}: lower bound {l} exceeds upper {u}")));
            }
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    fn check_indices(&self, coeffs: &[(usize, Rational)]) -> Result<()> {
        match coeffs.iter().find(|(j, _)| *j >= self.num_vars) {
            Some((j, _)) => Err(Error::Invalid(format!("column {j} out of range (num_vars = {})", self.num_vars))),
            None => Ok(()),
        }
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &x[*j]).sum()
    }

    /// Indices of constraints in a named group.
    pub fn group_rows(&self, name: &str) -> Vec<usize> {
        match self.groups.iter().position(|g| g == name) {
            Some(g) => (0..self.constraints.len()).filter(|&i| self.constraints[i].group == g).collect(),
            None => Vec::new(),
        }
    }

    /// One line per objective, constraint, and non-default bound; rationals as `p/q`.
    pub fn dump(&self) -> String {
        let term = |(j, a): &(usize, Rational)| format!("{a} x{j}");
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Max => "max",
            Sense::Min => "min",
        };
        let obj: Vec<String> = self.objective.iter().map(term).collect();
        let _ = writeln!(s, "vars {}", self.num_vars);
        let _ = writeln!(s, "{sense}: {}", obj.join(" + "));
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs: Vec<String> = c.coeffs.iter().map(term).collect();
            let _ = writeln!(
                s,
                "c{i} [{}]: {} {} {}",
                self.groups[c.group],
                lhs.join(" + "),
                c.rel.symbol(),
                c.rhs
            );
        }
        for j in 0..self.num_vars {
            let l = &self.lower[j];
            let u = &self.upper[j];
            if l.as_ref().is_some_and(|l| l.is_zero()) && u.is_none() {
                continue;
            }
            let show = |b: &Option<Rational>, inf: &str| b.as_ref().map_or(inf.to_string(), |v| v.to_string());
            let _ = writeln!(s, "bound x{j}: {} .. {}", show(l, "-inf"), show(u, "+inf"));
        }
        s
    }
}

/// Anything that accepts constraint rows by group name.
pub trait RowSink {
    fn push_row(&mut self, group: &str, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> Result<()>;
}

impl RowSink for LinProgram {
    fn push_row(&mut self, group: &str, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> Result<()> {
        let g = self.group(group);
        self.add_constraint_in(g, coeffs, rel, rhs).map(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub value: Rational,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
}

impl LpSolution {
    fn without_point(status: Status) -> Self {
        Self { status, value: zero(), primal: Vec::new(), dual: Vec::new() }
    }

    /// Dual multipliers of the constraints in `group`, keyed by constraint index.
    pub fn group_duals(&self, lp: &LinProgram, group: &str) -> BTreeMap<usize, Rational> {
        lp.group_rows(group).into_iter().map(|i| (i, self.dual[i].clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloatSolution {
    pub status: Status,
    pub value: f64,
    pub dual_value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// Largest constraint or bound violation of `primal`.
    pub max_violation: f64,
    /// Largest dual sign or reduced-cost violation of `dual`.
    pub max_dual_violation: f64,
    pub tolerance: f64,
}

impl FloatSolution {
    pub fn within_tolerance(&self) -> bool {
        self.status != Status::Optimal
            || ((self.value - self.dual_value).abs() <= self.tolerance
                && self.max_violation <= self.tolerance
                && self.max_dual_violation <= self.tolerance)
    }
}

pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Exact,
    Float(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solved {
    Exact(LpSolution),
    Float(FloatSolution),
}

impl Solved {
    pub fn status(&self) -> Status {
        match self {
            Solved::Exact(s) => s.status,
            Solved::Float(s) => s.status,
        }
    }

    pub fn value_f64(&self) -> f64 {
        match self {
            Solved::Exact(s) => rational::to_f64(&s.value),
            Solved::Float(s) => s.value,
        }
    }
}

pub fn solve(lp: &LinProgram, mode: Mode) -> Result<Solved> {
    match mode {
        Mode::Exact => solve_exact(lp).map(Solved::Exact),
        Mode::Float(tol) => solve_float(lp, tol).map(Solved::Float),
    }
}

/// Exact optimum with a dual certificate.
pub fn solve_exact(lp: &LinProgram) -> Result<LpSolution> {
    let std = standard::StdForm::build(lp)?;
    if let Some(status) = std.trivially_infeasible() {
        return Ok(LpSolution::without_point(status));
    }
    let guide = float_simplex::solve(&std, DEFAULT_FLOAT_TOLERANCE);
    let exact = match &guide {
        Ok(fs) if fs.status == Status::Optimal => {
            match exact_simplex::certify_basis(&std, &fs.basis, &fs.redundant_rows) {
                Ok(sol) => {
                    log::debug!("float-guided basis certified exactly ({} pivots)", fs.pivots);
                    Some(sol)
                }
                Err(e) => {
                    log::debug!("float-guided basis rejected: {e}; continuing exactly");
                    exact_simplex::solve(&std, Some(&fs.basis)).ok()
                }
            }
        }
        Ok(fs) => {
            log::debug!("float guide reports {:?}; confirming exactly", fs.status);
            None
        }
        Err(e) => {
            log::debug!("float guide failed: {e}");
            None
        }
    };
    let std_sol = match exact {
        Some(s) => s,
        None => exact_simplex::solve(&std, None)?,
    };
    Ok(std.to_original(lp, std_sol))
}

pub fn solve_float(lp: &LinProgram, tol: f64) -> Result<FloatSolution> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("float tolerance must be positive, got {tol}")));
    }
    let std = standard::StdForm::build(lp)?;
    if let Some(status) = std.trivially_infeasible() {
        return Ok(FloatSolution {
            status,
            value: 0.0,
            dual_value: 0.0,
            primal: Vec::new(),
            dual: Vec::new(),
            max_violation: 0.0,
            max_dual_violation: 0.0,
            tolerance: tol,
        });
    }
    let fs = float_simplex::solve(&std, tol.min(DEFAULT_FLOAT_TOLERANCE))?;
    Ok(std.to_original_float(lp, &fs, tol))
}

/// Outcome of [`check_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub ok: bool,
    pub reasons: Vec<String>,
    pub primal_value: Rational,
    pub dual_value: Option<Rational>,
}

pub fn verify_certificate(lp: &LinProgram, sol: &LpSolution) -> bool {
    check_certificate(lp, sol).ok
}

/// Re-checks primal feasibility, dual feasibility, and equality of the primal
/// objective with the dual bound, in exact arithmetic.
pub fn check_certificate(lp: &LinProgram, sol: &LpSolution) -> CertificateReport {
    let mut reasons = Vec::new();
    let n = lp.num_vars;
    let primal_value;
    if sol.status != Status::Optimal {
        reasons.push(format!("status is {:?}", sol.status));
        return CertificateReport { ok: false, reasons, primal_value: zero(), dual_value: None };
    }
    if sol.primal.len() != n || sol.dual.len() != lp.constraints.len() {
        reasons.push("primal or dual vector has the wrong length".into());
        return CertificateReport { ok: false, reasons, primal_value: zero(), dual_value: None };
    }
    let x = &sol.primal;
    for j in 0..n {
        if let Some(l) = &lp.lower[j] {
            if &x[j] < l {
                reasons.push(format!("x{j} = {} below lower bound {l}", x[j]));
            }
        }
        if let Some(u) = &lp.upper[j] {
            if &x[j] > u {
                reasons.push(format!("x{j} = {} above upper bound {u}", x[j]));
            }
        }
    }
    let max = lp.sense == Sense::Max;
    let mut d: Vec<Rational> = vec![zero(); n];
    for (j, c) in &lp.objective {
        d[*j] = c.clone();
    }
    let mut dual_value = zero();
    for (i, c) in lp.constraints.iter().enumerate() {
        let ax: Rational = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
        let ok = match c.rel {
            Relation::Le => ax <= c.rhs,
            Relation::Eq => ax == c.rhs,
            Relation::Ge => ax >= c.rhs,
        };
        if !ok {
            reasons.push(format!("constraint {i}: lhs {ax} {} {} violated", c.rel.symbol(), c.rhs));
        }
        let y = &sol.dual[i];
        // Sign rule for a maximization; flipped for minimization.
        let sign_ok = match (c.rel, max) {
            (Relation::Eq, _) => true,
            (Relation::Le, true) | (Relation::Ge, false) => !y.is_negative(),
            (Relation::Ge, true) | (Relation::Le, false) => !y.is_positive(),
        };
        if !sign_ok {
            reasons.push(format!("dual {i} = {y} has the wrong sign for a {} row", c.rel.symbol()));
        }
        if !y.is_zero() {
            dual_value += y * &c.rhs;
            for (j, a) in &c.coeffs {
                d[*j] -= a * y;
            }
        }
    }
    let mut finite = true;
    for j in 0..n {
        if d[j].is_zero() {
            continue;
        }
        // Maximization takes sup of d_j x_j over the box; minimization inf.
        let upper_side = d[j].is_positive() == max;
        let bound = if upper_side { &lp.upper[j] } else { &lp.lower[j] };
        match bound {
            Some(b) => dual_value += &d[j] * b,
            None => {
                finite = false;
                reasons.push(format!("reduced cost of x{j} is {} with an infinite bound", d[j]));
            }
        }
    }
    primal_value = lp.objective_value(x);
    if finite && primal_value != dual_value {
        reasons.push(format!("primal objective {primal_value} differs from dual bound {dual_value}"));
    }
    if sol.value != primal_value {
        reasons.push(format!("reported value {} differs from primal objective {primal_value}", sol.value));
    }
    CertificateReport {
        ok: reasons.is_empty(),
        reasons,
        primal_value,
        dual_value: finite.then_some(dual_value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn row(v: &[(usize, i64)]) -> Vec<(usize, Rational)> {
        v.iter().map(|&(j, a)| (j, int(a))).collect()
    }

    #[test]
    fn single_variable() {
        let mut lp = LinProgram::new(1, Sense::Max);
        lp.set_objective(row(&[(0, 1)])).unwrap();
        lp.add_constraint(row(&[(0, 1)]), Relation::Le, int(3)).unwrap();
        let s = solve_exact(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.value, int(3));
        assert!(verify_certificate(&lp, &s));
    }

    #[test]
    fn degenerate_optimum() {
        let mut lp = LinProgram::new(2, Sense::Max);
        lp.set_objective(row(&[(0, 1), (1, 1)])).unwrap();
        lp.add_constraint(row(&[(0, 1), (1, 1)]), Relation::Le, int(1)).unwrap();
        lp.add_constraint(row(&[(0, 1)]), Relation::Le, int(1)).unwrap();
        lp.add_constraint(row(&[(1, 1)]), Relation::Le, int(1)).unwrap();
        let s = solve_exact(&lp).unwrap();
        assert_eq!(s.value, int(1));
        assert!(verify_certificate(&lp, &s));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinProgram::new(1, Sense::Max);
        lp.set_objective(row(&[(0, 1)])).unwrap();
        lp.add_constraint(row(&[(0, 1)]), Relation::Ge, int(2)).unwrap();
        assert_eq!(solve_exact(&lp).unwrap().status, Status::Unbounded);
        lp.add_constraint(row(&[(0, 1)]), Relation::Le, int(1)).unwrap();
        assert_eq!(solve_exact(&lp).unwrap().status, Status::Infeasible);
        assert_eq!(solve_float(&lp, 1e-9).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn minimization_with_bounds_and_free_variables() {
        // min x - y, -1 <= x <= 4, y free, x + y = 2, y <= 5
        let mut lp = LinProgram::new(2, Sense::Min);
        lp.set_objective(row(&[(0, 1), (1, -1)])).unwrap();
        lp.set_bounds(0, Some(int(-1)), Some(int(4))).unwrap();
        lp.set_bounds(1, None, None).unwrap();
        lp.add_constraint(row(&[(0, 1), (1, 1)]), Relation::Eq, int(2)).unwrap();
        lp.add_constraint(row(&[(1, 1)]), Relation::Le, int(5)).unwrap();
        let s = solve_exact(&lp).unwrap();
        assert_eq!(s.value, int(-4));
        assert_eq!(s.primal, vec![int(-1), int(3)]);
        let report = check_certificate(&lp, &s);
        assert!(report.ok, "{:?}", report.reasons);
    }

    #[test]
    fn fractional_optimum() {
        // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
        let mut lp = LinProgram::new(2, Sense::Max);
        lp.set_objective(row(&[(0, 3), (1, 2)])).unwrap();
        lp.add_constraint(row(&[(0, 1), (1, 1)]), Relation::Le, int(4)).unwrap();
        lp.add_constraint(row(&[(0, 1), (1, 3)]), Relation::Le, int(6)).unwrap();
        lp.add_constraint(row(&[(0, 2)]), Relation::Le, int(7)).unwrap();
        let s = solve_exact(&lp).unwrap();
        assert_eq!(s.value, rat(23, 2));
        assert!(verify_certificate(&lp, &s));
    }

    #[test]
    fn perturbed_or_zeroed_certificates_fail() {
        let mut lp = LinProgram::new(2, Sense::Max);
        lp.set_objective(row(&[(0, 1), (1, 1)])).unwrap();
        lp.add_constraint(row(&[(0, 1), (1, 2)]), Relation::Le, int(4)).unwrap();
        lp.add_constraint(row(&[(0, 3), (1, 1)]), Relation::Le, int(6)).unwrap();
        let s = solve_exact(&lp).unwrap();
        assert!(verify_certificate(&lp, &s));
        let mut bumped = s.clone();
        bumped.primal[0] += rat(1, 1_000_000);
        assert!(!verify_certificate(&lp, &bumped));
        let mut zeroed = s.clone();
        zeroed.dual.iter_mut().for_each(|y| *y = zero());
        assert!(!verify_certificate(&lp, &zeroed));
    }

    #[test]
    fn dump_lists_every_row() {
        let mut lp = LinProgram::new(2, Sense::Max);
        lp.set_objective(row(&[(0, 1)])).unwrap();
        let g = lp.group("norm");
        lp.add_constraint_in(g, vec![(0, rat(1, 2)), (1, int(1))], Relation::Eq, int(1)).unwrap();
        let text = lp.dump();
        assert!(text.contains("c0 [norm]: 1/2 x0 + 1 x1 = 1"), "{text}");
    }
}
