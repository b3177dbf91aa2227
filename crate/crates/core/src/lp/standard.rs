//! Conversion to `min c̃ᵀz, Ãz = b̃, z ≥ 0, b̃ ≥ 0` and back.
//!
//! Variables with a finite lower bound are shifted, variables with only an
//! upper bound are reflected, free variables are split. Finite upper bounds
//! become extra rows after the original constraints. `≤`/`≥` rows get a slack
//! column; rows with negative right-hand side are negated. Original constraint
//! `i` maps to standard row `row_of[i]` with sign `sign[i]`.

use num_traits::{Signed, Zero};

use super::{FloatSolution, LinProgram, LpSolution, Relation, Sense, Status};
use crate::error::{Error, Result};
use crate::rational::{self, zero, Rational};

#[derive(Clone, Debug)]
enum VarMap {
    Shift { col: usize, offset: Rational },
    Reflect { col: usize, offset: Rational },
    Split { pos: usize, neg: usize },
}

pub(crate) struct StdSolution {
    pub status: Status,
    pub z: Vec<Rational>,
    pub y: Vec<Rational>,
}

pub(crate) struct FloatStd {
    pub status: Status,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    /// Basic column per row; indices `>= n` are artificials.
    pub basis: Vec<usize>,
    pub redundant_rows: Vec<bool>,
    pub pivots: usize,
}

pub(crate) struct StdForm {
    pub m: usize,
    pub n: usize,
    pub cols: Vec<Vec<(usize, Rational)>>,
    pub colsf: Vec<Vec<(usize, f64)>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    /// Per row, a column equal to the unit vector of that row, if any.
    pub unit_col: Vec<Option<usize>>,
    row_of: Vec<Option<usize>>,
    sign: Vec<i32>,
    vars: Vec<VarMap>,
    infeasible_empty_row: bool,
}

impl StdForm {
    pub fn build(lp: &LinProgram) -> Result<Self> {
        let obj_sign = match lp.sense() {
            Sense::Max => -1,
            Sense::Min => 1,
        };
        let mut n = 0usize;
        let mut vars = Vec::with_capacity(lp.num_vars());
        let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
        for j in 0..lp.num_vars() {
            let (l, u) = (&lp.lower()[j], &lp.upper()[j]);
            let vm = match (l, u) {
                (Some(l), u) => {
                    let col = n;
                    n += 1;
                    if let Some(u) = u {
                        bound_rows.push((col, u - l));
                    }
                    VarMap::Shift { col, offset: l.clone() }
                }
                (None, Some(u)) => {
                    let col = n;
                    n += 1;
                    VarMap::Reflect { col, offset: u.clone() }
                }
                (None, None) => {
                    n += 2;
                    VarMap::Split { pos: n - 2, neg: n - 1 }
                }
            };
            vars.push(vm);
        }
        let mut c = vec![zero(); n];
        for (j, cj) in lp.objective() {
            let cj = if obj_sign < 0 { -cj.clone() } else { cj.clone() };
            match &vars[*j] {
                VarMap::Shift { col, .. } => c[*col] += &cj,
                VarMap::Reflect { col, .. } => c[*col] -= &cj,
                VarMap::Split { pos, neg } => {
                    c[*pos] += &cj;
                    c[*neg] -= &cj;
                }
            }
        }

        let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
        let mut b = Vec::new();
        let mut sign = Vec::new();
        let mut row_of = Vec::with_capacity(lp.constraints().len());
        let mut slack_of_row: Vec<Option<(usize, i32)>> = Vec::new();
        let mut infeasible_empty_row = false;
        let mut slack_count = 0usize;
        for con in lp.constraints() {
            if con.coeffs.is_empty() {
                let ok = match con.rel {
                    Relation::Le => !con.rhs.is_negative(),
                    Relation::Eq => con.rhs.is_zero(),
                    Relation::Ge => !con.rhs.is_positive(),
                };
                infeasible_empty_row |= !ok;
                row_of.push(None);
                continue;
            }
            let mut row: Vec<(usize, Rational)> = Vec::with_capacity(con.coeffs.len() + 1);
            let mut rhs = con.rhs.clone();
            for (j, a) in &con.coeffs {
                match &vars[*j] {
                    VarMap::Shift { col, offset } => {
                        rhs -= a * offset;
                        row.push((*col, a.clone()));
                    }
                    VarMap::Reflect { col, offset } => {
                        rhs -= a * offset;
                        row.push((*col, -a.clone()));
                    }
                    VarMap::Split { pos, neg } => {
                        row.push((*pos, a.clone()));
                        row.push((*neg, -a.clone()));
                    }
                }
            }
            let slack = match con.rel {
                Relation::Le => Some(1),
                Relation::Ge => Some(-1),
                Relation::Eq => None,
            };
            let slack = slack.map(|s| {
                slack_count += 1;
                (usize::MAX, s)
            });
            let s = if rhs.is_negative() { -1 } else { 1 };
            if s < 0 {
                rhs = -rhs;
                row.iter_mut().for_each(|(_, a)| *a = -a.clone());
            }
            row_of.push(Some(rows.len()));
            rows.push(row);
            b.push(rhs);
            sign.push(s);
            slack_of_row.push(slack.map(|(_, k)| (usize::MAX, k * s)));
        }
        for (col, width) in bound_rows {
            rows.push(vec![(col, Rational::from_integer(1.into()))]);
            b.push(width);
            sign.push(1);
            slack_count += 1;
            slack_of_row.push(Some((usize::MAX, 1)));
        }
        let m = rows.len();
        let total = n + slack_count;
        let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); total];
        for (i, row) in rows.iter().enumerate() {
            for (j, a) in row {
                cols[*j].push((i, a.clone()));
            }
        }
        // Merge duplicate entries created by free-variable splitting of repeated columns.
        for col in cols.iter_mut().take(n) {
            col.sort_by_key(|(i, _)| *i);
            let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(col.len());
            for (i, a) in col.drain(..) {
                match merged.last_mut() {
                    Some((k, v)) if *k == i => *v += a,
                    _ => merged.push((i, a)),
                }
            }
            merged.retain(|(_, a)| !a.is_zero());
            *col = merged;
        }
        let mut unit_col = vec![None; m];
        let mut next = n;
        for (i, s) in slack_of_row.iter().enumerate() {
            if let Some((_, k)) = s {
                cols[next].push((i, Rational::from_integer((*k).into())));
                if *k == 1 {
                    unit_col[i] = Some(next);
                }
                next += 1;
            }
        }
        c.resize(total, zero());
        let colsf = cols
            .iter()
            .map(|col| col.iter().map(|(i, a)| (*i, rational::to_f64(a))).collect())
            .collect();
        if m == 0 && total == 0 && lp.num_vars() > 0 {
            return Err(Error::Invalid("degenerate program".into()));
        }
        Ok(Self { m, n: total, cols, colsf, b, c, unit_col, row_of, sign, vars, infeasible_empty_row })
    }

    pub fn trivially_infeasible(&self) -> Option<Status> {
        self.infeasible_empty_row.then_some(Status::Infeasible)
    }

    fn obj_sign(lp: &LinProgram) -> i32 {
        match lp.sense() {
            Sense::Max => -1,
            Sense::Min => 1,
        }
    }

    fn x_from_z<T: Clone>(&self, z: &[T], map: impl Fn(&Rational) -> T, add: impl Fn(&T, &T) -> T, sub: impl Fn(&T, &T) -> T) -> Vec<T> {
        self.vars
            .iter()
            .map(|v| match v {
                VarMap::Shift { col, offset } => add(&map(offset), &z[*col]),
                VarMap::Reflect { col, offset } => sub(&map(offset), &z[*col]),
                VarMap::Split { pos, neg } => sub(&z[*pos], &z[*neg]),
            })
            .collect()
    }

    pub fn to_original(&self, lp: &LinProgram, s: StdSolution) -> LpSolution {
        if s.status != Status::Optimal {
            return LpSolution { status: s.status, value: zero(), primal: Vec::new(), dual: Vec::new() };
        }
        let x = self.x_from_z(&s.z, |r| r.clone(), |a, b| a + b, |a, b| a - b);
        let os = Self::obj_sign(lp);
        let dual = self
            .row_of
            .iter()
            .map(|r| match r {
                Some(r) => {
                    let y = &s.y[*r];
                    if os * self.sign[*r] < 0 {
                        -y.clone()
                    } else {
                        y.clone()
                    }
                }
                None => zero(),
            })
            .collect();
        let value = lp.objective_value(&x);
        LpSolution { status: Status::Optimal, value, primal: x, dual }
    }

    pub fn to_original_float(&self, lp: &LinProgram, s: &FloatStd, tol: f64) -> FloatSolution {
        let mut out = FloatSolution {
            status: s.status,
            value: 0.0,
            dual_value: 0.0,
            primal: Vec::new(),
            dual: Vec::new(),
            max_violation: 0.0,
            max_dual_violation: 0.0,
            tolerance: tol,
        };
        if s.status != Status::Optimal {
            return out;
        }
        let x = self.x_from_z(&s.z, rational::to_f64, |a, b| a + b, |a, b| a - b);
        let os = Self::obj_sign(lp) as f64;
        let y: Vec<f64> = self
            .row_of
            .iter()
            .map(|r| r.map_or(0.0, |r| os * self.sign[r] as f64 * s.y[r]))
            .collect();
        let check = float_certificate(lp, &x, &y);
        out.value = check.primal_value;
        out.dual_value = check.dual_value;
        out.max_violation = check.max_violation;
        out.max_dual_violation = check.max_dual_violation;
        out.primal = x;
        out.dual = y;
        out
    }
}

pub(crate) struct FloatCheck {
    pub primal_value: f64,
    pub dual_value: f64,
    pub max_violation: f64,
    pub max_dual_violation: f64,
}

/// Floating-point analogue of [`super::check_certificate`]. Reduced costs that
/// point at an infinite bound count as dual violations instead of making the
/// bound infinite.
pub(crate) fn float_certificate(lp: &LinProgram, x: &[f64], y: &[f64]) -> FloatCheck {
    let n = lp.num_vars();
    let max = lp.sense() == Sense::Max;
    let mut viol: f64 = 0.0;
    let mut dviol: f64 = 0.0;
    let lower: Vec<Option<f64>> = lp.lower().iter().map(|b| b.as_ref().map(rational::to_f64)).collect();
    let upper: Vec<Option<f64>> = lp.upper().iter().map(|b| b.as_ref().map(rational::to_f64)).collect();
    for j in 0..n {
        if let Some(l) = lower[j] {
            viol = viol.max(l - x[j]);
        }
        if let Some(u) = upper[j] {
            viol = viol.max(x[j] - u);
        }
    }
    let mut d = vec![0.0; n];
    for (j, c) in lp.objective() {
        d[*j] = rational::to_f64(c);
    }
    let mut dual_value = 0.0;
    for (i, con) in lp.constraints().iter().enumerate() {
        let ax: f64 = con.coeffs.iter().map(|(j, a)| rational::to_f64(a) * x[*j]).sum();
        let rhs = rational::to_f64(&con.rhs);
        viol = viol.max(match con.rel {
            Relation::Le => ax - rhs,
            Relation::Eq => (ax - rhs).abs(),
            Relation::Ge => rhs - ax,
        });
        let yi = y[i];
        dviol = dviol.max(match (con.rel, max) {
            (Relation::Eq, _) => 0.0,
            (Relation::Le, true) | (Relation::Ge, false) => -yi,
            (Relation::Ge, true) | (Relation::Le, false) => yi,
        });
        dual_value += yi * rhs;
        for (j, a) in &con.coeffs {
            d[*j] -= rational::to_f64(a) * yi;
        }
    }
    for j in 0..n {
        let upper_side = (d[j] > 0.0) == max;
        let bound = if upper_side { upper[j] } else { lower[j] };
        match bound {
            Some(b) => dual_value += d[j] * b,
            None => dviol = dviol.max(d[j].abs()),
        }
    }
    let primal_value = lp.objective().iter().map(|(j, c)| rational::to_f64(c) * x[*j]).sum();
    FloatCheck { primal_value, dual_value, max_violation: viol.max(0.0), max_dual_violation: dviol.max(0.0) }
}
