//! Single-round values: no-signalling game values, ε-almost-no-signalling
//! values with grouped dual certificates, and adversarial guessing
//! probabilities.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{chain_expression_functional, Game, Scenario};
use crate::index::Radix;
use crate::lp::{check_certificate, solve_exact, LinProgram, LpSolution, Relation, Sense, Status};
use crate::rational::{int, one, rat, zero, Rational};

/// Adds, for every party `k`, equalities stating that the marginal of the other
/// parties does not depend on `x_k`. Together they give no-signalling across
/// every bipartition. Variables of the block start at `offset`, laid out in
/// the scenario's event order.
pub fn add_ns_rows(lp: &mut LinProgram, group: usize, sc: &Scenario, offset: usize) -> Result<()> {
    let irad = sc.in_radix();
    for k in 0..sc.parties() {
        let mut others_out = sc.outputs.clone();
        others_out[k] = 1;
        let orad = Radix::new(others_out);
        for ins in irad.iter() {
            if ins[k] == 0 {
                continue;
            }
            let mut base = ins.clone();
            base[k] = 0;
            for o in orad.iter() {
                let mut row = Vec::with_capacity(2 * sc.outputs[k]);
                for ak in 0..sc.outputs[k] {
                    let mut outs = o.clone();
                    outs[k] = ak;
                    row.push((offset + sc.event_of(&outs, &ins), one()));
                    row.push((offset + sc.event_of(&outs, &base), -one()));
                }
                lp.add_constraint_in(group, row, Relation::Eq, zero())?;
            }
        }
    }
    Ok(())
}

/// Adds `Σ_o P(o|x) = 1` for every input `x`.
fn add_normalization(lp: &mut LinProgram, group: usize, sc: &Scenario, offset: usize) -> Result<()> {
    let n_in = sc.n_in();
    for i in 0..n_in {
        let row = (0..sc.n_out()).map(|o| (offset + sc.event(o, i), one())).collect();
        lp.add_constraint_in(group, row, Relation::Eq, one())?;
    }
    Ok(())
}

/// LP whose optimum is the no-signalling value of `g`.
pub fn ns_value_lp(g: &Game) -> Result<LinProgram> {
    let sc = g.scenario();
    let mut lp = LinProgram::new(sc.n_events(), Sense::Max);
    lp.set_objective(g.functional().into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())?;
    let norm = lp.group("N");
    add_normalization(&mut lp, norm, sc, 0)?;
    let ns = lp.group("ns");
    add_ns_rows(&mut lp, ns, sc, 0)?;
    Ok(lp)
}

fn solve_certified(lp: &LinProgram) -> Result<LpSolution> {
    let sol = solve_exact(lp)?;
    if sol.status == Status::Optimal {
        let report = check_certificate(lp, &sol);
        if !report.ok {
            return Err(Error::Verification(report.reasons.join("; ")));
        }
    }
    Ok(sol)
}

pub fn ns_value(g: &Game) -> Result<Rational> {
    let lp = ns_value_lp(g)?;
    let sol = solve_certified(&lp)?;
    match sol.status {
        Status::Optimal => Ok(sol.value),
        s => Err(Error::Solver(format!("no-signalling LP reported {s:?}"))),
    }
}

/// A marginal family: the outputs of `kept` parties may depend on the inputs
/// of the remaining parties by at most ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Family {
    pub kept: Vec<usize>,
    pub varied: Vec<usize>,
    pub label: String,
}

const PARTY: [&str; 3] = ["a", "b", "e"];
const INPUT: [&str; 3] = ["x", "y", "z"];

/// Families in the order (be|x), (ae|y), (ab|z), (e|xy), (b|xz), (a|yz) for
/// three parties, and (b|x), (a|y) for two.
pub fn families(parties: usize) -> Vec<Family> {
    let mut masks: Vec<usize> = (1..(1 << parties) - 1).collect();
    masks.sort_by_key(|&m| (std::cmp::Reverse((m as u32).count_ones()), std::cmp::Reverse(m)));
    masks
        .into_iter()
        .map(|m| {
            let kept: Vec<usize> = (0..parties).filter(|k| m >> k & 1 == 1).collect();
            let varied: Vec<usize> = (0..parties).filter(|k| m >> k & 1 == 0).collect();
            let label = format!(
                "{}|{}",
                kept.iter().map(|&k| PARTY[k]).collect::<String>(),
                varied.iter().map(|&k| INPUT[k]).collect::<String>()
            );
            Family { kept, varied, label }
        })
        .collect()
}

/// LP for the ε-almost-no-signalling value: each family's marginal may differ
/// by at most ε between any two settings of the varied inputs.
pub fn eps_ns_lp(g: &Game, eps: &Rational) -> Result<LinProgram> {
    if eps < &zero() {
        return Err(Error::Invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    let sc = g.scenario();
    let mut lp = LinProgram::new(sc.n_events(), Sense::Max);
    lp.set_objective(g.functional().into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())?;
    let norm = lp.group("N");
    add_normalization(&mut lp, norm, sc, 0)?;
    let orad = sc.out_radix();
    let irad = sc.in_radix();
    for fam in families(sc.parties()) {
        let gid = lp.group(&format!("tau[{}]", fam.label));
        let kept_out = Radix::new(fam.kept.iter().map(|&k| sc.outputs[k]).collect());
        let kept_in = Radix::new(fam.kept.iter().map(|&k| sc.inputs[k]).collect());
        let varied_in = Radix::new(fam.varied.iter().map(|&k| sc.inputs[k]).collect());
        // Marginal M(kept outs | kept ins, varied ins) as a sparse row.
        let marginal = |ko: &[usize], ki: &[usize], vi: &[usize]| -> Vec<(usize, Rational)> {
            let mut ins = vec![0; sc.parties()];
            for (p, &k) in fam.kept.iter().enumerate() {
                ins[k] = ki[p];
            }
            for (p, &k) in fam.varied.iter().enumerate() {
                ins[k] = vi[p];
            }
            let in_idx = irad.encode(&ins);
            orad.iter()
                .enumerate()
                .filter(|(_, outs)| fam.kept.iter().zip(ko).all(|(&k, &v)| outs[k] == v))
                .map(|(o, _)| (sc.event(o, in_idx), one()))
                .collect()
        };
        for ko in kept_out.iter() {
            for ki in kept_in.iter() {
                let rows: Vec<Vec<(usize, Rational)>> = varied_in.iter().map(|vi| marginal(&ko, &ki, &vi)).collect();
                for s in 0..rows.len() {
                    for t in s + 1..rows.len() {
                        let diff = |p: &[(usize, Rational)], q: &[(usize, Rational)]| {
                            p.iter().cloned().chain(q.iter().map(|(j, a)| (*j, -a.clone()))).collect::<Vec<_>>()
                        };
                        lp.add_constraint_in(gid, diff(&rows[s], &rows[t]), Relation::Le, eps.clone())?;
                        lp.add_constraint_in(gid, diff(&rows[t], &rows[s]), Relation::Le, eps.clone())?;
                    }
                }
            }
        }
    }
    Ok(lp)
}

#[derive(Clone, Debug)]
pub struct DualGroup {
    pub name: String,
    /// Nonzero multipliers as (constraint index, value).
    pub multipliers: Vec<(usize, Rational)>,
    pub total: Rational,
}

#[derive(Clone, Debug)]
pub struct EpsNsReport {
    pub epsilon: Rational,
    pub value: Rational,
    pub dual_groups: Vec<DualGroup>,
    pub certificate_verified: bool,
    pub solution: LpSolution,
}

pub fn eps_ns_value(g: &Game, eps: &Rational) -> Result<EpsNsReport> {
    let lp = eps_ns_lp(g, eps)?;
    let sol = solve_certified(&lp)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!("ε-NS LP reported {:?}", sol.status)));
    }
    let dual_groups = lp
        .groups()
        .iter()
        .skip(1)
        .map(|name| {
            let multipliers: Vec<(usize, Rational)> = lp
                .group_rows(name)
                .into_iter()
                .filter(|&i| !sol.dual[i].is_zero())
                .map(|i| (i, sol.dual[i].clone()))
                .collect();
            let total = multipliers.iter().map(|(_, y)| y.clone()).sum();
            DualGroup { name: name.clone(), multipliers, total }
        })
        .collect();
    Ok(EpsNsReport { epsilon: eps.clone(), value: sol.value.clone(), dual_groups, certificate_verified: true, solution: sol })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SlopeReport {
    /// Values are exactly `intercept + slope·ε` on the whole grid.
    Affine { slope: Rational, intercept: Rational },
    /// Consecutive-point slopes `(ε_lo, ε_hi, slope)` when they differ.
    Piecewise(Vec<(Rational, Rational, Rational)>),
}

impl SlopeReport {
    pub fn slope(&self) -> Option<&Rational> {
        match self {
            SlopeReport::Affine { slope, .. } => Some(slope),
            SlopeReport::Piecewise(_) => None,
        }
    }
}

/// Finite-difference slope of [`eps_ns_value`] over `grid`, with an exact
/// affinity check.
pub fn alpha_slope(g: &Game, grid: &[Rational]) -> Result<SlopeReport> {
    let mut pts: Vec<Rational> = grid.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::Invalid("alpha_slope needs at least two distinct grid points".into()));
    }
    let values: Vec<Rational> = pts
        .par_iter()
        .map(|e| eps_ns_value(g, e).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let slopes: Vec<(Rational, Rational, Rational)> = pts
        .windows(2)
        .zip(values.windows(2))
        .map(|(e, v)| (e[0].clone(), e[1].clone(), (&v[1] - &v[0]) / (&e[1] - &e[0])))
        .collect();
    if slopes.iter().all(|s| s.2 == slopes[0].2) {
        let slope = slopes[0].2.clone();
        let intercept = &values[0] - &slope * &pts[0];
        Ok(SlopeReport::Affine { slope, intercept })
    } else {
        Ok(SlopeReport::Piecewise(slopes))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValueRelation {
    Eq,
    Ge,
}

impl ValueRelation {
    fn lp(self) -> Relation {
        match self {
            ValueRelation::Eq => Relation::Eq,
            ValueRelation::Ge => Relation::Ge,
        }
    }
}

/// Single-round guessing problem: Eve holds a decomposition into
/// subnormalized no-signalling blocks `P̃_e`, one per guess `e` of Alice's
/// output on input `x_star`.
#[derive(Clone, Debug)]
pub struct GuessingProblem {
    pub scenario: Scenario,
    /// Linear functional per event `(a,b,x,y)` constrained to `w_star`.
    pub functional: Vec<Rational>,
    pub x_star: usize,
    pub y0: usize,
    pub w_star: Rational,
    pub relation: ValueRelation,
}

impl GuessingProblem {
    pub fn for_game(g: &Game, x_star: usize, w_star: Rational, relation: ValueRelation) -> Result<Self> {
        if g.parties() != 2 {
            return Err(Error::Invalid("single-round guessing needs a bipartite game".into()));
        }
        Ok(Self { scenario: g.scenario().clone(), functional: g.functional(), x_star, y0: 0, w_star, relation })
    }

    /// Constraint on the chained expression instead of the game value.
    pub fn chain_i3(w: Rational, relation: ValueRelation) -> Self {
        Self {
            scenario: Scenario::bipartite(3, 3, 2, 2),
            functional: chain_expression_functional(),
            x_star: 0,
            y0: 0,
            w_star: w,
            relation,
        }
    }

    pub fn with_reference(mut self, y0: usize) -> Self {
        self.y0 = y0;
        self
    }

    pub fn with_x_star(mut self, x_star: usize) -> Self {
        self.x_star = x_star;
        self
    }

    pub fn lp(&self) -> Result<LinProgram> {
        let sc = &self.scenario;
        if sc.parties() != 2 {
            return Err(Error::Invalid("single-round guessing needs a bipartite scenario".into()));
        }
        if self.functional.len() != sc.n_events() {
            return Err(Error::Shape("functional does not match the scenario".into()));
        }
        if self.x_star >= sc.inputs[0] || self.y0 >= sc.inputs[1] {
            return Err(Error::Invalid(format!("x* = {} or y0 = {} out of range", self.x_star, self.y0)));
        }
        let ne = sc.n_events();
        let na = sc.outputs[0];
        let mut lp = LinProgram::new(na * ne, Sense::Max);
        let mut obj = Vec::new();
        for e in 0..na {
            for b in 0..sc.outputs[1] {
                obj.push((e * ne + sc.event_of(&[e, b], &[self.x_star, self.y0]), one()));
            }
        }
        lp.set_objective(obj)?;
        let norm = lp.group("N");
        for i in 0..sc.n_in() {
            let row = (0..na).flat_map(|e| (0..sc.n_out()).map(move |o| (e * ne + sc.event(o, i), one()))).collect();
            lp.add_constraint_in(norm, row, Relation::Eq, one())?;
        }
        let ns = lp.group("ns");
        for e in 0..na {
            add_ns_rows(&mut lp, ns, sc, e * ne)?;
        }
        let val = lp.group("value");
        let row = (0..na)
            .flat_map(|e| {
                self.functional
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(move |(ev, c)| (e * ne + ev, c.clone()))
            })
            .collect();
        lp.add_constraint_in(val, row, self.relation.lp(), self.w_star.clone())?;
        Ok(lp)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve_certified(&self.lp()?)
    }
}

/// Guessing probability of Alice's output on `x_star` given the game value
/// constraint `ω = w_star` (or `≥`). `None` if the constraint is infeasible.
pub fn single_round_guessing(g: &Game, x_star: usize, w_star: Rational, relation: ValueRelation) -> Result<Option<Rational>> {
    let sol = GuessingProblem::for_game(g, x_star, w_star, relation)?.solve()?;
    match sol.status {
        Status::Optimal => Ok(Some(sol.value)),
        Status::Infeasible => Ok(None),
        Status::Unbounded => Err(Error::Solver("guessing LP unbounded".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsCurvePoint {
    #[serde(with = "crate::rational::serde_str")]
    pub w: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub pg: Rational,
}

/// LP guessing probability against the chained-expression value `w ∈ [4,6]`.
pub fn chain_ns_guessing_curve(samples: &[Rational]) -> Result<Vec<NsCurvePoint>> {
    let (lo, hi) = (int(4), int(6));
    if let Some(w) = samples.iter().find(|w| **w < lo || **w > hi) {
        return Err(Error::Invalid(format!("sample w = {w} outside [4, 6]")));
    }
    samples
        .par_iter()
        .map(|w| {
            let sol = GuessingProblem::chain_i3(w.clone(), ValueRelation::Eq).solve()?;
            if sol.status != Status::Optimal {
                return Err(Error::Solver(format!("chain guessing LP at w = {w}: {:?}", sol.status)));
            }
            Ok(NsCurvePoint { w: w.clone(), pg: sol.value })
        })
        .collect()
}

/// Closed form of the no-signalling chain line, `2 − w/4`.
pub fn chain_ns_line(w: &Rational) -> Rational {
    int(2) - w * rat(1, 4)
}

/// Convenience: `(8 + 10ε)/9` capped at 1.
pub fn chain_guessing_eps_formula(eps: &Rational) -> Rational {
    let v = (int(8) + int(10) * eps) / int(9);
    if v > Rational::one() {
        one()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_chain_game, make_chsh_game, make_guessing_game};

    #[test]
    fn family_labels() {
        let labels: Vec<String> = families(3).into_iter().map(|f| f.label).collect();
        assert_eq!(labels, ["be|x", "ae|y", "ab|z", "e|xy", "b|xz", "a|yz"]);
        let labels: Vec<String> = families(2).into_iter().map(|f| f.label).collect();
        assert_eq!(labels, ["b|x", "a|y"]);
    }

    #[test]
    fn eps_row_count() {
        let gg = make_guessing_game(&make_chain_game()).unwrap();
        let lp = eps_ns_lp(&gg, &rat(1, 20)).unwrap();
        let tau: usize = lp.groups().iter().filter(|g| g.starts_with("tau")).map(|g| lp.group_rows(g).len()).sum();
        assert_eq!(tau, 1944);
        assert_eq!(lp.group_rows("N").len(), 27);
    }

    #[test]
    fn chsh_and_chain_ns_values() {
        assert_eq!(ns_value(&make_chsh_game()).unwrap(), one());
        assert_eq!(ns_value(&make_chain_game()).unwrap(), one());
    }

    #[test]
    fn repeated_grid_point_is_rejected() {
        let g = make_chsh_game();
        assert!(alpha_slope(&g, &[rat(1, 10), rat(1, 10)]).is_err());
    }
}
