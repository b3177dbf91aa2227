//! Multi-round guessing probabilities under time-ordered (TONS) and box
//! (ABNS) no-signalling constraints.
//!
//! Variables are `P̃_e(a, b | x, y)` for every guess string `e ∈ Aⁿ`, with all
//! strings round-major (round 0 is the most significant digit). Column
//! `e · |events| + event(a, b, x, y)`.
//!
//! Exact solves of instances with `n ≥ 2` go through an orbit reduction by
//! default: per-round relabelings that fix the marginal are collected, the
//! reduced program is solved, and the lifted primal/dual pair is re-verified
//! on the full program (with its row set closed under the relabelings). Any
//! failure along that path falls back to the unreduced program.

use itertools::Itertools;
use log::{debug, warn};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Behavior, Game, Scenario};
use crate::index::Radix;
use crate::lp::symmetry::{close_rows, reduce, Collapser, Orbits};
use crate::lp::{
    check_certificate, solve_exact, solve_float, LinProgram, Mode, Relation, RowSink, Sense, Status,
};
use crate::rational::{self, one, rat, zero, Rational};

pub const MAX_EXACT_ROUNDS: usize = 3;
pub const MAX_FLOAT_ROUNDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalKind {
    Tons,
    Abns,
}

impl CausalKind {
    pub fn name(self) -> &'static str {
        match self {
            CausalKind::Tons => "tons",
            CausalKind::Abns => "abns",
        }
    }
}

impl std::str::FromStr for CausalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tons" => Ok(CausalKind::Tons),
            "abns" => Ok(CausalKind::Abns),
            _ => Err(Error::Parse(format!("unknown causal scenario {s:?} (expected tons or abns)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalScenario {
    pub kind: CausalKind,
    pub n: usize,
    /// Single-round bipartite alphabets.
    pub base: Scenario,
}

impl CausalScenario {
    pub fn new(kind: CausalKind, n: usize, base: Scenario) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("number of rounds must be at least 1".into()));
        }
        if base.parties() != 2 {
            return Err(Error::Invalid("causal scenarios are bipartite".into()));
        }
        Ok(Self { kind, n, base })
    }

    pub fn chsh(kind: CausalKind, n: usize) -> Result<Self> {
        Self::new(kind, n, Scenario::bipartite(2, 2, 2, 2))
    }

    fn strings(&self, k: usize) -> Radix {
        Radix::uniform(k, self.n)
    }

    /// Number of LP columns, `|A|ⁿ · |A|ⁿ|B|ⁿ|X|ⁿ|Y|ⁿ`, or `None` on overflow.
    pub fn column_count(&self) -> Option<usize> {
        let b = &self.base;
        [b.outputs[0], b.outputs[0], b.outputs[1], b.inputs[0], b.inputs[1]]
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k.checked_pow(self.n as u32)?))
    }

    /// Column count, or a size report when `n` exceeds the round cap of
    /// `mode` (`None` means float).
    pub fn check_size(&self, mode: Option<Mode>) -> Result<usize> {
        let cols = self
            .column_count()
            .ok_or_else(|| Error::TooLarge(format!("n = {} rounds overflows the column count", self.n)))?;
        let cap = match mode {
            Some(Mode::Exact) => MAX_EXACT_ROUNDS,
            Some(Mode::Float(_)) | None => MAX_FLOAT_ROUNDS,
        };
        if self.n > cap {
            let kind = if matches!(mode, Some(Mode::Exact)) { "exact" } else { "float" };
            let guesses = self.base.outputs[0].pow(self.n as u32);
            return Err(Error::TooLarge(format!(
                "n = {} rounds needs {cols} columns ({guesses} guess blocks of {} events); {kind} mode is capped at n = {cap}",
                self.n,
                cols / guesses
            )));
        }
        Ok(cols)
    }

    /// The `n`-round scenario seen as one bipartite box.
    pub fn block(&self) -> Result<Scenario> {
        let pow = |k: usize| k.checked_pow(self.n as u32).ok_or_else(|| Error::TooLarge("alphabet overflow".into()));
        Scenario::new(
            vec![pow(self.base.inputs[0])?, pow(self.base.inputs[1])?],
            vec![pow(self.base.outputs[0])?, pow(self.base.outputs[1])?],
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Each level compares one next-round input change against the all-zero
    /// suffix; later levels supply the rest. Same polytope, fewer rows.
    #[default]
    Chained,
    /// Every nonzero suffix against the all-zero suffix.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Bob's future inputs do not influence Alice's outputs or Bob's past.
    Bob,
    /// Alice's future inputs do not influence Bob's outputs or Alice's past.
    Alice,
}

/// Homogeneous equality `Σ plus − Σ minus = 0` over the event indices of one
/// block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalRow {
    pub level: usize,
    pub direction: Direction,
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

/// Causal equalities on one `n`-round block. ABNS has only the full-block
/// level and always lists every suffix.
pub fn build_causal_constraints(s: &CausalScenario, enc: Encoding) -> Result<Vec<CausalRow>> {
    let block = s.block()?;
    let n = s.n;
    let levels: Vec<usize> = match s.kind {
        CausalKind::Tons => (0..n).collect(),
        CausalKind::Abns => vec![0],
    };
    let chained = s.kind == CausalKind::Tons && enc == Encoding::Chained;
    let mut rows = Vec::new();
    for dir in [Direction::Bob, Direction::Alice] {
        // `p` is the party whose future inputs are varied, `q` the other one.
        let (p, q) = match dir {
            Direction::Bob => (1, 0),
            Direction::Alice => (0, 1),
        };
        let (po, pi) = (s.base.outputs[p], s.base.inputs[p]);
        let (q_out, q_in) = (s.strings(s.base.outputs[q]), s.strings(s.base.inputs[q]));
        let (p_out, p_in) = (s.strings(po), s.strings(pi));
        let event = |qo: usize, qi: usize, pov: &[usize], piv: &[usize]| {
            let (o, i) = (p_out.encode(pov), p_in.encode(piv));
            let (outs, ins) = if p == 1 { ([qo, o], [qi, i]) } else { ([o, qo], [i, qi]) };
            block.event_of(&outs, &ins)
        };
        for &i in &levels {
            let suffix_len = n - i;
            let alts: Vec<Vec<usize>> = if chained {
                (1..pi)
                    .map(|t| {
                        let mut v = vec![0; suffix_len];
                        v[0] = t;
                        v
                    })
                    .collect()
            } else {
                Radix::uniform(pi, suffix_len).iter().filter(|v| v.iter().any(|&d| d != 0)).collect()
            };
            let reference = vec![0; suffix_len];
            let out_prefixes: Vec<Vec<usize>> = Radix::uniform(po, i).iter().collect();
            let in_prefixes: Vec<Vec<usize>> = Radix::uniform(pi, i).iter().collect();
            let out_suffixes: Vec<Vec<usize>> = Radix::uniform(po, suffix_len).iter().collect();
            for qo in 0..q_out.total() {
                for qi in 0..q_in.total() {
                    for op in &out_prefixes {
                        for ip in &in_prefixes {
                            let sum_over = |suffix: &[usize]| -> Vec<usize> {
                                let piv: Vec<usize> = ip.iter().chain(suffix).copied().collect();
                                out_suffixes
                                    .iter()
                                    .map(|os| {
                                        let pov: Vec<usize> = op.iter().chain(os).copied().collect();
                                        event(qo, qi, &pov, &piv)
                                    })
                                    .collect()
                            };
                            let minus = sum_over(&reference);
                            for alt in &alts {
                                rows.push(CausalRow { level: i, direction: dir, plus: sum_over(alt), minus: minus.clone() });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// What ties Eve's blocks to the observed statistics.
#[derive(Clone, Debug)]
pub enum RoundConstraint {
    /// `Σ_e P̃_e` equals the given `n`-round behavior.
    FixedMarginal(Behavior),
    /// Experimental: for every round `i` and every history of earlier inputs
    /// (later inputs set to 0), the round-`i` game value of `Σ_e P̃_e`
    /// conditioned on that history equals `w_star`.
    PerRoundValue { game: Game, w_star: Rational },
}

#[derive(Clone, Debug)]
pub struct TonsProblem {
    pub scenario: CausalScenario,
    pub constraint: RoundConstraint,
    pub x_star: Vec<usize>,
    pub y0: Vec<usize>,
    pub encoding: Encoding,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Objective {
    Reference,
    /// Average over every Bob input string. Equal to the reference objective
    /// on the feasible set, since Alice's marginal cannot depend on `y`.
    Averaged,
}

impl TonsProblem {
    pub fn fixed_marginal(scenario: CausalScenario, marginal: Behavior, x_star: Vec<usize>) -> Result<Self> {
        let block = scenario.block()?;
        if marginal.scenario() != &block {
            return Err(Error::Shape(format!(
                "marginal has shape {:?}, expected {:?} for {} rounds",
                marginal.scenario(),
                block,
                scenario.n
            )));
        }
        marginal.check_normalized()?;
        Self::with_constraint(scenario, RoundConstraint::FixedMarginal(marginal), x_star)
    }

    pub fn per_round_value(scenario: CausalScenario, game: Game, w_star: Rational, x_star: Vec<usize>) -> Result<Self> {
        if game.scenario() != &scenario.base {
            return Err(Error::Shape("game does not match the single-round scenario".into()));
        }
        Self::with_constraint(scenario, RoundConstraint::PerRoundValue { game, w_star }, x_star)
    }

    fn with_constraint(scenario: CausalScenario, constraint: RoundConstraint, x_star: Vec<usize>) -> Result<Self> {
        if x_star.len() != scenario.n || x_star.iter().any(|&x| x >= scenario.base.inputs[0]) {
            return Err(Error::Invalid(format!("x* = {x_star:?} is not an input string of length {}", scenario.n)));
        }
        let y0 = vec![0; scenario.n];
        Ok(Self { scenario, constraint, x_star, y0, encoding: Encoding::default() })
    }

    pub fn with_reference(mut self, y0: Vec<usize>) -> Result<Self> {
        if y0.len() != self.scenario.n || y0.iter().any(|&y| y >= self.scenario.base.inputs[1]) {
            return Err(Error::Invalid(format!("y0 = {y0:?} is not an input string of length {}", self.scenario.n)));
        }
        self.y0 = y0;
        Ok(self)
    }

    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    fn n_guesses(&self) -> usize {
        self.scenario.strings(self.scenario.base.outputs[0]).total()
    }

    fn objective(&self, which: Objective) -> Result<Vec<(usize, Rational)>> {
        let s = &self.scenario;
        let block = s.block()?;
        let ne = block.n_events();
        let x = s.strings(s.base.inputs[0]).encode(&self.x_star);
        let ys: Vec<usize> = match which {
            Objective::Reference => vec![s.strings(s.base.inputs[1]).encode(&self.y0)],
            Objective::Averaged => (0..block.inputs[1]).collect(),
        };
        let w = rat(1, ys.len() as i64);
        let mut obj = Vec::new();
        for e in 0..self.n_guesses() {
            for b in 0..block.outputs[1] {
                for &y in &ys {
                    obj.push((e * ne + block.event_of(&[e, b], &[x, y]), w.clone()));
                }
            }
        }
        Ok(obj)
    }

    fn emit(&self, sink: &mut dyn RowSink) -> Result<()> {
        let s = &self.scenario;
        let block = s.block()?;
        let ne = block.n_events();
        let ng = self.n_guesses();
        let causal = build_causal_constraints(s, self.encoding)?;
        for e in 0..ng {
            let off = e * ne;
            for row in &causal {
                let coeffs = row
                    .plus
                    .iter()
                    .map(|&j| (off + j, one()))
                    .chain(row.minus.iter().map(|&j| (off + j, -one())))
                    .collect();
                let group = match (s.kind, row.direction) {
                    (CausalKind::Tons, Direction::Bob) => "tons-bob",
                    (CausalKind::Tons, Direction::Alice) => "tons-alice",
                    (CausalKind::Abns, Direction::Bob) => "abns-bob",
                    (CausalKind::Abns, Direction::Alice) => "abns-alice",
                };
                sink.push_row(group, coeffs, Relation::Eq, zero())?;
            }
        }
        match &self.constraint {
            RoundConstraint::FixedMarginal(m) => {
                for ev in 0..ne {
                    let coeffs = (0..ng).map(|e| (e * ne + ev, one())).collect();
                    sink.push_row("marginal", coeffs, Relation::Eq, m.table()[ev].clone())?;
                }
            }
            RoundConstraint::PerRoundValue { game, w_star } => self.emit_round_values(sink, &block, game, w_star)?,
        }
        Ok(())
    }

    fn emit_round_values(&self, sink: &mut dyn RowSink, block: &Scenario, game: &Game, w_star: &Rational) -> Result<()> {
        let s = &self.scenario;
        let n = s.n;
        let ne = block.n_events();
        let ng = self.n_guesses();
        let (xs, ys) = (s.strings(s.base.inputs[0]), s.strings(s.base.inputs[1]));
        let (as_, bs) = (s.strings(s.base.outputs[0]), s.strings(s.base.outputs[1]));
        let all: Vec<usize> = (0..ng * ne).collect();
        let norm_cols: Vec<(usize, Rational)> = all
            .iter()
            .filter(|&&j| j % ne % block.n_in() == 0)
            .map(|&j| (j, one()))
            .collect();
        sink.push_row("normalization", norm_cols, Relation::Eq, one())?;
        let decode = |j: usize| {
            let ev = j % ne;
            let (o, i) = (ev / block.n_in(), ev % block.n_in());
            let outs = block.out_radix().decode(o);
            let ins = block.in_radix().decode(i);
            (as_.decode(outs[0]), bs.decode(outs[1]), xs.decode(ins[0]), ys.decode(ins[1]))
        };
        for i in 0..n {
            for hx in Radix::uniform(s.base.inputs[0], i).iter() {
                for hy in Radix::uniform(s.base.inputs[1], i).iter() {
                    let mut coeffs = Vec::new();
                    for &j in &all {
                        let (a, b, x, y) = decode(j);
                        if x[..i] != hx[..] || y[..i] != hy[..] {
                            continue;
                        }
                        let later_zero = x[i + 1..].iter().chain(&y[i + 1..]).all(|&d| d == 0);
                        if !later_zero {
                            continue;
                        }
                        let (xi, yi) = (x[i], y[i]);
                        let pi = game.pi(game.scenario().in_radix().encode(&[xi, yi]));
                        if game.v_at(&[a[i], b[i]], &[xi, yi]) == 1 && !pi.is_zero() {
                            coeffs.push((j, pi.clone()));
                        }
                        if xi == 0 && yi == 0 {
                            coeffs.push((j, -w_star.clone()));
                        }
                    }
                    sink.push_row("round-value", coeffs, Relation::Eq, zero())?;
                }
            }
        }
        Ok(())
    }

    fn build(&self, which: Objective) -> Result<LinProgram> {
        let cols = self.check_size(None)?;
        let mut lp = LinProgram::new(cols, Sense::Max);
        lp.set_objective(self.objective(which)?)?;
        self.emit(&mut lp)?;
        Ok(lp)
    }

    /// Full program with the objective at the reference input `y0`.
    pub fn lp(&self) -> Result<LinProgram> {
        self.build(Objective::Reference)
    }

    fn check_size(&self, mode: Option<Mode>) -> Result<usize> {
        self.scenario.check_size(mode)
    }

    /// Per-round relabelings (Bob input permutation, Alice output permutation
    /// per `x`, Bob output permutation per `y`, with Eve's guess following
    /// Alice at `x*`) that leave the fixed marginal invariant, as column
    /// permutations.
    pub fn symmetry_generators(&self) -> Result<Vec<Vec<usize>>> {
        let RoundConstraint::FixedMarginal(m) = &self.constraint else {
            return Ok(Vec::new());
        };
        let s = &self.scenario;
        let base = &s.base;
        let (na, nb, nx, ny) = (base.outputs[0], base.outputs[1], base.inputs[0], base.inputs[1]);
        let perms = |k: usize| (0..k).permutations(k).collect::<Vec<_>>();
        let candidates = perms(ny).len() * perms(na).len().pow(nx as u32) * perms(nb).len().pow(ny as u32);
        if candidates > 20_000 {
            warn!("{candidates} relabeling candidates per round; skipping symmetry reduction");
            return Ok(Vec::new());
        }
        let block = s.block()?;
        let (xs, ys) = (s.strings(nx), s.strings(ny));
        let (as_, bs) = (s.strings(na), s.strings(nb));
        let ne = block.n_events();
        let ng = self.n_guesses();
        let mut gens = Vec::new();
        for round in 0..s.n {
            let relabelings = perms(ny)
                .into_iter()
                .cartesian_product((0..nx).map(|_| perms(na)).multi_cartesian_product())
                .cartesian_product((0..ny).map(|_| perms(nb)).multi_cartesian_product());
            for ((sigma, pis), taus) in relabelings {
                let identity = sigma.iter().enumerate().all(|(i, &v)| i == v)
                    && pis.iter().chain(&taus).all(|p| p.iter().enumerate().all(|(i, &v)| i == v));
                if identity {
                    continue;
                }
                let map_event = |ev: usize| -> usize {
                    let (o, i) = (ev / block.n_in(), ev % block.n_in());
                    let outs = block.out_radix().decode(o);
                    let ins = block.in_radix().decode(i);
                    let (mut a, mut b) = (as_.decode(outs[0]), bs.decode(outs[1]));
                    let (x, mut y) = (xs.decode(ins[0]), ys.decode(ins[1]));
                    a[round] = pis[x[round]][a[round]];
                    b[round] = taus[y[round]][b[round]];
                    y[round] = sigma[y[round]];
                    block.event_of(&[as_.encode(&a), bs.encode(&b)], &[ins[0], ys.encode(&y)])
                };
                let event_map: Vec<usize> = (0..ne).map(map_event).collect();
                if (0..ne).any(|ev| m.table()[event_map[ev]] != m.table()[ev]) {
                    continue;
                }
                let pi_star = &pis[self.x_star[round]];
                let guess_map: Vec<usize> = (0..ng)
                    .map(|e| {
                        let mut d = as_.decode(e);
                        d[round] = pi_star[d[round]];
                        as_.encode(&d)
                    })
                    .collect();
                let g: Vec<usize> = (0..ng * ne).map(|j| guess_map[j / ne] * ne + event_map[j % ne]).collect();
                gens.push(g);
            }
        }
        Ok(gens)
    }

    /// Solves the problem. Exact mode certifies the reported value.
    pub fn solve(&self, opts: &SolveOptions) -> Result<TonsResult> {
        let columns = self.check_size(Some(opts.mode))?;
        if opts.symmetry && matches!(self.constraint, RoundConstraint::FixedMarginal(_)) {
            let gens = self.symmetry_generators()?;
            if !gens.is_empty() {
                let attempt = match opts.mode {
                    Mode::Exact => self.solve_reduced_exact(&gens, columns),
                    Mode::Float(tol) => self.solve_reduced_float(&gens, columns, tol),
                };
                match attempt {
                    Ok(r) => return Ok(r),
                    Err(e) => warn!("symmetry-reduced solve failed ({e}); solving the full program"),
                }
            }
        }
        self.solve_full(opts.mode, columns)
    }

    fn solve_full(&self, mode: Mode, columns: usize) -> Result<TonsResult> {
        let lp = self.lp()?;
        let rows = lp.constraints().len();
        match mode {
            Mode::Exact => {
                let sol = solve_exact(&lp)?;
                let verified = sol.status == Status::Optimal && {
                    let rep = check_certificate(&lp, &sol);
                    if !rep.ok {
                        return Err(Error::Verification(rep.reasons.join("; ")));
                    }
                    true
                };
                Ok(TonsResult::exact(sol.status, sol.value, verified, columns, columns, rows))
            }
            Mode::Float(tol) => {
                let sol = solve_float(&lp, tol)?;
                Ok(TonsResult::float(sol.status, sol.value, sol.within_tolerance(), columns, columns, rows))
            }
        }
    }

    fn solve_reduced_exact(&self, gens: &[Vec<usize>], columns: usize) -> Result<TonsResult> {
        let full = self.build(Objective::Averaged)?;
        let closed = close_rows(&full, gens)?;
        let orbits = Orbits::from_generators(columns, gens)?;
        let red = reduce(&closed, &orbits)?;
        debug!(
            "orbit reduction: {} -> {} columns, {} -> {} rows",
            columns,
            red.lp.num_vars(),
            closed.constraints().len(),
            red.lp.constraints().len()
        );
        let sol = solve_exact(&red.lp)?;
        if sol.status != Status::Optimal {
            return Ok(TonsResult::exact(sol.status, zero(), false, columns, red.lp.num_vars(), red.lp.constraints().len()));
        }
        let lifted = red.lift(&closed, &sol)?;
        let rep = check_certificate(&closed, &lifted);
        if !rep.ok {
            return Err(Error::Verification(rep.reasons.join("; ")));
        }
        let reference = self.lp()?.objective_value(&lifted.primal);
        if reference != lifted.value {
            return Err(Error::Verification(format!(
                "objective at y0 ({reference}) differs from the averaged objective ({})",
                lifted.value
            )));
        }
        Ok(TonsResult::exact(Status::Optimal, lifted.value, true, columns, red.lp.num_vars(), red.lp.constraints().len()))
    }

    fn solve_reduced_float(&self, gens: &[Vec<usize>], columns: usize, tol: f64) -> Result<TonsResult> {
        let orbits = Orbits::from_generators(columns, gens)?;
        let mut col = Collapser::new(&orbits, Sense::Max);
        col.set_objective(&self.objective(Objective::Averaged)?)?;
        self.emit(&mut col)?;
        let red = col.finish();
        let sol = solve_float(&red, tol)?;
        Ok(TonsResult::float(sol.status, sol.value, sol.within_tolerance(), columns, red.num_vars(), red.constraints().len()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub symmetry: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { mode: Mode::Exact, symmetry: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TonsResult {
    pub status: Status,
    /// Exact value; `None` in float mode or when not optimal.
    pub value: Option<Rational>,
    pub value_f64: f64,
    /// Exact certificate re-checked (exact mode) or float residuals within
    /// tolerance (float mode).
    pub verified: bool,
    pub columns: usize,
    pub solved_columns: usize,
    pub solved_rows: usize,
}

impl TonsResult {
    fn exact(status: Status, value: Rational, verified: bool, columns: usize, solved_columns: usize, solved_rows: usize) -> Self {
        let optimal = status == Status::Optimal;
        Self {
            status,
            value_f64: if optimal { rational::to_f64(&value) } else { f64::NAN },
            value: optimal.then_some(value),
            verified,
            columns,
            solved_columns,
            solved_rows,
        }
    }

    fn float(status: Status, value: f64, verified: bool, columns: usize, solved_columns: usize, solved_rows: usize) -> Self {
        let optimal = status == Status::Optimal;
        Self {
            status,
            value: None,
            value_f64: if optimal { value } else { f64::NAN },
            verified,
            columns,
            solved_columns,
            solved_rows,
        }
    }
}

/// Guessing probability of Alice's `n` outputs on `x_star`, with Eve's
/// blocks summing to `marginal`. `None` if `marginal` is not in the causal set.
pub fn tons_guessing_probability(
    g: &Game,
    marginal: &Behavior,
    x_star: &[usize],
    s: &CausalScenario,
) -> Result<Option<Rational>> {
    if g.scenario() != &s.base {
        return Err(Error::Shape("game does not match the single-round scenario".into()));
    }
    let r = TonsProblem::fixed_marginal(s.clone(), marginal.clone(), x_star.to_vec())?.solve(&SolveOptions::default())?;
    match r.status {
        Status::Optimal => Ok(r.value),
        Status::Infeasible => Ok(None),
        Status::Unbounded => Err(Error::Solver("guessing LP unbounded".into())),
    }
}

/// `(single-round value)ⁿ` with the single-round fixed-marginal program at
/// `x* = 0`.
pub fn iid_guessing_baseline(g: &Game, single_round_marginal: &Behavior, n: u32) -> Result<Rational> {
    let s = CausalScenario::new(CausalKind::Tons, 1, g.scenario().clone())?;
    let v = tons_guessing_probability(g, single_round_marginal, &[0], &s)?
        .ok_or_else(|| Error::Infeasible("single-round marginal is signalling".into()))?;
    Ok(num_traits::pow(v, n as usize))
}

/// Closed forms for CHSH with `∏ PR_v`: `1 − 3v/4` at two rounds and
/// `1 − 7v/8` at three (for `v ≥ √5 − 2`).
pub fn chsh_formula(n: usize, v: &Rational) -> Option<Rational> {
    match n {
        2 => Some(one() - v * rat(3, 4)),
        3 => Some(one() - v * rat(7, 8)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_pr_v, product_behavior, NoisyPRParams};

    fn pr(v: Rational, n: usize) -> Behavior {
        product_behavior(&make_pr_v(&NoisyPRParams::new(v).unwrap()), n).unwrap()
    }

    #[test]
    fn column_count_formula() {
        let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
        assert_eq!(s.column_count(), Some(4 * 4 * 4 * 4 * 4));
    }

    #[test]
    fn rows_touch_consistent_prefixes() {
        let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
        let rows = build_causal_constraints(&s, Encoding::Full).unwrap();
        assert!(rows.iter().all(|r| r.plus.len() == r.minus.len() && !r.plus.is_empty()));
    }

    #[test]
    fn exact_cap_reports_size() {
        let s = CausalScenario::chsh(CausalKind::Tons, 7).unwrap();
        let p = TonsProblem::fixed_marginal(s, pr(rat(1, 2), 1), vec![0; 7]);
        assert!(p.is_err());
        let s = CausalScenario::chsh(CausalKind::Tons, 4).unwrap();
        let p = TonsProblem::fixed_marginal(s, pr(rat(1, 2), 4), vec![0; 4]).unwrap();
        match p.solve(&SolveOptions::default()) {
            Err(Error::TooLarge(msg)) => assert!(msg.contains("capped at n = 3"), "{msg}"),
            other => panic!("expected a size error, got {other:?}"),
        }
    }

    #[test]
    fn reduction_agrees_with_full_program() {
        let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
        let p = TonsProblem::fixed_marginal(s, pr(rat(1, 2), 2), vec![0, 1]).unwrap();
        let full = p.solve(&SolveOptions { symmetry: false, ..Default::default() }).unwrap();
        let red = p.solve(&SolveOptions::default()).unwrap();
        assert_eq!(full.value, red.value);
        assert!(red.solved_columns < full.solved_columns);
    }
}
