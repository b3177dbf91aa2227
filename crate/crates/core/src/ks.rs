//! No-signalling attacks on pseudotelepathy games built from weak
//! Kochen–Specker sets.
//!
//! Pipeline: parse a [`KsSet`], build its orthogonality graph, search for
//! `{0, ½, 1}` assignments with value 1 on each outcome of a chosen basis,
//! turn each assignment into a perfectly winning bipartite behavior, and
//! combine them into a tripartite behavior in which Eve guesses Alice's
//! output on the chosen basis with certainty.
//!
//! Outputs are positions within a basis, so relabeling vectors does not
//! change any behavior.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{Behavior, Game, Scenario};
use crate::lp::{solve_exact, LinProgram, Relation, Sense, Status};
use crate::ns::families;
use crate::rational::{self, one, parse_rational, rat, zero, Rational};

/// Default orthogonality tolerance on `|⟨u|w⟩|`.
pub const DEFAULT_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-9;

type CRational = Complex<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub struct KsSet {
    pub name: Option<String>,
    pub dim: usize,
    pub vectors: Vec<Vec<CRational>>,
    pub bases: Vec<Vec<usize>>,
    pub alice_bases: Vec<usize>,
    pub bob_bases: Vec<usize>,
}

#[derive(Deserialize, Serialize)]
struct KsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dim: usize,
    vectors: Vec<Vec<[Value; 2]>>,
    bases: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alice_bases: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bob_bases: Option<Vec<usize>>,
}

fn component(v: &Value, at: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| Error::Parse(format!("{at}: {e}"))),
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| Error::Parse(format!("{at}: {e}"))),
        _ => Err(Error::Parse(format!("{at}: expected a number or numeric string"))),
    }
}

fn to_c64(z: &CRational) -> Complex<f64> {
    Complex::new(rational::to_f64(&z.re), rational::to_f64(&z.im))
}

/// `⟨u|w⟩ = Σ conj(u_i) w_i`.
fn inner(u: &[CRational], w: &[CRational]) -> CRational {
    u.iter().zip(w).fold(Complex::new(zero(), zero()), |acc, (a, b)| acc + a.conj() * b)
}

impl KsSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let j: KsJson = serde_json::from_str(text)?;
        let vectors = j
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.iter()
                    .enumerate()
                    .map(|(k, [re, im])| {
                        let at = format!("vector {i}, component {k}");
                        Ok(Complex::new(component(re, &at)?, component(im, &at)?))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let all: Vec<usize> = (0..j.bases.len()).collect();
        let ks = KsSet {
            name: j.name,
            dim: j.dim,
            vectors,
            bases: j.bases,
            alice_bases: j.alice_bases.unwrap_or_else(|| all.clone()),
            bob_bases: j.bob_bases.unwrap_or(all),
        };
        ks.validate()?;
        Ok(ks)
    }

    pub fn to_json(&self) -> String {
        let j = KsJson {
            name: self.name.clone(),
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|z| [Value::String(z.re.to_string()), Value::String(z.im.to_string())]).collect())
                .collect(),
            bases: self.bases.clone(),
            alice_bases: Some(self.alice_bases.clone()),
            bob_bases: Some(self.bob_bases.clone()),
        };
        serde_json::to_string_pretty(&j).expect("KS set serializes")
    }

    /// Shape checks and unit norms. Orthogonality within bases is checked by
    /// [`build_orth_graph`].
    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::Invalid(format!("dimension {} is below 3", self.dim)));
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(Error::Invalid(format!("vector {i} has {} components, expected {}", v.len(), self.dim)));
            }
            let norm: f64 = v.iter().map(|z| to_c64(z).norm_sqr()).sum();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Invalid(format!("vector {i} is not a unit vector (squared norm {norm})")));
            }
        }
        let mut used = vec![false; self.vectors.len()];
        for (b, basis) in self.bases.iter().enumerate() {
            if basis.len() != self.dim {
                return Err(Error::Invalid(format!("basis {b} has {} vectors, expected {}", basis.len(), self.dim)));
            }
            for &i in basis {
                if i >= self.vectors.len() {
                    return Err(Error::Invalid(format!("basis {b} references missing vector {i}")));
                }
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Invalid(format!("vector {i} is in no basis")));
        }
        for (side, list) in [("alice_bases", &self.alice_bases), ("bob_bases", &self.bob_bases)] {
            if list.is_empty() || list.iter().any(|&b| b >= self.bases.len()) {
                return Err(Error::Invalid(format!("{side} must list existing bases")));
            }
        }
        Ok(())
    }

    /// Same set with vector `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vectors.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Invalid("relabeling is not a permutation".into()));
        }
        let mut vectors = vec![Vec::new(); n];
        for (i, v) in self.vectors.iter().enumerate() {
            vectors[perm[i]] = v.clone();
        }
        Ok(KsSet {
            vectors,
            bases: self.bases.iter().map(|b| b.iter().map(|&i| perm[i]).collect()).collect(),
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthGraph {
    pub n: usize,
    adj: Vec<Vec<bool>>,
    pub cliques: Vec<Vec<usize>>,
}

impl OrthGraph {
    /// Graph from combinatorial data; every clique must be present.
    pub fn from_parts(n: usize, edges: &[(usize, usize)], cliques: Vec<Vec<usize>>) -> Result<Self> {
        let mut adj = vec![vec![false; n]; n];
        for &(u, w) in edges {
            if u >= n || w >= n || u == w {
                return Err(Error::Invalid(format!("bad edge ({u}, {w})")));
            }
            adj[u][w] = true;
            adj[w][u] = true;
        }
        let g = OrthGraph { n, adj, cliques };
        g.check_cliques()?;
        Ok(g)
    }

    fn check_cliques(&self) -> Result<()> {
        for (b, c) in self.cliques.iter().enumerate() {
            for (k, &u) in c.iter().enumerate() {
                for &w in &c[k + 1..] {
                    if !self.adj[u][w] {
                        return Err(Error::Invalid(format!("basis {b} is not a clique: vectors {u} and {w} are not orthogonal")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_edge(&self, u: usize, w: usize) -> bool {
        self.adj[u][w]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|u| (u + 1..self.n).filter(move |&w| self.adj[u][w]).map(move |w| (u, w))).collect()
    }
}

/// Orthogonality graph at tolerance `tol` on `|⟨u|w⟩|`; `tol = 0` decides
/// orthogonality in exact arithmetic.
pub fn build_orth_graph(ks: &KsSet, tol: f64) -> Result<OrthGraph> {
    if !(tol >= 0.0) {
        return Err(Error::Invalid(format!("tolerance must be nonnegative, got {tol}")));
    }
    let n = ks.vectors.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            let ip = inner(&ks.vectors[u], &ks.vectors[w]);
            let orth = if tol == 0.0 { ip.is_zero() } else { to_c64(&ip).norm() <= tol };
            if orth {
                edges.push((u, w));
            }
        }
    }
    OrthGraph::from_parts(n, &edges, ks.bases.clone())
}

/// Values in `{0, ½, 1}` stored doubled as `0, 1, 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub doubled: Vec<u8>,
}

impl Assignment {
    pub fn value(&self, v: usize) -> Rational {
        rat(self.doubled[v] as i64, 2)
    }

    /// Independent re-check of the clique and edge conditions.
    pub fn validate(&self, g: &OrthGraph) -> std::result::Result<(), String> {
        if self.doubled.len() != g.n || self.doubled.iter().any(|&v| v > 2) {
            return Err("assignment has the wrong length or a value outside {0, 1/2, 1}".into());
        }
        for (b, c) in g.cliques.iter().enumerate() {
            let s: u32 = c.iter().map(|&v| self.doubled[v] as u32).sum();
            if s != 2 {
                return Err(format!("basis {b} sums to {}/2", s));
            }
        }
        for (u, w) in g.edges() {
            if self.doubled[u] + self.doubled[w] > 2 {
                return Err(format!("edge ({u}, {w}) sums above 1"));
            }
        }
        Ok(())
    }
}

/// Exhaustive depth-first search for an assignment with value 1 on `target`.
/// Vertices are visited in basis-major order of first appearance; values are
/// tried in the order 0, 1, ½, and a vertex that completes a basis gets the
/// forced value. `None` means no assignment exists.
pub fn find_assignment(g: &OrthGraph, target: usize) -> Result<Option<Assignment>> {
    find_assignment_where(g, target, |_| true)
}

/// As [`find_assignment`], but keeps searching until `accept` holds for a
/// complete assignment.
pub fn find_assignment_where(g: &OrthGraph, target: usize, mut accept: impl FnMut(&Assignment) -> bool) -> Result<Option<Assignment>> {
    if target >= g.n {
        return Err(Error::Invalid(format!("target {target} is not a vertex")));
    }
    let mut order = Vec::with_capacity(g.n);
    let mut placed = vec![false; g.n];
    for v in g.cliques.iter().flatten().copied().chain(0..g.n) {
        if !std::mem::replace(&mut placed[v], true) {
            order.push(v);
        }
    }
    let mut cliques_of = vec![Vec::new(); g.n];
    for (b, c) in g.cliques.iter().enumerate() {
        for &v in c {
            cliques_of[v].push(b);
        }
    }
    let neighbours: Vec<Vec<usize>> = (0..g.n).map(|u| (0..g.n).filter(|&w| g.adj[u][w]).collect()).collect();
    let mut val: Vec<Option<u8>> = vec![None; g.n];
    val[target] = Some(2);
    if !consistent(target, &val, g, &cliques_of, &neighbours) {
        return Ok(None);
    }
    let order: Vec<usize> = order.into_iter().filter(|&v| v != target).collect();
    let mut found = None;
    let mut leaf = |val: &[Option<u8>]| {
        let a = Assignment { doubled: val.iter().map(|v| v.expect("all assigned")).collect() };
        debug_assert!(a.validate(g).is_ok());
        if accept(&a) {
            found = Some(a);
            true
        } else {
            false
        }
    };
    let mut search = Search { order: &order, g, cliques_of: &cliques_of, nb: &neighbours, leaf: &mut leaf };
    search.dfs(0, &mut val);
    Ok(found)
}

struct Search<'a, F> {
    order: &'a [usize],
    g: &'a OrthGraph,
    cliques_of: &'a [Vec<usize>],
    nb: &'a [Vec<usize>],
    leaf: &'a mut F,
}

impl<F: FnMut(&[Option<u8>]) -> bool> Search<'_, F> {
    fn dfs(&mut self, k: usize, val: &mut [Option<u8>]) -> bool {
        let Some(&v) = self.order.get(k) else { return (self.leaf)(val) };
        let g = self.g;
        let forced = self.cliques_of[v].iter().find_map(|&b| {
            let c = &g.cliques[b];
            let others_done = c.iter().all(|&u| u == v || val[u].is_some());
            others_done.then(|| 2i16 - c.iter().filter(|&&u| u != v).map(|&u| val[u].unwrap() as i16).sum::<i16>())
        });
        let candidates: &[u8] = match forced {
            Some(0) => &[0],
            Some(1) => &[1],
            Some(2) => &[2],
            Some(_) => return false,
            None => &[0, 2, 1],
        };
        for &x in candidates {
            val[v] = Some(x);
            if consistent(v, val, g, self.cliques_of, self.nb) && self.dfs(k + 1, val) {
                return true;
            }
        }
        val[v] = None;
        false
    }
}

fn consistent(v: usize, val: &[Option<u8>], g: &OrthGraph, cliques_of: &[Vec<usize>], nb: &[Vec<usize>]) -> bool {
    let x = val[v].expect("assigned");
    if nb[v].iter().any(|&w| val[w].is_some_and(|y| x + y > 2)) {
        return false;
    }
    cliques_of[v].iter().all(|&b| {
        let c = &g.cliques[b];
        let s: u8 = c.iter().filter_map(|&u| val[u]).sum();
        let open = c.iter().any(|&u| val[u].is_none());
        if open {
            s <= 2
        } else {
            s == 2
        }
    })
}

/// Pseudotelepathy game of the set: Alice gets a basis from `alice`, Bob from
/// `bob`, each answers a position in their basis, and they lose exactly when
/// the named vectors are orthogonal. Uniform input distribution.
pub fn ks_game_for(ks: &KsSet, g: &OrthGraph, alice: &[usize], bob: &[usize]) -> Result<Game> {
    let d = ks.dim;
    let sc = Scenario::bipartite(alice.len(), bob.len(), d, d);
    let pi = vec![rat(1, (alice.len() * bob.len()) as i64); sc.n_in()];
    let mut v = vec![0u8; sc.n_events()];
    for (x, &bx) in alice.iter().enumerate() {
        for (y, &by) in bob.iter().enumerate() {
            for u in 0..d {
                for w in 0..d {
                    let (vu, vw) = (ks.bases[bx][u], ks.bases[by][w]);
                    v[sc.event_of(&[u, w], &[x, y])] = u8::from(!g.is_edge(vu, vw));
                }
            }
        }
    }
    Game::new(sc, pi, v)
}

/// Augmented game: both players may be asked any basis of the set.
pub fn ks_game(ks: &KsSet, g: &OrthGraph) -> Result<Game> {
    let all: Vec<usize> = (0..ks.bases.len()).collect();
    ks_game_for(ks, g, &all, &all)
}

/// Restriction to the set's own Alice/Bob split.
pub fn ks_game_projected(ks: &KsSet, g: &OrthGraph) -> Result<Game> {
    ks_game_for(ks, g, &ks.alice_bases, &ks.bob_bases)
}

/// Bipartite behavior over all bases read literally from the conditional
/// rule: `P(u, w | x, y) = f(w) · [⟨u|w⟩ ≠ 0]`. Not normalized in general;
/// see [`verify_behavior`].
pub fn bipartite_from_assignment(ks: &KsSet, g: &OrthGraph, f: &Assignment) -> Result<Behavior> {
    let d = ks.dim;
    let nb = ks.bases.len();
    let sc = Scenario::bipartite(nb, nb, d, d);
    let mut table = vec![zero(); sc.n_events()];
    for x in 0..nb {
        for y in 0..nb {
            for u in 0..d {
                for w in 0..d {
                    let (vu, vw) = (ks.bases[x][u], ks.bases[y][w]);
                    if !g.is_edge(vu, vw) {
                        table[sc.event_of(&[u, w], &[x, y])] = f.value(vw);
                    }
                }
            }
        }
    }
    Behavior::from_table_unchecked(sc, table, false)
}

/// Bipartite behavior with marginals `f` on both sides, supported on
/// non-orthogonal pairs: for every pair of bases an exact transport plan
/// between `f|x` and `f|y` that avoids orthogonal pairs.
pub fn bipartite_coupling(ks: &KsSet, g: &OrthGraph, f: &Assignment) -> Result<Behavior> {
    let d = ks.dim;
    let nb = ks.bases.len();
    let sc = Scenario::bipartite(nb, nb, d, d);
    let mut table = vec![zero(); sc.n_events()];
    for x in 0..nb {
        for y in 0..nb {
            let plan = coupling(ks, g, f, x, y)?
                .ok_or_else(|| Error::Infeasible(format!("no coupling of bases {x} and {y} avoids orthogonal pairs")))?;
            for u in 0..d {
                for w in 0..d {
                    table[sc.event_of(&[u, w], &[x, y])] = plan[u * d + w].clone();
                }
            }
        }
    }
    Behavior::new(sc, table, false)
}

/// Whether every pair of bases admits a coupling of `f` that avoids
/// orthogonal pairs. Edge conditions alone do not guarantee this.
pub fn admits_coupling(ks: &KsSet, g: &OrthGraph, f: &Assignment) -> Result<bool> {
    for x in 0..ks.bases.len() {
        for y in x + 1..ks.bases.len() {
            if coupling(ks, g, f, x, y)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn coupling(ks: &KsSet, g: &OrthGraph, f: &Assignment, x: usize, y: usize) -> Result<Option<Vec<Rational>>> {
    let d = ks.dim;
    let (bx, by) = (&ks.bases[x], &ks.bases[y]);
    let mut lp = LinProgram::new(d * d, Sense::Max);
    // Prefer mass on identical vectors.
    lp.set_objective((0..d).flat_map(|u| (0..d).filter(move |&w| bx[u] == by[w]).map(move |w| (u * d + w, one()))).collect())?;
    for u in 0..d {
        lp.add_constraint((0..d).map(|w| (u * d + w, one())).collect(), Relation::Eq, f.value(bx[u]))?;
    }
    for w in 0..d {
        lp.add_constraint((0..d).map(|u| (u * d + w, one())).collect(), Relation::Eq, f.value(by[w]))?;
    }
    for u in 0..d {
        for w in 0..d {
            if g.is_edge(bx[u], by[w]) {
                lp.set_bounds(u * d + w, Some(zero()), Some(zero()))?;
            }
        }
    }
    let sol = solve_exact(&lp)?;
    Ok((sol.status == Status::Optimal).then_some(sol.primal))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Literal conditional rule; usually fails normalization.
    Verbatim,
    /// Exact transport plan with the same marginals and support.
    #[default]
    Coupling,
}

pub fn bipartite_behavior(ks: &KsSet, g: &OrthGraph, f: &Assignment, c: Construction) -> Result<Behavior> {
    match c {
        Construction::Verbatim => bipartite_from_assignment(ks, g, f),
        Construction::Coupling => bipartite_coupling(ks, g, f),
    }
}

#[derive(Clone, Debug)]
pub struct AttackBehavior {
    /// Tripartite behavior over `(u, w, e | x, y, z)` with `z` ranging over
    /// Alice's bases.
    pub behavior: Behavior,
    pub x_star: usize,
    /// `f_e` for each outcome `e` of basis `x_star`.
    pub assignments: Vec<Assignment>,
    /// The bipartite behaviors built from each `f_e`.
    pub blocks: Vec<Behavior>,
}

/// Tripartite attack for one target basis `x_star`: with `z = x_star`, Eve
/// outputs `e` uniformly and Alice–Bob play the behavior of `f_e`; with any
/// other `z`, Eve is uniform and independent of the Alice–Bob mixture.
pub fn tripartite_attack(ks: &KsSet, g: &OrthGraph, x_star: usize, assignments: &[Assignment], c: Construction) -> Result<AttackBehavior> {
    let d = ks.dim;
    let nb = ks.bases.len();
    if x_star >= nb {
        return Err(Error::Invalid(format!("basis {x_star} does not exist")));
    }
    if assignments.len() != d {
        return Err(Error::Invalid(format!("need {d} assignments, one per outcome, got {}", assignments.len())));
    }
    for (e, f) in assignments.iter().enumerate() {
        if f.doubled.get(ks.bases[x_star][e]) != Some(&2) {
            return Err(Error::Invalid(format!("assignment {e} is not 1 on outcome {e} of basis {x_star}")));
        }
    }
    let blocks = assignments.iter().map(|f| bipartite_behavior(ks, g, f, c)).collect::<Result<Vec<_>>>()?;
    let inv_d = rat(1, d as i64);
    let bsc = blocks[0].scenario().clone();
    let mut mix = vec![zero(); bsc.n_events()];
    for b in &blocks {
        for (m, p) in mix.iter_mut().zip(b.table()) {
            *m += p * &inv_d;
        }
    }
    let sc = Scenario::new(vec![nb, nb, nb], vec![d, d, d])?;
    let mut table = vec![zero(); sc.n_events()];
    for x in 0..nb {
        for y in 0..nb {
            for z in 0..nb {
                for u in 0..d {
                    for w in 0..d {
                        let ev = bsc.event_of(&[u, w], &[x, y]);
                        for e in 0..d {
                            let p = if z == x_star { blocks[e].table()[ev].clone() } else { mix[ev].clone() };
                            table[sc.event_of(&[u, w, e], &[x, y, z])] = p * &inv_d;
                        }
                    }
                }
            }
        }
    }
    let behavior = Behavior::from_table_unchecked(sc, table, false)?;
    Ok(AttackBehavior { behavior, x_star, assignments: assignments.to_vec(), blocks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, failure: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: failure.is_none(),
            detail: failure.unwrap_or_default(),
        });
    }
}

/// Independent checks of a behavior: nonnegativity, normalization, every
/// no-signalling marginal equality, zero mass on the game's losing events
/// (on the first two parties), and, for a target basis, that the third party
/// reproduces the first party's output there.
pub fn verify_behavior(b: &Behavior, game: Option<&Game>, guess_basis: Option<usize>) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let t = b.table();
    rep.push(
        "nonnegative",
        t.iter().position(|p| p.is_negative()).map(|i| format!("event {i} has probability {}", t[i])),
    );
    let sums = b.input_sums();
    rep.push(
        "normalized",
        sums.iter().position(|s| !s.is_one()).map(|i| format!("input {i} sums to {}", sums[i])),
    );
    rep.push("no-signalling", ns_violation(b));
    if let Some(g) = game {
        rep.push("wins-game", losing_mass(b, g));
    }
    if let Some(xs) = guess_basis {
        rep.push("perfect-guess", guess_failure(b, xs));
    }
    rep
}

fn ns_violation(b: &Behavior) -> Option<String> {
    let sc = b.scenario();
    let parties = sc.parties();
    for fam in families(parties) {
        let kept_out = crate::index::Radix::new(fam.kept.iter().map(|&k| sc.outputs[k]).collect());
        let mut marg: BTreeMap<(Vec<usize>, Vec<usize>), Rational> = BTreeMap::new();
        for ins in sc.in_radix().iter() {
            let ki: Vec<usize> = fam.kept.iter().map(|&k| ins[k]).collect();
            for ko in kept_out.iter() {
                let m = b.marginal(&fam.kept, &ko, &ins);
                match marg.get(&(ko.clone(), ki.clone())) {
                    None => {
                        marg.insert((ko, ki.clone()), m);
                    }
                    Some(prev) if *prev == m => {}
                    Some(prev) => {
                        return Some(format!(
                            "marginal of parties {:?} at outputs {ko:?} changes with inputs {ins:?}: {prev} vs {m}",
                            fam.kept
                        ))
                    }
                }
            }
        }
    }
    None
}

fn losing_mass(b: &Behavior, g: &Game) -> Option<String> {
    let sc = b.scenario();
    let gs = g.scenario();
    if sc.inputs[..2] != gs.inputs[..] || sc.outputs[..2] != gs.outputs[..] {
        return Some(format!("game shape {gs:?} does not match behavior {sc:?}"));
    }
    for ins in sc.in_radix().iter() {
        for outs in sc.out_radix().iter() {
            let p = b.p_at(&outs, &ins);
            if !p.is_zero() && g.v_at(&outs[..2], &ins[..2]) == 0 {
                return Some(format!("mass {p} on losing event {outs:?} | {ins:?}"));
            }
        }
    }
    None
}

fn guess_failure(b: &Behavior, xs: usize) -> Option<String> {
    let sc = b.scenario();
    if sc.parties() != 3 {
        return Some("perfect-guess check needs a tripartite behavior".into());
    }
    if xs >= sc.inputs[0] || xs >= sc.inputs[2] {
        return Some(format!("basis {xs} out of range"));
    }
    for y in 0..sc.inputs[1] {
        let ins = [xs, y, xs];
        let mut hit = zero();
        for outs in sc.out_radix().iter() {
            if outs[0] == outs[2] {
                hit += b.p_at(&outs, &ins);
            }
        }
        if !hit.is_one() {
            return Some(format!("P(u = e | x = z = {xs}, y = {y}) = {hit}"));
        }
    }
    None
}

/// Affine dimension of a set of behaviors: rank of their differences with
/// the first one, in exact arithmetic.
pub fn attack_affine_dimension(attacks: &[Behavior]) -> Result<usize> {
    if attacks.len() < 2 {
        return Err(Error::Invalid("affine dimension needs at least two behaviors".into()));
    }
    let base = attacks[0].table();
    let rows: Vec<Vec<Rational>> = attacks[1..]
        .iter()
        .map(|b| {
            if b.table().len() != base.len() {
                return Err(Error::Shape("behaviors have different shapes".into()));
            }
            Ok(b.table().iter().zip(base).map(|(p, q)| p - q).collect())
        })
        .collect::<Result<_>>()?;
    Ok(rank(rows))
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        let prow = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pivot;
            for (a, b) in row.iter_mut().zip(&prow).skip(c) {
                *a -= &f * b;
            }
        }
        r += 1;
    }
    r
}

/// Everything the pipeline produces for one target basis.
#[derive(Clone, Debug)]
pub struct AttackReport {
    pub x_star: usize,
    pub graph_edges: usize,
    pub attack: AttackBehavior,
    pub block_reports: Vec<VerificationReport>,
    pub report: VerificationReport,
    pub affine_dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineError {
    /// No usable `{0, ½, 1}` assignment is 1 on these outcomes of `x_star`.
    NoAssignment { x_star: usize, outcomes: Vec<usize> },
}

/// Graph, assignments (searched concurrently per outcome), tripartite attack,
/// verification, and affine dimension for target basis `x_star`.
pub fn run_attack(ks: &KsSet, x_star: usize, tol: f64, c: Construction) -> Result<std::result::Result<AttackReport, PipelineError>> {
    let g = build_orth_graph(ks, tol)?;
    if x_star >= ks.bases.len() {
        return Err(Error::Invalid(format!("basis {x_star} does not exist")));
    }
    let found: Vec<Option<Assignment>> = ks.bases[x_star]
        .par_iter()
        .map(|&v| match c {
            Construction::Verbatim => find_assignment(&g, v),
            Construction::Coupling => {
                let mut err = None;
                let f = find_assignment_where(&g, v, |f| match admits_coupling(ks, &g, f) {
                    Ok(ok) => ok,
                    Err(e) => {
                        err.get_or_insert(e);
                        true
                    }
                })?;
                err.map_or(Ok(f), Err)
            }
        })
        .collect::<Result<_>>()?;
    let missing: Vec<usize> = found.iter().enumerate().filter(|(_, f)| f.is_none()).map(|(e, _)| e).collect();
    if !missing.is_empty() {
        return Ok(Err(PipelineError::NoAssignment { x_star, outcomes: missing }));
    }
    let assignments: Vec<Assignment> = found.into_iter().flatten().collect();
    for (e, f) in assignments.iter().enumerate() {
        if let Err(msg) = f.validate(&g) {
            return Err(Error::Verification(format!("assignment {e}: {msg}")));
        }
    }
    let game = ks_game(ks, &g)?;
    let attack = tripartite_attack(ks, &g, x_star, &assignments, c)?;
    let block_reports = attack.blocks.iter().map(|b| verify_behavior(b, Some(&game), None)).collect();
    let report = verify_behavior(&attack.behavior, Some(&game), Some(x_star));
    let affine_dimension = attack_affine_dimension(&attack.blocks)?;
    Ok(Ok(AttackReport { x_star, graph_edges: g.edges().len(), attack, block_reports, report, affine_dimension }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> KsSet {
        KsSet::from_json(include_str!("../../../data/ks/single_basis.json")).unwrap()
    }

    #[test]
    fn single_basis_is_a_triangle() {
        let g = build_orth_graph(&single(), DEFAULT_TOL).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(build_orth_graph(&single(), 0.0).unwrap(), g);
    }

    #[test]
    fn single_basis_assignment_is_forced() {
        let g = build_orth_graph(&single(), DEFAULT_TOL).unwrap();
        assert_eq!(find_assignment(&g, 0).unwrap().unwrap().doubled, vec![2, 0, 0]);
    }

    #[test]
    fn blocked_target_has_no_assignment() {
        // Target 0 is orthogonal to all of a second basis {3, 4, 5}.
        let edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (0, 4), (0, 5)];
        let g = OrthGraph::from_parts(6, &edges, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(find_assignment(&g, 0).unwrap(), None);
        assert!(find_assignment(&g, 1).unwrap().is_some());
    }

    #[test]
    fn non_unit_vector_is_named() {
        let text = r#"{"dim": 3, "vectors": [[["1","0"],["0","0"],["0","0"]], [["0","0"],["2","0"],["0","0"]], [["0","0"],["0","0"],["1","0"]]], "bases": [[0,1,2]]}"#;
        let err = KsSet::from_json(text).unwrap_err().to_string();
        assert!(err.contains("vector 1"), "{err}");
    }

    #[test]
    fn rank_of_small_difference_matrix() {
        let rows = vec![vec![rat(1, 1), zero(), zero()], vec![zero(), rat(1, 2), zero()], vec![rat(2, 1), rat(1, 1), zero()]];
        assert_eq!(rank(rows), 2);
    }
}
