//! Nonlocal games, behaviors, and the concrete games used throughout the crate.
//!
//! Events are flattened as `out_idx * n_inputs + in_idx`, where `out_idx` and
//! `in_idx` are party-major mixed-radix indices (see [`crate::index::Radix`]).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Radix;
use crate::rational::{self, int, one, parse_rational, rat, zero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Invalid("alphabet size must be at least 1".into()));
        }
        Ok(Self { size })
    }
}

fn alphabets(s: &[usize]) -> Result<Vec<Alphabet>> {
    s.iter().map(|&k| Alphabet::new(k)).collect()
}

/// Shape shared by games and behaviors: per-party input and output alphabets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Scenario {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        if inputs.len() != outputs.len() || !(2..=3).contains(&inputs.len()) {
            return Err(Error::Invalid(format!(
                "expected 2 or 3 parties with matching input/output lists, got {} and {}",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.iter().chain(&outputs).any(|&k| k == 0) {
            return Err(Error::Invalid("alphabet size must be at least 1".into()));
        }
        Ok(Self { inputs, outputs })
    }

    pub fn bipartite(x: usize, y: usize, a: usize, b: usize) -> Self {
        Self { inputs: vec![x, y], outputs: vec![a, b] }
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn in_radix(&self) -> Radix {
        Radix::new(self.inputs.clone())
    }

    pub fn out_radix(&self) -> Radix {
        Radix::new(self.outputs.clone())
    }

    pub fn n_in(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn n_out(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn n_events(&self) -> usize {
        self.n_in() * self.n_out()
    }

    pub fn event(&self, out_idx: usize, in_idx: usize) -> usize {
        out_idx * self.n_in() + in_idx
    }

    /// Event index from explicit output and input tuples.
    pub fn event_of(&self, outs: &[usize], ins: &[usize]) -> usize {
        self.event(self.out_radix().encode(outs), self.in_radix().encode(ins))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    scenario: Scenario,
    pi: Vec<Rational>,
    predicate: Vec<u8>,
}

impl Game {
    /// Validates that `pi` is a distribution and `predicate` is 0/1.
    pub fn new(scenario: Scenario, pi: Vec<Rational>, predicate: Vec<u8>) -> Result<Self> {
        if pi.len() != scenario.n_in() {
            return Err(Error::Shape(format!("pi has {} entries, expected {}", pi.len(), scenario.n_in())));
        }
        if predicate.len() != scenario.n_events() {
            return Err(Error::Shape(format!(
                "predicate has {} entries, expected {}",
                predicate.len(),
                scenario.n_events()
            )));
        }
        if pi.iter().any(|p| p.is_negative()) {
            return Err(Error::Invalid("negative input probability".into()));
        }
        let total: Rational = pi.iter().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("input distribution sums to {total}, not 1")));
        }
        if predicate.iter().any(|&v| v > 1) {
            return Err(Error::Invalid("predicate entries must be 0 or 1".into()));
        }
        Ok(Self { scenario, pi, predicate })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn parties(&self) -> usize {
        self.scenario.parties()
    }

    pub fn pi(&self, in_idx: usize) -> &Rational {
        &self.pi[in_idx]
    }

    pub fn pi_table(&self) -> &[Rational] {
        &self.pi
    }

    pub fn v(&self, out_idx: usize, in_idx: usize) -> u8 {
        self.predicate[self.scenario.event(out_idx, in_idx)]
    }

    pub fn v_at(&self, outs: &[usize], ins: &[usize]) -> u8 {
        self.predicate[self.scenario.event_of(outs, ins)]
    }

    pub fn predicate(&self) -> &[u8] {
        &self.predicate
    }

    pub fn pi_min(&self) -> Rational {
        self.pi.iter().min().cloned().unwrap_or_else(zero)
    }

    /// Coefficients `π(in)·V(out,in)` per event, i.e. the linear functional whose
    /// value on a behavior is [`bell_value`].
    pub fn functional(&self) -> Vec<Rational> {
        let n_in = self.scenario.n_in();
        (0..self.scenario.n_events())
            .map(|e| {
                if self.predicate[e] == 1 {
                    self.pi[e % n_in].clone()
                } else {
                    zero()
                }
            })
            .collect()
    }
}

/// `m`-input chain game with complete support: on `(x,x)` and `(x+1,x)` the
/// outputs must agree, on `(0,m-1)` they must differ, and every other input
/// pair always wins. π is uniform.
pub fn make_chain_game_m(m: usize) -> Result<Game> {
    if m < 2 {
        return Err(Error::Invalid("chain game needs at least 2 inputs".into()));
    }
    let sc = Scenario::bipartite(m, m, 2, 2);
    let pi = vec![rat(1, (m * m) as i64); m * m];
    let mut v = vec![0u8; sc.n_events()];
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..m {
                for y in 0..m {
                    let xor = a ^ b;
                    let win = if x == y || x == y + 1 {
                        xor == 0
                    } else if x == 0 && y == m - 1 {
                        xor == 1
                    } else {
                        true
                    };
                    v[sc.event_of(&[a, b], &[x, y])] = win as u8;
                }
            }
        }
    }
    Game::new(sc, pi, v)
}

pub fn make_chain_game() -> Game {
    make_chain_game_m(3).expect("m = 3 is valid")
}

pub fn make_chsh_game() -> Game {
    let sc = Scenario::bipartite(2, 2, 2, 2);
    let mut v = vec![0u8; 16];
    for (a, b, x, y) in quad(2) {
        v[sc.event_of(&[a, b], &[x, y])] = ((a ^ b) == (x & y)) as u8;
    }
    Game::new(sc, vec![rat(1, 4); 4], v).expect("valid")
}

fn quad(k: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..k).flat_map(move |a| {
        (0..k).flat_map(move |b| (0..k).flat_map(move |x| (0..k).map(move |y| (a, b, x, y))))
    })
}

/// Tripartite guessing game: Eve gets an input `z` over Alice's input alphabet
/// and must output Alice's answer whenever `z = x`.
pub fn make_guessing_game(g: &Game) -> Result<Game> {
    if g.parties() != 2 {
        return Err(Error::Invalid("guessing game needs a bipartite base game".into()));
    }
    let base = g.scenario();
    let (nx, ny) = (base.inputs[0], base.inputs[1]);
    let (na, nb) = (base.outputs[0], base.outputs[1]);
    let sc = Scenario::new(vec![nx, ny, nx], vec![na, nb, na])?;
    let zw = rat(1, nx as i64);
    let mut pi = vec![zero(); sc.n_in()];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nx {
                pi[sc.in_radix().encode(&[x, y, z])] = g.pi(base.in_radix().encode(&[x, y])) * &zw;
            }
        }
    }
    let mut v = vec![0u8; sc.n_events()];
    for out in sc.out_radix().iter() {
        for inp in sc.in_radix().iter() {
            let (a, b, e) = (out[0], out[1], out[2]);
            let (x, y, z) = (inp[0], inp[1], inp[2]);
            let w = z != x || e == a;
            v[sc.event_of(&out, &inp)] = g.v_at(&[a, b], &[x, y]) * (w as u8);
        }
    }
    Game::new(sc, pi, v)
}

const MAGIC_SQUARE_JSON: &str = include_str!("../../../data/games/magic_square.json");

/// Mermin–Peres magic square game, loaded from the bundled data file.
pub fn make_magic_square_game() -> Game {
    game_from_json(MAGIC_SQUARE_JSON).expect("bundled magic square file is valid")
}

/// Alice's even-parity rows and Bob's odd-parity columns, in output order.
pub const MAGIC_ROWS: [[u8; 3]; 4] = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]];
pub const MAGIC_COLS: [[u8; 3]; 4] = [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]];

/// Builds the magic square game directly from [`MAGIC_ROWS`]/[`MAGIC_COLS`];
/// used to generate and cross-check the data file.
pub fn build_magic_square_game() -> Game {
    let sc = Scenario::bipartite(3, 3, 4, 4);
    let mut v = vec![0u8; sc.n_events()];
    for a in 0..4 {
        for b in 0..4 {
            for x in 0..3 {
                for y in 0..3 {
                    v[sc.event_of(&[a, b], &[x, y])] = (MAGIC_ROWS[a][y] == MAGIC_COLS[b][x]) as u8;
                }
            }
        }
    }
    Game::new(sc, vec![rat(1, 9); 9], v).expect("valid")
}

/// Classical value by enumeration of deterministic strategies.
pub fn classical_value(g: &Game) -> Result<Rational> {
    if g.parties() != 2 {
        return Err(Error::Invalid("classical_value supports bipartite games".into()));
    }
    let sc = g.scenario();
    let (nx, ny, na, nb) = (sc.inputs[0], sc.inputs[1], sc.outputs[0], sc.outputs[1]);
    let count_a = (na as u64).checked_pow(nx as u32).filter(|&c| c <= 1 << 20);
    let Some(count_a) = count_a else {
        return Err(Error::TooLarge("too many deterministic strategies".into()));
    };
    let mut best = zero();
    let fa = Radix::uniform(na, nx);
    for sa in 0..count_a as usize {
        let alice = fa.decode(sa);
        // Bob's best response decomposes over y.
        let mut total = zero();
        for y in 0..ny {
            let mut best_b = zero();
            for b in 0..nb {
                let mut s = zero();
                for (x, &a) in alice.iter().enumerate() {
                    if g.v_at(&[a, b], &[x, y]) == 1 {
                        s += g.pi(sc.in_radix().encode(&[x, y]));
                    }
                }
                if s > best_b {
                    best_b = s;
                }
            }
            total += best_b;
        }
        if total > best {
            best = total;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoisyPRParams {
    v: Rational,
}

impl NoisyPRParams {
    pub fn new(v: Rational) -> Result<Self> {
        if v.is_negative() || v > one() {
            return Err(Error::Invalid(format!("v = {v} outside [0,1]")));
        }
        Ok(Self { v })
    }

    pub fn v(&self) -> &Rational {
        &self.v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<Rational>,
    subnormalized: bool,
}

impl Behavior {
    /// Checked constructor: entries nonnegative and every input sums to 1
    /// (or to a common constant when `subnormalized`).
    pub fn new(scenario: Scenario, table: Vec<Rational>, subnormalized: bool) -> Result<Self> {
        let b = Self::from_table_unchecked(scenario, table, subnormalized)?;
        b.check_normalized()?;
        Ok(b)
    }

    /// Shape-checked only; used for behaviors that are about to be verified.
    pub fn from_table_unchecked(scenario: Scenario, table: Vec<Rational>, subnormalized: bool) -> Result<Self> {
        if table.len() != scenario.n_events() {
            return Err(Error::Shape(format!(
                "behavior table has {} entries, expected {}",
                table.len(),
                scenario.n_events()
            )));
        }
        Ok(Self { scenario, table, subnormalized })
    }

    pub fn check_normalized(&self) -> Result<()> {
        if let Some(i) = self.table.iter().position(|p| p.is_negative()) {
            return Err(Error::Invalid(format!("negative probability at event {i}")));
        }
        let sums = self.input_sums();
        let target = if self.subnormalized { sums[0].clone() } else { one() };
        if let Some((i, s)) = sums.iter().enumerate().find(|(_, s)| **s != target) {
            return Err(Error::Invalid(format!("input {i} sums to {s}, expected {target}")));
        }
        Ok(())
    }

    pub fn input_sums(&self) -> Vec<Rational> {
        let n_in = self.scenario.n_in();
        let mut sums = vec![zero(); n_in];
        for (e, p) in self.table.iter().enumerate() {
            sums[e % n_in] += p;
        }
        sums
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn p(&self, out_idx: usize, in_idx: usize) -> &Rational {
        &self.table[self.scenario.event(out_idx, in_idx)]
    }

    pub fn p_at(&self, outs: &[usize], ins: &[usize]) -> &Rational {
        &self.table[self.scenario.event_of(outs, ins)]
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let p = rat(1, scenario.n_out() as i64);
        let table = vec![p; scenario.n_events()];
        Self { scenario, table, subnormalized: false }
    }

    /// Deterministic behavior: each party outputs `f_k(x_k)`.
    pub fn deterministic(scenario: Scenario, strategy: &[Vec<usize>]) -> Result<Self> {
        if strategy.len() != scenario.parties() {
            return Err(Error::Shape("one response function per party required".into()));
        }
        let mut table = vec![zero(); scenario.n_events()];
        for inp in scenario.in_radix().iter() {
            let outs: Vec<usize> = inp.iter().zip(strategy).map(|(&x, f)| f[x]).collect();
            table[scenario.event_of(&outs, &inp)] = one();
        }
        Self::new(scenario, table, false)
    }

    /// Reads `P(outs | ins)` summed over the outputs of parties not in `keep`.
    pub fn marginal(&self, keep: &[usize], outs: &[usize], ins: &[usize]) -> Rational {
        let orad = self.scenario.out_radix();
        let in_idx = self.scenario.in_radix().encode(ins);
        let mut s = zero();
        for (o, full) in orad.iter().enumerate() {
            if keep.iter().zip(outs).all(|(&k, &v)| full[k] == v) {
                s += self.p(o, in_idx);
            }
        }
        s
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.table.iter().map(rational::to_f64).collect()
    }
}

/// Noisy PR box: `(3+v)/8` on CHSH-winning events, `(1−v)/8` otherwise.
pub fn make_pr_v(p: &NoisyPRParams) -> Behavior {
    let sc = Scenario::bipartite(2, 2, 2, 2);
    let hi = (int(3) + p.v()) / int(8);
    let lo = (one() - p.v()) / int(8);
    let mut table = vec![zero(); 16];
    for (a, b, x, y) in quad(2) {
        table[sc.event_of(&[a, b], &[x, y])] = if (a ^ b) == (x & y) { hi.clone() } else { lo.clone() };
    }
    Behavior::new(sc, table, false).expect("PR_v is normalized")
}

/// `n`-fold product over rounds. Each party's alphabet becomes the `n`-th power
/// of its single-round alphabet, indexed round-major.
pub fn product_behavior(b: &Behavior, n: usize) -> Result<Behavior> {
    if n == 0 {
        return Err(Error::Invalid("product needs n >= 1".into()));
    }
    if b.subnormalized {
        return Err(Error::Invalid("product of a subnormalized behavior".into()));
    }
    let base = b.scenario();
    let pow = |k: usize| -> Result<usize> {
        k.checked_pow(n as u32).ok_or_else(|| Error::TooLarge("product alphabet overflow".into()))
    };
    let inputs = base.inputs.iter().map(|&k| pow(k)).collect::<Result<Vec<_>>>()?;
    let outputs = base.outputs.iter().map(|&k| pow(k)).collect::<Result<Vec<_>>>()?;
    let sc = Scenario::new(inputs, outputs)?;
    if sc.n_events() > 1 << 26 {
        return Err(Error::TooLarge(format!("{} events", sc.n_events())));
    }
    let in_str: Vec<Radix> = base.inputs.iter().map(|&k| Radix::uniform(k, n)).collect();
    let out_str: Vec<Radix> = base.outputs.iter().map(|&k| Radix::uniform(k, n)).collect();
    let mut table = Vec::with_capacity(sc.n_events());
    let (orad, irad) = (sc.out_radix(), sc.in_radix());
    let in_digits: Vec<Vec<Vec<usize>>> = irad
        .iter()
        .map(|ins| ins.iter().zip(&in_str).map(|(&s, r)| r.decode(s)).collect())
        .collect();
    for outs in orad.iter() {
        let od: Vec<Vec<usize>> = outs.iter().zip(&out_str).map(|(&s, r)| r.decode(s)).collect();
        for id in &in_digits {
            let mut p = one();
            for round in 0..n {
                let o: Vec<usize> = od.iter().map(|d| d[round]).collect();
                let i: Vec<usize> = id.iter().map(|d| d[round]).collect();
                p *= b.p_at(&o, &i);
                if p.is_zero() {
                    break;
                }
            }
            table.push(p);
        }
    }
    Behavior::new(sc, table, false)
}

/// Single-round behavior of round `round` of an `n`-round behavior: other
/// rounds' outputs are summed and their inputs fixed to 0.
pub fn round_marginal(b: &Behavior, base: &Scenario, n: usize, round: usize) -> Result<Behavior> {
    if round >= n {
        return Err(Error::Invalid(format!("round {round} out of 0..{n}")));
    }
    let sc = b.scenario();
    let in_str: Vec<Radix> = base.inputs.iter().map(|&k| Radix::uniform(k, n)).collect();
    let out_str: Vec<Radix> = base.outputs.iter().map(|&k| Radix::uniform(k, n)).collect();
    let mut table = vec![zero(); base.n_events()];
    for inp in base.in_radix().iter() {
        let full_in: Vec<usize> = inp
            .iter()
            .zip(&in_str)
            .map(|(&x, r)| {
                let mut d = vec![0; n];
                d[round] = x;
                r.encode(&d)
            })
            .collect();
        let in_idx = sc.in_radix().encode(&full_in);
        for (o, outs) in sc.out_radix().iter().enumerate() {
            let single: Vec<usize> = outs.iter().zip(&out_str).map(|(&s, r)| r.decode(s)[round]).collect();
            table[base.event_of(&single, &inp)] += b.p(o, in_idx);
        }
    }
    Behavior::from_table_unchecked(base.clone(), table, b.subnormalized)
}

/// `Σ π·V·P`.
pub fn bell_value(b: &Behavior, g: &Game) -> Result<Rational> {
    if b.scenario() != g.scenario() {
        return Err(Error::Shape(format!("behavior {:?} vs game {:?}", b.scenario(), g.scenario())));
    }
    let n_in = g.scenario().n_in();
    let mut s = zero();
    for (e, p) in b.table().iter().enumerate() {
        if g.predicate()[e] == 1 && !p.is_zero() {
            s += g.pi(e % n_in) * p;
        }
    }
    Ok(s)
}

/// Coefficients of the three-setting chained expression
/// `⟨A0B0⟩+⟨A1B0⟩+⟨A1B1⟩+⟨A2B1⟩+⟨A2B2⟩−⟨A0B2⟩` per event `(a,b,x,y)`.
pub fn chain_expression_functional() -> Vec<Rational> {
    let sc = Scenario::bipartite(3, 3, 2, 2);
    let sign = |x: usize, y: usize| -> i64 {
        match (x, y) {
            (0, 0) | (1, 0) | (1, 1) | (2, 1) | (2, 2) => 1,
            (0, 2) => -1,
            _ => 0,
        }
    };
    let mut f = vec![zero(); sc.n_events()];
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..3 {
                for y in 0..3 {
                    let parity = if (a ^ b) == 0 { 1 } else { -1 };
                    f[sc.event_of(&[a, b], &[x, y])] = int(parity * sign(x, y));
                }
            }
        }
    }
    f
}

pub fn chain_expression_value(b: &Behavior) -> Result<Rational> {
    let sc = Scenario::bipartite(3, 3, 2, 2);
    if *b.scenario() != sc {
        return Err(Error::Shape("chained expression needs a 3-input, 2-output bipartite behavior".into()));
    }
    Ok(chain_expression_functional().iter().zip(b.table()).map(|(c, p)| c * p).sum())
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct GameJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<String>,
    parties: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    pi: BTreeMap<String, String>,
    #[serde(rename = "V")]
    v: BTreeMap<String, u8>,
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    parties: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    subnormalized: bool,
    #[serde(rename = "P")]
    p: BTreeMap<String, String>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

fn split_key(key: &str, radix: &Radix, what: &str) -> Result<usize> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    if parts.len() != radix.len() {
        return Err(Error::Parse(format!("{what} key {key:?}: expected {} components", radix.len())));
    }
    let mut digits = Vec::with_capacity(parts.len());
    for (p, &s) in parts.iter().zip(radix.sizes()) {
        let d: usize = p.parse().map_err(|_| Error::Parse(format!("{what} key {key:?}: bad index {p:?}")))?;
        if d >= s {
            return Err(Error::Parse(format!("{what} key {key:?}: index {d} out of range 0..{s}")));
        }
        digits.push(d);
    }
    Ok(radix.encode(&digits))
}

fn scenario_from(parties: usize, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Scenario> {
    if inputs.len() != parties || outputs.len() != parties {
        return Err(Error::Parse(format!("\"parties\" is {parties} but alphabet lists have other lengths")));
    }
    alphabets(&inputs)?;
    alphabets(&outputs)?;
    Scenario::new(inputs, outputs)
}

pub fn game_from_json(text: &str) -> Result<Game> {
    let j: GameJson = serde_json::from_str(text)?;
    let sc = scenario_from(j.parties, j.inputs, j.outputs)?;
    let mut pi = vec![zero(); sc.n_in()];
    for (k, v) in &j.pi {
        let i = split_key(k, &sc.in_radix(), "pi")?;
        pi[i] = parse_rational(v).map_err(|e| Error::Parse(format!("pi[{k:?}]: {e}")))?;
    }
    let full = Radix::new(sc.outputs.iter().chain(&sc.inputs).copied().collect());
    let mut pred = vec![0u8; sc.n_events()];
    for (k, &v) in &j.v {
        let digits = full.decode(split_key(k, &full, "V")?);
        let (o, i) = digits.split_at(sc.parties());
        if v > 1 {
            return Err(Error::Parse(format!("V[{k:?}] = {v}, expected 0 or 1")));
        }
        pred[sc.event_of(o, i)] = v;
    }
    Game::new(sc, pi, pred)
}

pub fn game_to_json(g: &Game, name: Option<&str>, version: Option<&str>) -> String {
    let sc = g.scenario();
    let pi = sc.in_radix().iter().enumerate().map(|(i, d)| (join(&d), g.pi(i).to_string())).collect();
    let mut v = BTreeMap::new();
    for (o, od) in sc.out_radix().iter().enumerate() {
        for (i, id) in sc.in_radix().iter().enumerate() {
            let key = format!("{},{}", join(&od), join(&id));
            v.insert(key, g.v(o, i));
        }
    }
    let j = GameJson {
        name: name.map(str::to_owned),
        version: version.map(str::to_owned),
        parties: sc.parties(),
        inputs: sc.inputs.clone(),
        outputs: sc.outputs.clone(),
        pi,
        v,
    };
    serde_json::to_string_pretty(&j).expect("serializable")
}

pub fn behavior_from_json(text: &str) -> Result<Behavior> {
    let j: BehaviorJson = serde_json::from_str(text)?;
    let sc = scenario_from(j.parties, j.inputs, j.outputs)?;
    let mut table = vec![zero(); sc.n_events()];
    for (k, v) in &j.p {
        let (o, i) = k
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("P key {k:?}: expected \"outs|ins\"")))?;
        let o = split_key(o, &sc.out_radix(), "P")?;
        let i = split_key(i, &sc.in_radix(), "P")?;
        table[sc.event(o, i)] = parse_rational(v).map_err(|e| Error::Parse(format!("P[{k:?}]: {e}")))?;
    }
    Behavior::from_table_unchecked(sc, table, j.subnormalized)
}

/// Writes every nonzero entry; absent keys read back as zero.
pub fn behavior_to_json(b: &Behavior) -> String {
    let sc = b.scenario();
    let mut p = BTreeMap::new();
    for (o, od) in sc.out_radix().iter().enumerate() {
        for (i, id) in sc.in_radix().iter().enumerate() {
            let v = b.p(o, i);
            if !v.is_zero() {
                p.insert(format!("{}|{}", join(&od), join(&id)), v.to_string());
            }
        }
    }
    let j = BehaviorJson {
        parties: sc.parties(),
        inputs: sc.inputs.clone(),
        outputs: sc.outputs.clone(),
        subnormalized: b.is_subnormalized(),
        p,
    };
    serde_json::to_string_pretty(&j).expect("serializable")
}
