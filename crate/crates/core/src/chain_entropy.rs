//! Qubit strategy for the three-setting chained expression and the resulting
//! guessing probability of Alice's first setting, as closed forms in θ and
//! as a function of the observed value.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::Game;

/// Largest quantum value of the chained expression.
pub fn max_quantum_value() -> f64 {
    3.0 * 3f64.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrategyParams {
    pub theta: f64,
    pub phi_a: f64,
    pub phi_b: f64,
}

impl StrategyParams {
    pub fn cos_a(&self) -> f64 {
        self.phi_a.cos()
    }
    pub fn sin_a(&self) -> f64 {
        self.phi_a.sin()
    }
    pub fn cos_b(&self) -> f64 {
        self.phi_b.cos()
    }
    pub fn sin_b(&self) -> f64 {
        self.phi_b.sin()
    }

    /// Residuals of the four angle identities used to simplify the value.
    /// The third is multiplied through by `1 − cos θ`.
    pub fn identity_residuals(&self) -> [f64; 4] {
        let c = self.theta.cos();
        let (ca, sa, cb, sb) = (self.cos_a(), self.sin_a(), self.cos_b(), self.sin_b());
        [
            sb - ca - 1.0,
            2.0 * ca + 1.0 + cb * cb * (1.0 + c) / 2.0,
            (2.0 * sb - 1.0) * (1.0 - c) + sa * sa * (1.0 + c),
            sa + cb * (self.theta / 2.0).sin(),
        ]
    }
}

fn check_theta(theta: f64, closed: bool) -> Result<()> {
    let ok = theta >= 0.0 && if closed { theta <= PI } else { theta < PI };
    if ok {
        Ok(())
    } else {
        let range = if closed { "[0, π]" } else { "[0, π)" };
        Err(Error::Invalid(format!("θ = {theta} is outside {range}")))
    }
}

/// Measurement angles for parameter θ ∈ [0, π). Both lie in `[π/2, π]`;
/// θ = 0 sits on the boundary `φ_a = φ_b = π`.
pub fn angles_from_theta(theta: f64) -> Result<StrategyParams> {
    check_theta(theta, false)?;
    let c = theta.cos();
    let r = (3.0 + c * c).sqrt();
    // Same as (1 − c − r)/(1 + c) and (2 − r)/(1 + c), without the cancellation.
    let cos_a = -2.0 / (1.0 - c + r);
    let sin_b = (1.0 - c) / (2.0 + r);
    Ok(StrategyParams { theta, phi_a: cos_a.clamp(-1.0, 1.0).acos(), phi_b: PI - sin_b.clamp(-1.0, 1.0).asin() })
}

/// Limits of the angles as θ → π.
pub fn angles_at_pi() -> StrategyParams {
    StrategyParams { theta: PI, phi_a: 2.0 * PI / 3.0, phi_b: 5.0 * PI / 6.0 }
}

fn params(theta: f64) -> Result<StrategyParams> {
    check_theta(theta, true)?;
    if theta == PI {
        Ok(angles_at_pi())
    } else {
        angles_from_theta(theta)
    }
}

/// Closed-form value of the chained expression for parameter θ.
pub fn quantum_value(theta: f64) -> Result<f64> {
    check_theta(theta, true)?;
    if theta == PI {
        return Ok(max_quantum_value());
    }
    let c = theta.cos();
    let r = (3.0 + c * c).sqrt();
    Ok((3.0 - c + r) * (6.0 / (2.0 * r + 3.0 - c)).sqrt())
}

/// Eve's optimal guessing probability of Alice's first setting: `(1 + cos(θ/2))/2`.
pub fn guessing_from_theta(theta: f64) -> Result<f64> {
    check_theta(theta, true)?;
    Ok((1.0 + (theta / 2.0).cos()) / 2.0)
}

/// `8w²x³ + (w⁴−432)x² + (2w⁴−72w²+864)x + (w⁴−432)`.
pub fn cubic_coefficients(w: f64) -> [f64; 4] {
    let (w2, w4) = (w * w, w.powi(4));
    [8.0 * w2, w4 - 432.0, 2.0 * w4 - 72.0 * w2 + 864.0, w4 - 432.0]
}

pub fn cubic_residual(w: f64, x: f64) -> f64 {
    let [a, b, c, d] = cubic_coefficients(w);
    ((a * x + b) * x + c) * x + d
}

/// Residual divided by the largest term magnitude.
pub fn cubic_relative_residual(w: f64, x: f64) -> f64 {
    let [a, b, c, d] = cubic_coefficients(w);
    let scale = [a * x.powi(3), b * x * x, c * x, d].iter().map(|t| t.abs()).fold(f64::MIN_POSITIVE, f64::max);
    cubic_residual(w, x).abs() / scale
}

pub fn cubic_discriminant(w: f64) -> f64 {
    let [a, b, c, d] = cubic_coefficients(w);
    18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d
}

/// Real roots of the cubic in ascending order.
pub fn cubic_real_roots(w: f64) -> Vec<f64> {
    let [a, b, c, d] = cubic_coefficients(w);
    let companion = Matrix3::new(-b / a, -c / a, -d / a, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| newton(w, z.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
    roots
}

fn newton(w: f64, mut x: f64) -> f64 {
    let [a, b, c, _] = cubic_coefficients(w);
    for _ in 0..50 {
        let f = cubic_residual(w, x);
        let df = (3.0 * a * x + 2.0 * b) * x + c;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// θ with `quantum_value(θ) = w`, by bisection (the value is increasing).
pub fn theta_of_w(w: f64) -> Result<f64> {
    check_w_quantum(w)?;
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if quantum_value(mid)? < w {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_w_quantum(w: f64) -> Result<()> {
    if (4.0..=max_quantum_value()).contains(&w) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("w = {w} is outside [4, 3√3]")))
    }
}

/// The root `x = cos θ` of the cubic that belongs to the strategy curve: the
/// real root in `[−1, 1]` closest to the bisection estimate.
pub fn select_cubic_root(w: f64) -> Result<f64> {
    let estimate = theta_of_w(w)?.cos();
    let roots = cubic_real_roots(w);
    log::debug!("w = {w}: discriminant {:e}, real roots {roots:?}", cubic_discriminant(w));
    roots
        .into_iter()
        .filter(|x| (-1.0 - 1e-9..=1.0 + 1e-9).contains(x))
        .min_by(|p, q| (p - estimate).abs().total_cmp(&(q - estimate).abs()))
        .map(|x| x.clamp(-1.0, 1.0))
        .ok_or_else(|| Error::Solver(format!("no admissible real root of the cubic at w = {w}")))
}

/// Guessing probability against the qubit strategy at observed value `w`.
pub fn pg_quantum_of_w(w: f64) -> Result<f64> {
    check_w_quantum(w)?;
    if w == 4.0 {
        return Ok(1.0);
    }
    if w == max_quantum_value() {
        return Ok(0.5);
    }
    let x = select_cubic_root(w)?;
    Ok(0.5 * (1.0 + ((1.0 + x) / 2.0).sqrt()))
}

/// Guessing probability against no-signalling adversaries: `2 − w/4`.
pub fn pg_ns_of_w(w: f64) -> Result<f64> {
    if (4.0..=6.0).contains(&w) {
        Ok(2.0 - w / 4.0)
    } else {
        Err(Error::Invalid(format!("w = {w} is outside [4, 6]")))
    }
}

pub fn hmin(pg: f64) -> f64 {
    // 0 − x keeps H(1) at +0 rather than −0.
    0.0 - pg.log2()
}

// ---------------------------------------------------------------------------
// Density-matrix evaluation

pub type C2 = Matrix2<Complex64>;
pub type C4 = Matrix4<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn pauli_x() -> C2 {
    C2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}
pub fn pauli_y() -> C2 {
    C2::new(c(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), c(0.0))
}
pub fn pauli_z() -> C2 {
    C2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

pub fn kron(a: &C2, b: &C2) -> C4 {
    C4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// `cos φ · Z + sin φ · X`.
fn axis(cos: f64, sin: f64) -> C2 {
    pauli_z() * c(cos) + pauli_x() * c(sin)
}

#[derive(Clone, Debug)]
pub struct QubitStrategy {
    pub state: C4,
    pub alice: [C2; 3],
    pub bob: [C2; 3],
}

impl QubitStrategy {
    pub fn for_theta(theta: f64) -> Result<Self> {
        let p = params(theta)?;
        let (ca, sa, cb, sb) = (p.cos_a(), p.sin_a(), p.cos_b(), p.sin_b());
        Ok(QubitStrategy {
            state: pauli_state(theta),
            alice: [pauli_z(), axis(-ca, sa), axis(ca, sa)],
            bob: [axis(-cb, sb), pauli_x(), axis(cb, sb)],
        })
    }

    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        (self.state * kron(&self.alice[x], &self.bob[y])).trace().re
    }

    /// `Tr[ρ (A0B0 + A1B0 + A1B1 + A2B1 + A2B2 − A0B2)]`.
    pub fn chain_value(&self) -> f64 {
        let e = |x, y| self.correlator(x, y);
        e(0, 0) + e(1, 0) + e(1, 1) + e(2, 1) + e(2, 2) - e(0, 2)
    }
}

/// `(II + ZZ + s XX − s YY)/4` with `s = sin(θ/2)`.
pub fn pauli_state(theta: f64) -> C4 {
    let s = (theta / 2.0).sin();
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    (C4::identity() + kron(&z, &z) + kron(&x, &x) * c(s) - kron(&y, &y) * c(s)) * c(0.25)
}

/// Alice–Bob marginal of `(|00⟩|e0⟩ + |11⟩|e1⟩)/√2` with `⟨e0|e1⟩ = sin(θ/2)`.
pub fn reduced_state_from_purification(theta: f64) -> C4 {
    let s = (theta / 2.0).sin();
    let e0 = Vector2::new(c(1.0), c(0.0));
    let e1 = Vector2::new(c(s), c((1.0 - s * s).max(0.0).sqrt()));
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    // |Ψ⟩ = Σ_ab |ab⟩ ⊗ |φ_ab⟩ with φ_00 = e0/√2, φ_11 = e1/√2.
    let mut phi = [Vector2::zeros(); 4];
    phi[0] = e0 * c(amp);
    phi[3] = e1 * c(amp);
    C4::from_fn(|i, j| phi[j].dotc(&phi[i]))
}

/// Projector onto the `(−1)^a` eigenspace of a ±1 observable.
fn projector(obs: &C2, a: usize) -> C2 {
    let sign = if a == 0 { 1.0 } else { -1.0 };
    (C2::identity() + obs * c(sign)) * c(0.5)
}

/// Outcome probabilities of a two-qubit strategy laid out like `game`'s
/// scenario, with output 0 for eigenvalue +1.
pub fn strategy_behavior(state: &C4, alice: &[C2], bob: &[C2], game: &Game) -> Result<Vec<f64>> {
    let sc = game.scenario();
    if sc.inputs != [alice.len(), bob.len()] || sc.outputs != [2, 2] {
        return Err(Error::Shape("strategy does not match the game's alphabets".into()));
    }
    let mut table = vec![0.0; sc.n_events()];
    for (x, ax) in alice.iter().enumerate() {
        for (y, by) in bob.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let m = kron(&projector(ax, a), &projector(by, b));
                    table[sc.event_of(&[a, b], &[x, y])] = (state * m).trace().re;
                }
            }
        }
    }
    Ok(table)
}

/// Game value of a real-valued behavior table.
pub fn game_value_f64(game: &Game, table: &[f64]) -> f64 {
    let sc = game.scenario();
    let n_in = sc.n_in();
    table
        .iter()
        .enumerate()
        .filter(|&(e, _)| game.predicate()[e] == 1)
        .map(|(e, p)| crate::rational::to_f64(game.pi(e % n_in)) * p)
        .sum()
}

/// `A_x = sin θ_x X + cos θ_x Z`, `B_y = sin φ_y X + cos φ_y Z` with
/// `θ_x = xπ/3`, `φ_y = (2y+1)π/6` on `(|00⟩ + |11⟩)/√2`.
pub fn fixed_chain_strategy() -> (C4, Vec<C2>, Vec<C2>) {
    let phi = Vector4::new(c(1.0), c(0.0), c(0.0), c(1.0)) * c(std::f64::consts::FRAC_1_SQRT_2);
    let state = phi * phi.adjoint();
    let alice = (0..3).map(|x| x as f64 * PI / 3.0).map(|t| axis(t.cos(), t.sin())).collect();
    let bob = (0..3).map(|y| (2 * y + 1) as f64 * PI / 6.0).map(|t| axis(t.cos(), t.sin())).collect();
    (state, alice, bob)
}

/// Value of the chain game under [`fixed_chain_strategy`].
pub fn fixed_strategy_game_value(chain: &Game) -> Result<f64> {
    let (state, alice, bob) = fixed_chain_strategy();
    Ok(game_value_f64(chain, &strategy_behavior(&state, &alice, &bob, chain)?))
}

/// `(4 + √3)/6`.
pub fn chain_quantum_game_value() -> f64 {
    (4.0 + 3f64.sqrt()) / 6.0
}

// ---------------------------------------------------------------------------
// Curves

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub w: f64,
    pub pg_quantum: Option<f64>,
    pub hmin_quantum: Option<f64>,
    pub pg_ns: f64,
    pub hmin_ns: f64,
}

pub const CURVE_HEADER: [&str; 5] = ["w", "pg_quantum", "hmin_quantum", "pg_ns", "hmin_ns"];

impl CurveRow {
    pub fn fields(&self) -> [String; 5] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [self.w.to_string(), opt(self.pg_quantum), opt(self.hmin_quantum), self.pg_ns.to_string(), self.hmin_ns.to_string()]
    }
}

/// One row per grid point in `[4, 6]`; quantum columns are empty above 3√3.
pub fn emit_min_entropy_curves(grid: &[f64]) -> Result<Vec<CurveRow>> {
    grid.par_iter()
        .map(|&w| {
            let pg_ns = pg_ns_of_w(w)?;
            let pg_quantum = if w <= max_quantum_value() { Some(pg_quantum_of_w(w)?) } else { None };
            Ok(CurveRow { w, pg_quantum, hmin_quantum: pg_quantum.map(hmin), pg_ns, hmin_ns: hmin(pg_ns) })
        })
        .collect()
}

/// `n` evenly spaced points from 4 to 6.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![4.0],
        _ => (0..n).map(|k| 4.0 + 2.0 * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSummary {
    pub pg_quantum_at_4: f64,
    pub pg_quantum_at_max: f64,
    pub pg_ns_at_4: f64,
    pub pg_ns_at_6: f64,
    pub max_round_trip_error: f64,
    pub round_trip_points: usize,
}

/// Endpoint values and the largest `|pg_quantum_of_w(w_Q(θ)) − P_g(θ)|` over
/// `points` values of θ in `[0, π]`.
pub fn curve_summary(points: usize) -> Result<CurveSummary> {
    let max_round_trip_error = round_trip_errors(points)?.into_iter().fold(0.0, f64::max);
    Ok(CurveSummary {
        pg_quantum_at_4: pg_quantum_of_w(4.0)?,
        pg_quantum_at_max: pg_quantum_of_w(max_quantum_value())?,
        pg_ns_at_4: pg_ns_of_w(4.0)?,
        pg_ns_at_6: pg_ns_of_w(6.0)?,
        max_round_trip_error,
        round_trip_points: points,
    })
}

pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| PI * k as f64 / (points - 1) as f64).collect(),
    }
}

pub fn round_trip_errors(points: usize) -> Result<Vec<f64>> {
    theta_grid(points)
        .par_iter()
        .map(|&t| {
            let w = quantum_value(t)?.clamp(4.0, max_quantum_value());
            Ok((pg_quantum_of_w(w)? - guessing_from_theta(t)?).abs())
        })
        .collect()
}
