//! Concentration and parallel-repetition bounds behind the exponential decay
//! of the guessing probability, with parameter feasibility checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{make_chain_game, make_guessing_game};
use crate::ns::{alpha_slope, SlopeReport};
use crate::rational::{int, rat, to_f64, Rational};

/// `(4 + √3)/6`, the quantum value of the chain game.
pub fn quantum_chain_value() -> f64 {
    (4.0 + 3f64.sqrt()) / 6.0
}

/// No-signalling value of the chain guessing game.
pub fn ns_guessing_value() -> Rational {
    rat(8, 9)
}

/// `1/(6⁹·5²)`.
pub fn default_mu() -> Rational {
    Rational::new(1.into(), (6u64.pow(9) * 25).into())
}

/// A probability bound: the formula value and the value capped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub raw: f64,
    pub clamped: f64,
}

impl Bound {
    pub fn new(raw: f64) -> Self {
        let clamped = if raw.is_nan() { 1.0 } else { raw.clamp(0.0, 1.0) };
        Bound { raw, clamped }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be positive, got {v}")))
    }
}

/// `2·exp(−nκ²/2)`.
pub fn azuma_abort_bound(n: u64, kappa: f64) -> Result<Bound> {
    positive("kappa", kappa)?;
    Ok(Bound::new(2.0 * (-(n as f64) * kappa * kappa / 2.0).exp()))
}

/// Binary relative entropy in nats, with `0·ln 0 = 0`.
pub fn binary_kl(gamma: f64, zeta: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(gamma, zeta) + term(1.0 - gamma, 1.0 - zeta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffBound {
    /// `exp(−t·D(γ‖ζ))`.
    pub kl: Bound,
    /// `exp(−2t(γ−ζ)²)`.
    pub quadratic: Bound,
}

pub fn chernoff_bound(t: f64, gamma: f64, zeta: f64) -> Result<ChernoffBound> {
    if !(0.0 <= zeta && zeta <= gamma && gamma <= 1.0) {
        return Err(Error::Invalid(format!("need 0 ≤ ζ ≤ γ ≤ 1, got γ = {gamma}, ζ = {zeta}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("t must be nonnegative, got {t}")));
    }
    Ok(ChernoffBound {
        kl: Bound::new((-t * binary_kl(gamma, zeta)).exp()),
        quadratic: Bound::new((-2.0 * t * (gamma - zeta).powi(2)).exp()),
    })
}

/// `8·exp(−δ⁴μn)`.
pub fn parallel_rep_bound(n: u64, delta: f64, mu: f64) -> Result<Bound> {
    positive("delta", delta)?;
    positive("mu", mu)?;
    Ok(Bound::new(8.0 * (-delta.powi(4) * mu * n as f64).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayParams {
    pub n: u64,
    pub delta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub mu: f64,
    pub pi_min: f64,
    pub omega_star: f64,
}

impl DecayParams {
    /// Default constants with `ω* = κ + δ + 8/9`.
    pub fn new(n: u64, delta: f64, kappa: f64, gamma: f64) -> Self {
        DecayParams {
            n,
            delta,
            kappa,
            gamma,
            mu: to_f64(&default_mu()),
            pi_min: 1.0 / 27.0,
            omega_star: kappa + delta + to_f64(&ns_guessing_value()),
        }
    }

    pub fn with_omega_star(mut self, omega_star: f64) -> Self {
        self.omega_star = omega_star;
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    /// Every violated inequality, empty when the parameters are admissible.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n == 0 {
            v.push("n ≥ 1".to_string());
        }
        if !(self.delta > 0.0 && self.delta < 0.1) {
            v.push(format!("0 < δ < 1/10 (δ = {})", self.delta));
        }
        if !(self.kappa > 0.0) {
            v.push(format!("κ > 0 (κ = {})", self.kappa));
        }
        if !(self.gamma > 2.0 / 3.0 && self.gamma < 1.0) {
            v.push(format!("2/3 < γ < 1 (γ = {})", self.gamma));
        }
        if !(self.mu > 0.0) {
            v.push(format!("μ > 0 (μ = {})", self.mu));
        }
        let implied = self.kappa + self.delta + 8.0 / 9.0;
        if (self.omega_star - implied).abs() > 1e-12 {
            v.push(format!("ω* = κ + δ + 8/9 (ω* = {}, κ + δ + 8/9 = {implied})", self.omega_star));
        }
        if self.omega_star > quantum_chain_value() {
            v.push(format!("ω* ≤ (4+√3)/6 (ω* = {} > {})", self.omega_star, quantum_chain_value()));
        }
        v
    }

    pub fn is_feasible(&self) -> bool {
        self.violations().is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub params: DecayParams,
    /// `t = (ω* − κ)n` winning rounds required.
    pub t: f64,
    pub abort: Bound,
    pub parallel_rep: Bound,
    /// `8e^{−δ⁴μn}/(1 − 2e^{−nκ²/2})`; infinite when the denominator is not positive.
    pub guess_given_no_abort: Bound,
    /// `e^{−2t(γ−2/3)²}`.
    pub guess_input: Bound,
    /// `24e^{−δ⁴μn}`.
    pub headline: Bound,
    /// `−log₂(headline)/n`, using the capped headline.
    pub hmin_rate: f64,
    /// Smallest `n` with headline below 1: `⌊ln 24/(δ⁴μ)⌋ + 1`.
    pub useful_from_n: f64,
}

pub const DECAY_CSV_HEADER: [&str; 8] = ["n", "delta", "kappa", "gamma", "abort_bound", "guess_bound", "headline", "hmin_rate"];

impl BoundReport {
    /// CSV fields; probabilities are the capped values.
    pub fn csv_fields(&self) -> [String; 8] {
        let p = &self.params;
        [
            p.n.to_string(),
            p.delta.to_string(),
            p.kappa.to_string(),
            p.gamma.to_string(),
            self.abort.clamped.to_string(),
            self.guess_given_no_abort.clamped.to_string(),
            self.headline.clamped.to_string(),
            self.hmin_rate.to_string(),
        ]
    }
}

pub fn tons_decay_report(p: &DecayParams) -> Result<BoundReport> {
    let bad = p.violations();
    if !bad.is_empty() {
        return Err(Error::Infeasible(format!("violated: {}", bad.join("; "))));
    }
    let n = p.n as f64;
    let decay = p.delta.powi(4) * p.mu;
    let t = (p.omega_star - p.kappa) * n;
    let abort = azuma_abort_bound(p.n, p.kappa)?;
    let parallel_rep = parallel_rep_bound(p.n, p.delta, p.mu)?;
    let denom = 1.0 - abort.raw;
    let conditional = if denom > 0.0 { parallel_rep.raw / denom } else { f64::INFINITY };
    let headline = Bound::new(24.0 * (-decay * n).exp());
    Ok(BoundReport {
        params: p.clone(),
        t,
        abort,
        parallel_rep,
        guess_given_no_abort: Bound::new(conditional),
        guess_input: Bound::new((-2.0 * t * (p.gamma - 2.0 / 3.0).powi(2)).exp()),
        headline,
        hmin_rate: (0.0 - headline.clamped.log2()) / n,
        useful_from_n: (24f64.ln() / decay).floor() + 1.0,
    })
}

/// Reports for each `n`, sharing the other parameters.
pub fn decay_sweep(p: &DecayParams, ns: &[u64]) -> Result<Vec<BoundReport>> {
    ns.iter().map(|&n| tons_decay_report(&p.clone().with_n(n))).collect()
}

/// `π_min² / (α²·6⁷)`.
pub fn mu_from(pi_min: &Rational, alpha: &Rational) -> Rational {
    pi_min * pi_min / (alpha * alpha * int(6i64.pow(7)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuReport {
    #[serde(with = "crate::rational::serde_str")]
    pub pi_min: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub mu: Rational,
    pub pi_min_ok: bool,
    pub alpha_ok: bool,
    pub mu_ok: bool,
}

impl MuReport {
    pub fn passed(&self) -> bool {
        self.pi_min_ok && self.alpha_ok && self.mu_ok
    }
}

/// ε values at which the slope is sampled.
pub fn alpha_grid() -> [Rational; 3] {
    [rat(1, 40), rat(1, 20), rat(1, 10)]
}

/// Recomputes `π_min` of the chain guessing game and `α` from the ε-relaxed
/// LP values, then checks that they give the default μ exactly.
pub fn mu_consistency_check() -> Result<MuReport> {
    let gg = make_guessing_game(&make_chain_game())?;
    let pi_min = gg.pi_min();
    let alpha = match alpha_slope(&gg, &alpha_grid())? {
        SlopeReport::Affine { slope, .. } => slope,
        SlopeReport::Piecewise(_) => {
            return Err(Error::Verification("ε-relaxed values are not affine on the sampled grid".into()))
        }
    };
    let mu = mu_from(&pi_min, &alpha);
    Ok(MuReport {
        pi_min_ok: pi_min == rat(1, 27),
        alpha_ok: alpha == rat(10, 9),
        mu_ok: mu == default_mu(),
        pi_min,
        alpha,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(6u64.pow(9) * 25, 251_942_400);
        assert_eq!(mu_from(&rat(1, 27), &rat(10, 9)), default_mu());
    }

    #[test]
    fn azuma_reference_point() {
        let b = azuma_abort_bound(1000, 0.05).unwrap();
        assert!((b.raw - 2.0 * (-1.25f64).exp()).abs() < 1e-15);
        assert_eq!(azuma_abort_bound(0, 0.1).unwrap(), Bound { raw: 2.0, clamped: 1.0 });
        assert!(azuma_abort_bound(10, 0.0).is_err());
    }

    #[test]
    fn chernoff_rejects_reversed_arguments() {
        assert!(chernoff_bound(10.0, 0.5, 0.6).is_err());
        assert_eq!(chernoff_bound(10.0, 0.7, 0.7).unwrap().kl.raw, 1.0);
    }
}
