//! Costless attention. The receiver visits the other sender unless her
//! draw is 0 (reject) or 1 (accept), then picks the higher draw; equal
//! draws go to the sender visited last.

use serde::Serialize;

use super::search::lattice;
use crate::beliefs::{atom_benchmark, DiscreteBeliefDistribution};
use crate::error::{Error, Result};

type Belief = DiscreteBeliefDistribution<f64>;

/// Opponent experiments with exact distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KZeroOpponent {
    /// Uniform on `[0, 2μ]`, `μ ≤ 1/2`.
    Uniform { mu: f64 },
    /// Density `1/(2μ)` on `[0, 2(1 − μ)]` plus an atom `2 − 1/μ` at one,
    /// `μ > 1/2`.
    Atom { mu: f64 },
    FullInfo { mu: f64 },
}

impl KZeroOpponent {
    fn mass_at_zero(self) -> f64 {
        match self {
            KZeroOpponent::FullInfo { mu } => 1.0 - mu,
            _ => 0.0,
        }
    }

    /// `P(0 < Y < x)` restricted to `Y < 1`; there are no interior atoms.
    fn interior_below(self, x: f64) -> f64 {
        match self {
            KZeroOpponent::Uniform { mu } => (x / (2.0 * mu)).clamp(0.0, 1.0),
            KZeroOpponent::Atom { mu } => x.clamp(0.0, 2.0 * (1.0 - mu)) / (2.0 * mu),
            KZeroOpponent::FullInfo { .. } => 0.0,
        }
    }

    pub fn mean(self) -> f64 {
        match self {
            KZeroOpponent::Uniform { mu } | KZeroOpponent::Atom { mu } | KZeroOpponent::FullInfo { mu } => mu,
        }
    }
}

/// Deviator selected when visited first with draw `x`.
fn first(x: f64, opp: KZeroOpponent) -> f64 {
    if x >= 1.0 {
        1.0
    } else if x <= 0.0 {
        0.0
    } else {
        opp.mass_at_zero() + opp.interior_below(x)
    }
}

/// Deviator selected when visited second: the opponent's 0 hands it the
/// win, the opponent's 1 ends the search, otherwise ties favour the
/// deviator.
fn second(x: f64, opp: KZeroOpponent) -> f64 {
    opp.mass_at_zero() + opp.interior_below(x.min(1.0))
}

/// Selection probability of a sender offering `dev`, visited first with
/// probability `lambda`.
pub fn kzero_payoff(dev: &Belief, opp: KZeroOpponent, lambda: f64) -> f64 {
    dev.expect(|x| lambda * first(x, opp) + (1.0 - lambda) * second(x, opp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KZeroReport {
    pub opponent: KZeroOpponent,
    pub lambda: f64,
    pub on_path: f64,
    /// Extremes over binary deviations `{α, β}` that stay within the
    /// opponent's support range: `β ≤ 2μ`, resp. `β ≤ 2(1 − μ)` or
    /// `α ≤ 2(1 − μ)`, `β = 1`.
    pub max_payoff: f64,
    pub min_payoff: f64,
    /// Largest payoff among the remaining lattice deviations.
    pub max_payoff_outside: f64,
    pub checked: usize,
    /// Gain of the deviation to full information `{0, 1}`.
    pub full_info_gain: Option<f64>,
    /// `(1 − μ)²(2μ − 1)(2λ − 1)/(2μ²)`.
    pub formula_gain: Option<f64>,
}

fn scan(
    mu: f64,
    opp: KZeroOpponent,
    lambda: f64,
    step: f64,
    inside: impl Fn(f64, f64) -> bool,
) -> (f64, f64, f64, usize) {
    let pts = lattice(step);
    let (mut hi, mut lo, mut out) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut n = 0;
    let delta = Belief::degenerate(mu).expect("finite prior");
    let mut record = |d: &Belief, a: f64, b: f64| {
        let v = kzero_payoff(d, opp, lambda);
        n += 1;
        if inside(a, b) {
            hi = hi.max(v);
            lo = lo.min(v);
        } else {
            out = out.max(v);
        }
    };
    record(&delta, mu, mu);
    for &a in pts.iter().filter(|&&a| a < mu - 1e-12) {
        for &b in pts.iter().filter(|&&b| b > mu + 1e-12) {
            if let Ok(d) = Belief::binary(a, b, mu) {
                record(&d, a, b);
            }
        }
    }
    (hi, lo, out, n)
}

/// Both senders uniform on `[0, 2μ]` with a fair visit order; every binary
/// deviation supported in `[0, 2μ]` earns exactly 1/2.
pub fn kzero_uniform_check(mu: f64, step: f64) -> Result<KZeroReport> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(Error::InvalidParams(format!("uniform benchmark needs 0 < μ ≤ 1/2, got {mu}")));
    }
    let opp = KZeroOpponent::Uniform { mu };
    // E[X/(2μ)] for X uniform on [0, 2μ]
    let on_path = 0.5;
    let top = 2.0 * mu + 1e-12;
    let (max_payoff, min_payoff, max_payoff_outside, checked) = scan(mu, opp, 0.5, step, |_, b| b <= top);
    Ok(KZeroReport {
        opponent: opp,
        lambda: 0.5,
        on_path,
        max_payoff,
        min_payoff,
        max_payoff_outside,
        checked,
        full_info_gain: None,
        formula_gain: None,
    })
}

/// Both senders offer the atom benchmark and sender 1 is visited first
/// with probability `lambda`. The on-path payoff is computed on a midpoint
/// discretization with `n_points` points (exact, the integrand is linear).
pub fn kzero_atom_check(mu: f64, lambda: f64, step: f64, n_points: usize) -> Result<KZeroReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!("λ = {lambda} is not a probability")));
    }
    let opp = KZeroOpponent::Atom { mu };
    let own = atom_benchmark(mu, n_points)?;
    let on_path = kzero_payoff(&own, opp, lambda);
    let top = 2.0 * (1.0 - mu) + 1e-12;
    let (max_payoff, min_payoff, max_payoff_outside, checked) =
        scan(mu, opp, lambda, step, |a, b| b <= top || (b >= 1.0 && a <= top));
    let full = Belief::binary(0.0, 1.0, mu)?;
    let gain = kzero_payoff(&full, opp, lambda) - on_path;
    let formula = (1.0 - mu).powi(2) * (2.0 * mu - 1.0) * (2.0 * lambda - 1.0) / (2.0 * mu * mu);
    Ok(KZeroReport {
        opponent: opp,
        lambda,
        on_path,
        max_payoff,
        min_payoff,
        max_payoff_outside,
        checked,
        full_info_gain: Some(gain),
        formula_gain: Some(formula),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullInfoRefutation {
    pub mu: f64,
    pub n: usize,
    /// Mass on 1.
    pub eta: f64,
    /// The low signal.
    pub eps: f64,
    pub deviation: Belief,
    /// `(1 + 2n − √(1 + 4n))/(2n)`; the deviation pays iff this exceeds μ.
    pub lhs: f64,
    pub on_path: f64,
    pub deviation_payoff: f64,
    pub gain: f64,
}

/// The deviation that puts mass `μ − 1/n` on 1 and the rest on
/// `1/(n + 1 − μn)`.
pub fn kzero_fullinfo_deviation(mu: f64, n: usize, lambda: f64) -> Result<FullInfoRefutation> {
    let nf = n as f64;
    if !(mu > 0.0 && mu < 1.0) || nf * mu <= 1.0 {
        return Err(Error::InvalidParams(format!("need 0 < μ < 1 and n > 1/μ, got μ = {mu}, n = {n}")));
    }
    let eta = mu - 1.0 / nf;
    let eps = 1.0 / (nf + 1.0 - mu * nf);
    let deviation = Belief::new(vec![eps, 1.0], vec![1.0 - eta, eta])?;
    let opp = KZeroOpponent::FullInfo { mu };
    let on_path = kzero_payoff(&Belief::binary(0.0, 1.0, mu)?, opp, lambda);
    let deviation_payoff = kzero_payoff(&deviation, opp, lambda);
    Ok(FullInfoRefutation {
        mu,
        n,
        eta,
        eps,
        lhs: (1.0 + 2.0 * nf - (1.0 + 4.0 * nf).sqrt()) / (2.0 * nf),
        on_path,
        gain: deviation_payoff - on_path,
        deviation_payoff,
        deviation,
    })
}

/// Smallest `n` for which the deviation is profitable.
pub fn kzero_fullinfo_refute(mu: f64, lambda: f64) -> Result<FullInfoRefutation> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(
            "the deviator is never visited first, so the deviation cannot pay".into(),
        ));
    }
    let start = (1.0 / mu).floor() as usize + 1;
    for n in start..start + 1_000_000 {
        let r = kzero_fullinfo_deviation(mu, n, lambda)?;
        if r.lhs > mu && r.gain > 0.0 {
            return Ok(r);
        }
    }
    Err(Error::OutOfRegion(format!("no profitable n found for μ = {mu}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_deviations_earn_half() {
        let r = kzero_uniform_check(0.3, 0.01).unwrap();
        assert!((r.max_payoff - 0.5).abs() < 1e-12);
        assert!((r.min_payoff - 0.5).abs() < 1e-12);
        assert!(r.max_payoff_outside <= 0.5);
    }

    #[test]
    fn atom_gain_formula() {
        for lambda in [0.25, 0.5, 0.75] {
            let r = kzero_atom_check(0.7, lambda, 0.01, 1000).unwrap();
            assert!((r.full_info_gain.unwrap() - r.formula_gain.unwrap()).abs() < 1e-9);
        }
        let r = kzero_atom_check(0.7, 0.5, 0.01, 1000).unwrap();
        assert!((r.max_payoff - 0.5).abs() < 1e-9 && (r.min_payoff - 0.5).abs() < 1e-9);
    }

    #[test]
    fn full_info_is_refuted() {
        for mu in [0.3, 0.5, 0.8] {
            let r = kzero_fullinfo_refute(mu, 0.5).unwrap();
            assert!(r.gain > 0.0 && r.lhs > mu);
            assert!((r.deviation.mean() - mu).abs() < 1e-12);
            let expect = 0.5 * (r.eta + (1.0 - r.eta) * (1.0 - mu) - mu);
            assert!((r.gain - expect).abs() < 1e-12);
        }
    }
}
