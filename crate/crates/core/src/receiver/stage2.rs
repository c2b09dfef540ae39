//! Stage 2: with a belief `x` about the sender already visited, garble the
//! other sender's experiment and pick the better of the two.

use serde::Serialize;

use super::ModelParams;
use crate::beliefs::DiscreteBeliefDistribution;
use crate::concavify::{optimal_garbling, GarblingSolution, SampledFunction};
use crate::error::Result;
use crate::scalar::Scalar;

/// `max{x, y} − k(y − μ)²`.
pub fn stage2_payoff<T: Scalar>(y: T, x: T, params: &ModelParams<T>) -> T {
    payoff(y, x, params.mu, params.k)
}

#[inline]
fn payoff<T: Scalar>(y: T, x: T, mu: T, k: T) -> T {
    x.max(y) - k * (y - mu) * (y - mu)
}

/// Which sender wins when the two posteriors coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorTie {
    #[default]
    FirstVisited,
    SecondVisited,
}

impl PosteriorTie {
    pub fn first_wins<T: Scalar>(self, x: T, y: T) -> bool {
        x > y || (x == y && self == PosteriorTie::FirstVisited)
    }
}

/// What the receiver does at stage 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Stage2Choice<T> {
    /// Learn nothing; compare `x` with the prior.
    Stay,
    /// Binary garbling `{lo, hi}` with weight `weight_lo` on `lo`.
    Learn { lo: T, hi: T, weight_lo: T },
}

/// Optimal stage-2 behaviour at a single stage-1 belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stage2Eval<T> {
    pub value: T,
    pub choice: Stage2Choice<T>,
    /// Probability that the first-visited sender is selected under the
    /// chosen action.
    pub p_first: T,
    /// Range of that probability over all value-maximizing actions.
    pub p_first_min: T,
    pub p_first_max: T,
}

impl<T: Scalar> Stage2Eval<T> {
    pub fn learns(&self) -> bool {
        matches!(self.choice, Stage2Choice::Learn { .. })
    }

    /// Expected cost `k·E[(y − μ)²]` of the chosen garbling.
    pub fn cost(&self, mu: T, k: T) -> T {
        match self.choice {
            Stage2Choice::Stay => T::zero(),
            Stage2Choice::Learn { lo, hi, weight_lo } => {
                k * (weight_lo * (lo - mu).powi(2) + (T::one() - weight_lo) * (hi - mu).powi(2))
            }
        }
    }

    pub fn to_solution(&self, mu: T) -> Result<GarblingSolution<T>> {
        let d = match self.choice {
            Stage2Choice::Stay => DiscreteBeliefDistribution::degenerate(mu)?,
            Stage2Choice::Learn { lo, hi, weight_lo } => DiscreteBeliefDistribution::new(
                vec![lo, hi],
                vec![weight_lo, T::one() - weight_lo],
            )?,
        };
        Ok(GarblingSolution::new(d, self.value))
    }
}

/// Solves stage 2 when every garbling supported in `[lo, hi]` with mean `mu`
/// is feasible. `x` may lie outside the interval.
///
/// The envelope chord of `max{x, y} − k(y − μ)²` joins a point left of `x`
/// with a point right of it, and first-order conditions leave four
/// candidates; the best one is compared with not learning.
pub fn solve_stage2_interval<T: Scalar>(
    x: T,
    mu: T,
    k: T,
    lo: T,
    hi: T,
    tie: PosteriorTie,
) -> Stage2Eval<T> {
    let stay_value = x.max(mu);
    let stay_p = if tie.first_wins(x, mu) { T::one() } else { T::zero() };
    let eps = T::rounding_tol();

    let q = T::one() / (T::lit(4.0) * k);
    let mut cands: [(T, T); 4] = [(x - q, x + q), (lo, hi), (lo, lo), (hi, hi)];
    let mut n = 2;
    if x >= lo {
        cands[n] = (lo, lo + ((x - lo) / k).sqrt());
        n += 1;
    }
    if x <= hi {
        cands[n] = (hi - ((hi - x) / k).sqrt(), hi);
        n += 1;
    }

    let slack = eps * (hi - lo).max(T::one());
    let mut evaluated: [(T, T, T, T); 4] = [(T::zero(), T::zero(), T::zero(), T::zero()); 4];
    let mut m = 0;
    for &(y1, y2) in &cands[..n] {
        let (y1, y2) = (y1.max(lo), y2.min(hi));
        let straddles_x = y1 <= x + slack && x - slack <= y2;
        if !(straddles_x && y1 < mu && mu < y2) {
            continue;
        }
        let nu = (y2 - mu) / (y2 - y1);
        let value = nu * payoff(y1, x, mu, k) + (T::one() - nu) * payoff(y2, x, mu, k);
        let mut p = T::zero();
        if tie.first_wins(x, y1) {
            p = p + nu;
        }
        if tie.first_wins(x, y2) {
            p = p + (T::one() - nu);
        }
        evaluated[m] = (value, y1, y2, p);
        m += 1;
    }

    let best = evaluated[..m]
        .iter()
        .copied()
        .fold(None, |acc: Option<(T, T, T, T)>, c| match acc {
            Some(a) if a.0 >= c.0 => Some(a),
            _ => Some(c),
        });

    let tol = eps * stay_value.abs().max(T::one());
    let (value, choice, p_first) = match best {
        Some((v, y1, y2, p)) if v > stay_value + tol => (
            v,
            Stage2Choice::Learn {
                lo: y1,
                hi: y2,
                weight_lo: (y2 - mu) / (y2 - y1),
            },
            p,
        ),
        _ => (stay_value, Stage2Choice::Stay, stay_p),
    };

    let mut p_min = p_first;
    let mut p_max = p_first;
    if value - stay_value <= tol {
        p_min = p_min.min(stay_p);
        p_max = p_max.max(stay_p);
    }
    for &(v, _, _, p) in &evaluated[..m] {
        if value - v <= tol {
            p_min = p_min.min(p);
            p_max = p_max.max(p);
        }
    }

    Stage2Eval {
        value,
        choice,
        p_first,
        p_first_min: p_min,
        p_first_max: p_max,
    }
}

/// Parameter regimes of the stage-2 closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage2Case {
    /// High cost, prior close to the lower bound.
    LowerBinding,
    /// High cost, prior close to the upper bound.
    UpperBinding,
    /// Both bounds slack for every relevant `x`.
    Interior,
    /// High cost, narrow support: both bounds may bind.
    BothBinding,
    /// `k ≤ 1/(2(h − l))`.
    LowCost,
}

impl Stage2Case {
    pub fn index(self) -> usize {
        match self {
            Stage2Case::LowerBinding => 1,
            Stage2Case::UpperBinding => 2,
            Stage2Case::Interior => 3,
            Stage2Case::BothBinding => 4,
            Stage2Case::LowCost => 5,
        }
    }
}

pub fn stage2_case<T: Scalar>(params: &ModelParams<T>) -> Stage2Case {
    let ModelParams { k, mu, l, h } = *params;
    if !params.high_cost() {
        return Stage2Case::LowCost;
    }
    let half = T::one() / (T::lit(2.0) * k);
    let (a, b) = (l + half, h - half);
    if mu <= a.min(b) {
        Stage2Case::LowerBinding
    } else if mu >= a.max(b) {
        Stage2Case::UpperBinding
    } else if a <= mu && mu <= b {
        Stage2Case::Interior
    } else {
        Stage2Case::BothBinding
    }
}

/// Interval boundaries where the closed-form stage-2 support changes.
pub fn stage2_kinks<T: Scalar>(params: &ModelParams<T>) -> Vec<T> {
    let ModelParams { k, mu, l, h } = *params;
    let q = T::one() / (T::lit(4.0) * k);
    let mut v = vec![
        mu - q,
        mu + q,
        l + q,
        h - q,
        l + k * (mu - l) * (mu - l),
        h - k * (h - mu) * (h - mu),
        l + k * (h - l) * (h - l),
        h - k * (h - l) * (h - l),
    ];
    v.retain(|&t| t > l && t < h);
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.dedup();
    v
}

enum Support<T> {
    Prior,
    Pair(T, T),
}

/// The stage-2 optimum read off the case table, for `x ∈ [l, h]`.
pub fn stage2_closed_form<T: Scalar>(x: T, params: &ModelParams<T>) -> Result<GarblingSolution<T>> {
    params.validate()?;
    let ModelParams { k, mu, l, h } = *params;
    if !(x >= l && x <= h) {
        return Err(crate::error::Error::PriorOutsideInterval {
            prior: x.to_f64_lossy(),
            lo: l.to_f64_lossy(),
            hi: h.to_f64_lossy(),
        });
    }
    let q = T::one() / (T::lit(4.0) * k);
    let low_lower = l + k * (mu - l) * (mu - l);
    let high_upper = h - k * (h - mu) * (h - mu);
    let lower = || Support::Pair(l, l + ((x - l) / k).sqrt());
    let upper = || Support::Pair(h - ((h - x) / k).sqrt(), h);
    let inner = || Support::Pair(x - q, x + q);

    let support = match stage2_case(params) {
        Stage2Case::LowerBinding => {
            if x <= low_lower {
                Support::Prior
            } else if x < l + q {
                lower()
            } else if x < mu + q {
                inner()
            } else {
                Support::Prior
            }
        }
        Stage2Case::UpperBinding => {
            if x <= mu - q {
                Support::Prior
            } else if x <= h - q {
                inner()
            } else if x < high_upper {
                upper()
            } else {
                Support::Prior
            }
        }
        Stage2Case::Interior => {
            if x > mu - q && x < mu + q {
                inner()
            } else {
                Support::Prior
            }
        }
        Stage2Case::BothBinding => {
            if x <= low_lower {
                Support::Prior
            } else if x < l + q {
                lower()
            } else if x <= h - q {
                inner()
            } else if x < high_upper {
                upper()
            } else {
                Support::Prior
            }
        }
        Stage2Case::LowCost => {
            let span = k * (h - l) * (h - l);
            if x <= low_lower {
                Support::Prior
            } else if x < l + span {
                lower()
            } else if x <= h - span {
                Support::Pair(l, h)
            } else if x < high_upper {
                upper()
            } else {
                Support::Prior
            }
        }
    };

    Ok(match support {
        Support::Pair(y1, y2) if y1 < mu && mu < y2 => {
            let nu = (y2 - mu) / (y2 - y1);
            let value = nu * payoff(y1, x, mu, k) + (T::one() - nu) * payoff(y2, x, mu, k);
            GarblingSolution::new(DiscreteBeliefDistribution::binary(y1, y2, mu)?, value)
        }
        _ => GarblingSolution::degenerate(mu, x.max(mu)),
    })
}

/// Numeric stage-2 optimum: concavify the payoff on a `grid_points` grid
/// over `[l, h]` that also contains `x` and `μ`.
pub fn stage2_oracle<T: Scalar>(
    x: T,
    params: &ModelParams<T>,
    grid_points: usize,
) -> Result<GarblingSolution<T>> {
    params.validate()?;
    let f = SampledFunction::from_fn(params.l, params.h, grid_points, &[x, params.mu], |y| {
        stage2_payoff(y, x, params)
    })?;
    optimal_garbling(&f, params.mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concavify::GarblingKind;

    fn params(k: f64, mu: f64) -> ModelParams<f64> {
        ModelParams::full_info(k, mu).unwrap()
    }

    #[test]
    fn payoff_examples() {
        let p = params(1.0, 0.5);
        assert_eq!(stage2_payoff(0.5, 0.5, &p), 0.5);
        assert!((stage2_payoff(0.75, 0.5, &p) - 0.6875).abs() < 1e-15);
        assert!((stage2_payoff(0.25, 0.5, &p) - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let s = stage2_closed_form(0.5, &params(1.0, 0.5)).unwrap();
        assert_eq!(s.support(), &[0.25, 0.75]);
        assert!((s.distribution.weights()[0] - 0.5).abs() < 1e-12);

        let s = stage2_closed_form(0.9, &params(1.0, 0.5)).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.support(), &[0.5]);

        let s = stage2_closed_form(0.2, &params(1.0, 0.3)).unwrap();
        assert_eq!(s.support()[0], 0.0);
        assert!((s.support()[1] - 0.2f64.sqrt()).abs() < 1e-12);

        let s = stage2_closed_form(0.5, &params(0.4, 0.5)).unwrap();
        assert_eq!(stage2_case(&params(0.4, 0.5)), Stage2Case::LowCost);
        assert_eq!(s.support(), &[0.0, 1.0]);
    }

    #[test]
    fn oracle_matches_examples() {
        let step = 1.0 / 2000.0;
        for (k, mu, x) in [(1.0, 0.5, 0.5), (1.0, 0.5, 0.9), (1.0, 0.3, 0.2), (0.4, 0.5, 0.5)] {
            let p = params(k, mu);
            let cf = stage2_closed_form(x, &p).unwrap();
            let or = stage2_oracle(x, &p, 2001).unwrap();
            assert!((cf.value - or.value).abs() < 1e-5, "{k} {mu} {x}");
            assert_eq!(cf.kind, or.kind);
            for (a, b) in cf.support().iter().zip(or.support()) {
                assert!((a - b).abs() <= 2.0 * step, "{k} {mu} {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn oracle_is_degenerate_for_huge_cost() {
        let s = stage2_oracle(0.5, &params(1e6, 0.5), 2001).unwrap();
        assert_eq!(s.kind, GarblingKind::Degenerate);
    }

    #[test]
    fn tangent_solver_agrees_with_closed_form() {
        let cases = [
            (1.0, 0.5, 0.0, 1.0),
            (1.0, 0.3, 0.0, 1.0),
            (0.4, 0.5, 0.0, 1.0),
            (3.0, 0.8, 0.1, 0.9),
            (1.2, 0.5, 0.2, 0.8),
        ];
        for (k, mu, l, h) in cases {
            let p = ModelParams::new(k, mu, l, h).unwrap();
            for i in 0..=200 {
                let x = l + (h - l) * i as f64 / 200.0;
                let cf = stage2_closed_form(x, &p).unwrap();
                let ts = solve_stage2_interval(x, mu, k, l, h, PosteriorTie::FirstVisited);
                assert!((cf.value - ts.value).abs() < 1e-12, "{k} {mu} {l} {h} {x}");
            }
        }
    }

    #[test]
    fn selection_probability_in_interior() {
        let t = solve_stage2_interval(0.4f64, 0.5, 1.0, 0.0, 1.0, PosteriorTie::FirstVisited);
        assert!((t.p_first - (2.0 * 0.4 - 1.0 + 0.5)).abs() < 1e-12);
        assert_eq!(t.p_first_min, t.p_first_max);
    }

    #[test]
    fn belief_outside_interval() {
        let t = solve_stage2_interval(0.1, 0.5, 1.0, 0.3, 0.9, PosteriorTie::FirstVisited);
        assert!(!t.learns());
        assert_eq!(t.p_first, 0.0);
    }

    #[test]
    fn single_precision() {
        let p = ModelParams::<f32>::full_info(1.0, 0.5).unwrap();
        let s = stage2_closed_form(0.5f32, &p).unwrap();
        assert!((s.support()[0] - 0.25).abs() < 1e-6);
        let o = stage2_oracle(0.5f32, &p, 2001).unwrap();
        assert!((o.value - s.value).abs() < 1e-4);
    }
}
