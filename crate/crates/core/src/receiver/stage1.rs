//! Stage 1: the continuation value of a first-stage belief and the optimal
//! first-stage garbling.

use serde::Serialize;

use super::stage2::{solve_stage2_interval, stage2_case, stage2_oracle, PosteriorTie, Stage2Case};
use super::ModelParams;
use crate::beliefs::DiscreteBeliefDistribution;
use crate::concavify::{optimal_garbling, GarblingSolution, SampledFunction};
use crate::error::Result;
use crate::scalar::Scalar;

/// `V₂(x) − k(x − μ)²`, with `V₂` the optimal stage-2 value on `[l, h]`.
pub fn stage1_value<T: Scalar>(x: T, params: &ModelParams<T>) -> T {
    let ModelParams { k, mu, l, h } = *params;
    let v2 = solve_stage2_interval(x, mu, k, l, h, PosteriorTie::FirstVisited).value;
    v2 - k * (x - mu) * (x - mu)
}

/// Same as [`stage1_value`] but with the stage-2 value taken from the grid
/// concavification.
pub fn stage1_value_oracle<T: Scalar>(x: T, params: &ModelParams<T>, grid_points: usize) -> Result<T> {
    let v2 = stage2_oracle(x, params, grid_points)?.value;
    Ok(v2 - params.k * (x - params.mu) * (x - params.mu))
}

/// Optimal stage-1 garbling by concavifying the oracle continuation value.
/// Costs `outer · inner` work.
pub fn stage1_oracle<T: Scalar>(
    params: &ModelParams<T>,
    outer: usize,
    inner: usize,
) -> Result<GarblingSolution<T>> {
    let grid = crate::concavify::build_grid(params.l, params.h, outer, &[params.mu])?;
    let values = grid
        .iter()
        .map(|&x| stage1_value_oracle(x, params, inner))
        .collect::<Result<Vec<_>>>()?;
    optimal_garbling(&SampledFunction::new(grid, values)?, params.mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage1Case {
    /// Lower bound binding at stage 2 only; prior far enough from it.
    LowerMultiple,
    /// Prior close to the lower bound: unique `{l, y₁}`.
    LowerUnique,
    UpperMultiple,
    /// Prior close to the upper bound: unique `{y₂, h}`.
    UpperUnique,
    Interior,
    BothMultiple,
    BothLowerUnique,
    BothUpperUnique,
    LowCostLower,
    LowCostUpper,
}

impl Stage1Case {
    pub fn has_multiplicity(self) -> bool {
        matches!(
            self,
            Stage1Case::LowerMultiple
                | Stage1Case::UpperMultiple
                | Stage1Case::Interior
                | Stage1Case::BothMultiple
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Stage1Case::LowerMultiple => "1a",
            Stage1Case::LowerUnique => "1b",
            Stage1Case::UpperMultiple => "2a",
            Stage1Case::UpperUnique => "2b",
            Stage1Case::Interior => "3",
            Stage1Case::BothMultiple => "4a",
            Stage1Case::BothLowerUnique => "4b",
            Stage1Case::BothUpperUnique => "4c",
            Stage1Case::LowCostLower => "5a",
            Stage1Case::LowCostUpper => "5b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportPiece<T> {
    Point { at: T },
    Interval { lo: T, hi: T },
}

impl<T: Scalar> SupportPiece<T> {
    pub fn contains(&self, x: T, tol: T) -> bool {
        match *self {
            SupportPiece::Point { at } => (x - at).abs() <= tol,
            SupportPiece::Interval { lo, hi } => x >= lo - tol && x <= hi + tol,
        }
    }
}

/// Union of points and intervals from which any Bayes-plausible
/// distribution is an optimal stage-1 garbling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleSet<T> {
    pub pieces: Vec<SupportPiece<T>>,
}

impl<T: Scalar> AdmissibleSet<T> {
    pub fn contains(&self, x: T, tol: T) -> bool {
        self.pieces.iter().any(|p| p.contains(x, tol))
    }

    /// Whether every support point of `d` is admissible. Only meaningful for
    /// Bayes-plausible `d` in the multiplicity cases.
    pub fn admits(&self, d: &DiscreteBeliefDistribution<T>, tol: T) -> bool {
        d.points().iter().all(|&x| self.contains(x, tol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1Solution<T> {
    pub case: Stage1Case,
    /// The Blackwell-most-informative optimal garbling.
    pub most_informative: GarblingSolution<T>,
    pub admissible: AdmissibleSet<T>,
}

impl<T: Scalar> Stage1Solution<T> {
    pub fn is_unique(&self) -> bool {
        !self.case.has_multiplicity()
    }
}

fn point<T>(at: T) -> SupportPiece<T> {
    SupportPiece::Point { at }
}

fn interval<T>(lo: T, hi: T) -> SupportPiece<T> {
    SupportPiece::Interval { lo, hi }
}

pub fn stage1_case<T: Scalar>(params: &ModelParams<T>) -> Stage1Case {
    let ModelParams { k, mu, l, h } = *params;
    let q = T::one() / (T::lit(4.0) * k);
    match stage2_case(params) {
        Stage2Case::LowerBinding if mu >= l + q => Stage1Case::LowerMultiple,
        Stage2Case::LowerBinding => Stage1Case::LowerUnique,
        Stage2Case::UpperBinding if mu <= h - q => Stage1Case::UpperMultiple,
        Stage2Case::UpperBinding => Stage1Case::UpperUnique,
        Stage2Case::Interior => Stage1Case::Interior,
        Stage2Case::BothBinding if mu < l + q => Stage1Case::BothLowerUnique,
        Stage2Case::BothBinding if mu > h - q => Stage1Case::BothUpperUnique,
        Stage2Case::BothBinding => Stage1Case::BothMultiple,
        Stage2Case::LowCost if mu <= (l + h) / T::lit(2.0) => Stage1Case::LowCostLower,
        Stage2Case::LowCost => Stage1Case::LowCostUpper,
    }
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
fn golden_max<T: Scalar>(mut a: T, mut b: T, f: &impl Fn(T) -> T, tol: T) -> T {
    let r = T::lit(0.618_033_988_749_894_8);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / T::lit(2.0)
}

/// Coarse scan followed by golden-section refinement around the best cell.
/// Near-ties go to the end named by `prefer_high`.
fn scan_max<T: Scalar>(a: T, b: T, prefer_high: bool, f: impl Fn(T) -> T) -> T {
    let n = 2000usize;
    let step = (b - a) / T::lit(n as f64);
    let at = |i: usize| if i == n { b } else { a + step * T::lit(i as f64) };
    let vals: Vec<T> = (0..=n).map(|i| f(at(i))).collect();
    let scale = vals.iter().fold(T::one(), |m, v| if v.is_finite() { m.max(v.abs()) } else { m });
    let tol = T::rounding_tol() * T::lit(16.0) * scale;
    let mut best = 0usize;
    for i in 1..=n {
        let better = if prefer_high { vals[i] >= vals[best] - tol } else { vals[i] > vals[best] + tol };
        if better {
            best = i;
        }
    }
    let lo = at(best.saturating_sub(1));
    let hi = at((best + 1).min(n));
    let gtol = (T::rounding_tol() * T::lit(100.0)).max(T::epsilon().sqrt() * (b - a));
    let z = golden_max(lo, hi, &f, gtol);
    // keep the grid point when refinement does not improve on it
    let (zb, vb) = (at(best), vals[best]);
    if f(z) > vb + tol {
        z
    } else {
        zb
    }
}

/// `y₁(μ)`: the tangency point of the chord from `(l, U₁(l))`.
pub fn lower_tangent<T: Scalar>(params: &ModelParams<T>) -> T {
    let ModelParams { mu, l, h, .. } = *params;
    let ul = stage1_value(l, params);
    scan_max(mu, h, true, |z| {
        if z <= l {
            T::neg_infinity()
        } else {
            (stage1_value(z, params) - ul) / (z - l)
        }
    })
}

/// `y₂(μ)`: the tangency point of the chord to `(h, U₁(h))`.
pub fn upper_tangent<T: Scalar>(params: &ModelParams<T>) -> T {
    let ModelParams { mu, l, h, .. } = *params;
    let uh = stage1_value(h, params);
    scan_max(l, mu, false, |z| {
        if z >= h {
            T::neg_infinity()
        } else {
            -(uh - stage1_value(z, params)) / (h - z)
        }
    })
}

fn binary_solution<T: Scalar>(lo: T, hi: T, params: &ModelParams<T>) -> Result<GarblingSolution<T>> {
    let d = DiscreteBeliefDistribution::binary(lo, hi, params.mu)?;
    let value = d.expect(|x| stage1_value(x, params));
    Ok(GarblingSolution::new(d, value))
}

/// The stage-1 solution set from the case table.
pub fn stage1_closed_form<T: Scalar>(params: &ModelParams<T>) -> Result<Stage1Solution<T>> {
    params.validate()?;
    let ModelParams { k, mu, l, h } = *params;
    let q = T::one() / (T::lit(4.0) * k);
    let case = stage1_case(params);
    let pieces = match case {
        Stage1Case::LowerMultiple => vec![point(mu - q), interval(l + q, mu + q)],
        Stage1Case::UpperMultiple => vec![interval(mu - q, h - q), point(mu + q)],
        Stage1Case::Interior => vec![interval(mu - q, mu + q)],
        Stage1Case::BothMultiple => vec![point(mu - q), interval(l + q, h - q), point(mu + q)],
        Stage1Case::LowerUnique | Stage1Case::BothLowerUnique | Stage1Case::LowCostLower => {
            let y1 = lower_tangent(params);
            let most_informative = binary_solution(l, y1, params)?;
            return Ok(Stage1Solution {
                case,
                most_informative,
                admissible: AdmissibleSet {
                    pieces: vec![point(l), point(y1)],
                },
            });
        }
        Stage1Case::UpperUnique | Stage1Case::BothUpperUnique | Stage1Case::LowCostUpper => {
            let y2 = upper_tangent(params);
            let most_informative = binary_solution(y2, h, params)?;
            return Ok(Stage1Solution {
                case,
                most_informative,
                admissible: AdmissibleSet {
                    pieces: vec![point(y2), point(h)],
                },
            });
        }
    };
    Ok(Stage1Solution {
        case,
        most_informative: binary_solution(mu - q, mu + q, params)?,
        admissible: AdmissibleSet { pieces },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64, mu: f64) -> ModelParams<f64> {
        ModelParams::full_info(k, mu).unwrap()
    }

    #[test]
    fn value_examples() {
        let p = params(1.0, 0.5);
        assert!((stage1_value(0.75, &p) - 0.6875).abs() < 1e-12);
        assert!((stage1_value(0.25, &p) - 0.4375).abs() < 1e-12);
        // {0.25, 0.75} at stage 2: ½(0.5 − 1/16) + ½(0.75 − 1/16)
        assert!((stage1_value(0.5, &p) - 0.5625).abs() < 1e-12);
        let o = stage1_value_oracle(0.5, &p, 2001).unwrap();
        assert!((o - 0.5625).abs() < 1e-6);
    }

    #[test]
    fn closed_form_examples() {
        let s = stage1_closed_form(&params(1.0, 0.5)).unwrap();
        assert!(s.case.has_multiplicity());
        assert_eq!(s.most_informative.support(), &[0.25, 0.75]);
        assert!((s.most_informative.value - 0.5625).abs() < 1e-12);

        let s = stage1_closed_form(&params(1.0, 0.2)).unwrap();
        assert!(s.is_unique());
        let sup = s.most_informative.support();
        assert_eq!(sup[0], 0.0);
        assert!(sup[1] > 0.2 && sup[1] < 0.25, "{sup:?}");

        let s = stage1_closed_form(&params(2.0, 0.5)).unwrap();
        assert_eq!(s.case, Stage1Case::Interior);
        assert_eq!(s.most_informative.support(), &[0.375, 0.625]);
        assert!(s.admissible.contains(0.4, 0.0));
        assert!(!s.admissible.contains(0.7, 1e-9));
    }

    #[test]
    fn unique_cases_match_oracle() {
        for (k, mu, l, h) in [
            (1.0f64, 0.2, 0.0, 1.0),
            (1.0, 0.85, 0.0, 1.0),
            (0.4, 0.3, 0.0, 1.0),
            (0.4, 0.7, 0.0, 1.0),
            (2.0, 0.3, 0.2, 0.7),
        ] {
            let p = ModelParams::new(k, mu, l, h).unwrap();
            let cf = stage1_closed_form(&p).unwrap();
            assert!(cf.is_unique(), "{k} {mu} {l} {h}");
            let or = stage1_oracle(&p, 801, 801).unwrap();
            assert!(
                (cf.most_informative.value - or.value).abs() < 1e-5,
                "{k} {mu} {l} {h}: {} vs {}",
                cf.most_informative.value,
                or.value
            );
            for (a, b) in cf.most_informative.support().iter().zip(or.support()) {
                assert!((a - b).abs() < 5e-3, "{k} {mu} {l} {h}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn multiplicity_value_is_prior_value() {
        for (k, mu) in [(1.0, 0.3), (1.0, 0.7), (3.0, 0.5), (0.8, 0.5)] {
            let p = params(k, mu);
            let cf = stage1_closed_form(&p).unwrap();
            assert!(cf.case.has_multiplicity());
            assert!((cf.most_informative.value - stage1_value(mu, &p)).abs() < 1e-12);
            let or = stage1_oracle(&p, 801, 801).unwrap();
            assert!((cf.most_informative.value - or.value).abs() < 1e-5);
        }
    }

    #[test]
    fn some_learning_always() {
        for i in 1..40 {
            for k in [0.3, 0.6, 1.0, 2.5, 10.0] {
                let mu = i as f64 / 40.0;
                let s = stage1_closed_form(&params(k, mu)).unwrap();
                assert!(!s.most_informative.is_degenerate(), "{k} {mu}");
                if k > 0.5 || i != 20 {
                    assert_ne!(s.most_informative.support(), &[0.0, 1.0]);
                }
            }
        }
    }

    #[test]
    fn low_cost_midpoint_tie() {
        // {0, μ}-type and {μ, 1}-type optima tie, so full learning is optimal too
        let p = params(0.4, 0.5);
        let s = stage1_closed_form(&p).unwrap();
        assert_eq!(s.most_informative.support(), &[0.0, 1.0]);
        assert!((s.most_informative.value - 0.65).abs() < 1e-12);
        assert!((stage1_value(0.5, &p) - 0.65).abs() < 1e-12);
        let or = stage1_oracle(&p, 801, 801).unwrap();
        assert_eq!(or.support(), &[0.0, 1.0]);
    }

    #[test]
    fn continuity_under_refinement() {
        let p = params(1.0, 0.3);
        let jump = |n: usize| {
            (0..n)
                .map(|i| {
                    let a = i as f64 / n as f64;
                    let b = (i + 1) as f64 / n as f64;
                    (stage1_value(b, &p) - stage1_value(a, &p)).abs()
                })
                .fold(0.0, f64::max)
        };
        assert!(jump(4000) < jump(1000));
        assert!(jump(4000) < 1e-3);
    }
}
