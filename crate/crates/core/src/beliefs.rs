//! Finite-support distributions of posterior beliefs, the garbling (mean
//! preserving contraction) order between them, and quadratic
//! posterior-separable attention costs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probability distribution over beliefs in `[0, 1]` with finite support.
///
/// Points are strictly increasing, weights are positive and sum to one.
/// Zero weights are stripped and duplicate points merged on construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteBeliefDistribution<T> {
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteBeliefDistribution<T> {
    pub fn new(points: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let tol = T::rounding_tol();
        let mut pairs = Vec::with_capacity(points.len());
        for (i, (&x, &w)) in points.iter().zip(&weights).enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if x < -tol || x > T::one() + tol {
                return Err(Error::InvalidDistribution(format!("point {x} outside [0,1]")));
            }
            if w < -tol {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            let x = x.max(T::zero()).min(T::one());
            if w > T::zero() {
                pairs.push((x, w));
            }
        }
        let total = pairs.iter().fold(T::zero(), |acc, &(_, w)| acc + w);
        let mass_tol = T::lit(1e-12).max(T::rounding_tol() * T::lit(pairs.len().max(1) as f64));
        if (total - T::one()).abs() > mass_tol {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite points"));
        let mut points = Vec::with_capacity(pairs.len());
        let mut weights: Vec<T> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match points.last() {
                Some(&last) if last == x => {
                    let n = weights.len();
                    weights[n - 1] = weights[n - 1] + w;
                }
                _ => {
                    points.push(x);
                    weights.push(w);
                }
            }
        }
        for w in &mut weights {
            *w = *w / total;
        }
        Ok(Self { points, weights })
    }

    /// Point mass at `x`.
    pub fn degenerate(x: T) -> Result<Self> {
        Self::new(vec![x], vec![T::one()])
    }

    /// The unique distribution on `{lo, hi}` with the given mean.
    pub fn binary(lo: T, hi: T, mean: T) -> Result<Self> {
        if !(lo <= mean && mean <= hi) {
            return Err(Error::InvalidDistribution(format!(
                "mean {mean} not inside [{lo}, {hi}]"
            )));
        }
        if hi == lo {
            return Self::degenerate(mean);
        }
        let w_hi = (mean - lo) / (hi - lo);
        Self::new(vec![lo, hi], vec![T::one() - w_hi, w_hi])
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.points.len() == 1
    }

    pub fn is_binary(&self) -> bool {
        self.points.len() == 2
    }

    pub fn min_point(&self) -> T {
        self.points[0]
    }

    pub fn max_point(&self) -> T {
        self.points[self.points.len() - 1]
    }

    pub fn mean(&self) -> T {
        self.iter().fold(T::zero(), |acc, (x, w)| acc + x * w)
    }

    /// `Σ wᵢ (xᵢ − center)²`.
    pub fn spread_about(&self, center: T) -> T {
        self.iter()
            .fold(T::zero(), |acc, (x, w)| acc + w * (x - center) * (x - center))
    }

    pub fn cdf(&self, x: T) -> T {
        self.iter()
            .take_while(|&(p, _)| p <= x)
            .fold(T::zero(), |acc, (_, w)| acc + w)
    }

    /// `∫₀ˣ F(t) dt = E[(x − X)⁺]`.
    pub fn integrated_cdf(&self, x: T) -> T {
        self.iter()
            .take_while(|&(p, _)| p <= x)
            .fold(T::zero(), |acc, (p, w)| acc + w * (x - p))
    }

    /// Expectation of `f` over the distribution.
    pub fn expect(&self, mut f: impl FnMut(T) -> T) -> T {
        self.iter().fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }

    /// Same support and weights up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .zip(other.iter())
                .all(|((x, w), (y, v))| (x - y).abs() <= tol && (w - v).abs() <= tol)
    }

    pub fn check_bayes_plausible(&self, prior: T, tol: T) -> Result<()> {
        let mean = self.mean();
        if (mean - prior).abs() > tol {
            return Err(Error::NotBayesPlausible {
                mean: mean.to_f64_lossy(),
                prior: prior.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

impl DiscreteBeliefDistribution<f64> {
    /// Plain-text record: `# mean=<value>` header, then one `point,weight`
    /// pair per line.
    pub fn to_record(&self) -> String {
        let mut out = format!("# mean={}\n", self.mean());
        for (x, w) in self.iter() {
            let _ = writeln!(out, "{x},{w}");
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut declared_mean = None;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("mean=") {
                    let m = v.trim().parse::<f64>().map_err(|e| {
                        Error::Parse(format!("line {}: bad mean: {e}", lineno + 1))
                    })?;
                    declared_mean = Some(m);
                }
                continue;
            }
            let (x, w) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `point,weight`", lineno + 1))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            points.push(parse(x)?);
            weights.push(parse(w)?);
        }
        let d = Self::new(points, weights)?;
        match declared_mean {
            Some(m) => d.check_bayes_plausible(m, 1e-9).map(|_| d),
            None => Err(Error::Parse("missing `# mean=` header".into())),
        }
    }
}

/// Integrated CDF with prefix sums for fast evaluation against many queries.
#[derive(Debug, Clone)]
pub struct IntegratedCdf<T> {
    points: Vec<T>,
    cum_w: Vec<T>,
    cum_wx: Vec<T>,
    mean: T,
    width: T,
}

impl<T: Scalar> IntegratedCdf<T> {
    pub fn new(d: &DiscreteBeliefDistribution<T>) -> Self {
        let mut cum_w = Vec::with_capacity(d.len() + 1);
        let mut cum_wx = Vec::with_capacity(d.len() + 1);
        let (mut sw, mut swx) = (T::zero(), T::zero());
        cum_w.push(sw);
        cum_wx.push(swx);
        for (x, w) in d.iter() {
            sw = sw + w;
            swx = swx + w * x;
            cum_w.push(sw);
            cum_wx.push(swx);
        }
        Self {
            points: d.points().to_vec(),
            cum_w,
            cum_wx,
            mean: d.mean(),
            width: d.max_point() - d.min_point(),
        }
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn eval(&self, x: T) -> T {
        let idx = self.points.partition_point(|&p| p <= x);
        (x * self.cum_w[idx] - self.cum_wx[idx]).max(T::zero())
    }

    /// Whether the binary distribution on `{a, b}` with mean `mean` is a
    /// garbling of the underlying distribution.
    pub fn admits_binary(&self, a: T, b: T, mean: T, tol: T) -> bool {
        if (mean - self.mean).abs() > tol {
            return false;
        }
        if a > mean || b < mean {
            return false;
        }
        if b - a <= T::zero() {
            return true;
        }
        let w_lo = (b - mean) / (b - a);
        let jtol = tol * self.width.max(T::one());
        let lo = self.points.partition_point(|&p| p < a);
        let hi = self.points.partition_point(|&p| p <= b);
        let check = |x: T| w_lo * (x - a) <= self.eval(x) + jtol;
        check(a) && check(b) && self.points[lo..hi].iter().all(|&x| check(x))
    }
}

/// Tolerances for the garbling test.
#[derive(Debug, Clone, Copy)]
pub struct GarblingTol<T> {
    pub mean: T,
    pub majorization: T,
}

impl<T: Scalar> Default for GarblingTol<T> {
    fn default() -> Self {
        Self {
            mean: T::lit(1e-9).max(T::rounding_tol()),
            majorization: T::lit(1e-7).max(T::rounding_tol()),
        }
    }
}

impl<T: Scalar> GarblingTol<T> {
    pub fn uniform(tol: T) -> Self {
        Self {
            mean: tol,
            majorization: tol,
        }
    }
}

/// `q` is a garbling (mean preserving contraction) of `p`: equal means and
/// `E[(x − Q)⁺] ≤ E[(x − P)⁺]` for every `x`.
///
/// Both integrated CDFs are piecewise linear with kinks at the support
/// points, so checking the union of supports is exact.
pub fn is_garbling<T: Scalar>(
    q: &DiscreteBeliefDistribution<T>,
    p: &DiscreteBeliefDistribution<T>,
    tol: GarblingTol<T>,
) -> bool {
    if (q.mean() - p.mean()).abs() > tol.mean {
        return false;
    }
    let width = (p.max_point().max(q.max_point()) - p.min_point().min(q.min_point())).max(T::one());
    let jtol = tol.majorization * width;
    let jq = IntegratedCdf::new(q);
    let jp = IntegratedCdf::new(p);
    q.points()
        .iter()
        .chain(p.points())
        .all(|&x| jq.eval(x) <= jp.eval(x) + jtol)
}

/// Garbling that differs from `p`.
pub fn is_strict_garbling<T: Scalar>(
    q: &DiscreteBeliefDistribution<T>,
    p: &DiscreteBeliefDistribution<T>,
    tol: GarblingTol<T>,
) -> bool {
    is_garbling(q, p, tol) && !q.approx_eq(p, tol.majorization.sqrt())
}

/// Coefficient schedule for attention costs that depend on the sender's
/// experiment. A step `(reference, c)` applies to every experiment that is a
/// garbling of `reference`; the coefficient is the largest applicable step,
/// and never below `floor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSchedule<T> {
    floor: T,
    steps: Vec<(DiscreteBeliefDistribution<T>, T)>,
}

impl<T: Scalar> CostSchedule<T> {
    pub fn new(floor: T, steps: Vec<(DiscreteBeliefDistribution<T>, T)>) -> Result<Self> {
        if !(floor >= T::zero()) {
            return Err(Error::InvalidParams(format!("cost floor {floor} is negative")));
        }
        if let Some((_, c)) = steps.iter().find(|(_, c)| !(*c >= floor)) {
            return Err(Error::InvalidParams(format!(
                "step coefficient {c} is below the floor {floor}"
            )));
        }
        Ok(Self { floor, steps })
    }

    pub fn constant(k: T) -> Result<Self> {
        Self::new(k, Vec::new())
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    pub fn steps(&self) -> &[(DiscreteBeliefDistribution<T>, T)] {
        &self.steps
    }

    pub fn coefficient(&self, p: &DiscreteBeliefDistribution<T>) -> T {
        let tol = GarblingTol::default();
        self.steps
            .iter()
            .filter(|(r, _)| is_garbling(p, r, tol))
            .map(|&(_, c)| c)
            .fold(self.floor, T::max)
    }
}

impl CostSchedule<f64> {
    /// Text form: a `# floor=<k_F>` header, then lines
    /// `<coefficient> | <point>:<weight> <point>:<weight> ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut floor = None;
        let mut steps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Parse(format!("line {}: {m}", lineno + 1));
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("floor=") {
                    floor = Some(v.trim().parse::<f64>().map_err(|e| err(e.to_string()))?);
                }
                continue;
            }
            let (coef, dist) = line
                .split_once('|')
                .ok_or_else(|| err("expected `coef | point:weight ...`".into()))?;
            let coef = coef.trim().parse::<f64>().map_err(|e| err(e.to_string()))?;
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for tok in dist.split_whitespace() {
                let (x, w) = tok
                    .split_once(':')
                    .ok_or_else(|| err(format!("bad support token `{tok}`")))?;
                pts.push(x.parse::<f64>().map_err(|e| err(e.to_string()))?);
                ws.push(w.parse::<f64>().map_err(|e| err(e.to_string()))?);
            }
            steps.push((DiscreteBeliefDistribution::new(pts, ws)?, coef));
        }
        let floor = floor.ok_or_else(|| Error::Parse("missing `# floor=` header".into()))?;
        Self::new(floor, steps)
    }
}

/// How the attention-cost coefficient is determined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CostModel<T> {
    Constant { k: T },
    ExperimentDependent(CostSchedule<T>),
}

impl<T: Scalar> CostModel<T> {
    pub fn constant(k: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::InvalidParams(format!("cost coefficient k = {k} must be positive")));
        }
        Ok(Self::Constant { k })
    }

    /// Coefficient in force at a sender offering `p`.
    pub fn coefficient(&self, p: Option<&DiscreteBeliefDistribution<T>>) -> Result<T> {
        match self {
            CostModel::Constant { k } => Ok(*k),
            CostModel::ExperimentDependent(s) => {
                p.map(|p| s.coefficient(p)).ok_or(Error::MissingSenderDistribution)
            }
        }
    }
}

/// `coefficient · Σ wᵢ (xᵢ − prior)²`.
pub fn attention_cost<T: Scalar>(
    q: &DiscreteBeliefDistribution<T>,
    prior: T,
    cost: &CostModel<T>,
    sender: Option<&DiscreteBeliefDistribution<T>>,
) -> Result<T> {
    Ok(cost.coefficient(sender)? * q.spread_about(prior))
}

/// Quantile-midpoint discretization of the uniform distribution on `[0, 2μ]`.
pub fn uniform_benchmark<T: Scalar>(mu: T, n_points: usize) -> Result<DiscreteBeliefDistribution<T>> {
    if !(mu > T::zero() && mu <= T::lit(0.5)) {
        return Err(Error::InvalidParams(format!("uniform benchmark needs 0 < μ ≤ 1/2, got {mu}")));
    }
    if n_points == 0 {
        return Err(Error::InvalidParams("n_points must be positive".into()));
    }
    let n = T::lit(n_points as f64);
    let width = mu + mu;
    let points = (0..n_points)
        .map(|i| width * (T::lit(i as f64) + T::lit(0.5)) / n)
        .collect();
    DiscreteBeliefDistribution::new(points, vec![T::one() / n; n_points])
}

/// Continuous portion with density `1/(2μ)` on `[0, 2(1 − μ)]`, discretized at
/// quantile midpoints, plus an exact atom of mass `2 − 1/μ` at one.
pub fn atom_benchmark<T: Scalar>(mu: T, n_points: usize) -> Result<DiscreteBeliefDistribution<T>> {
    if !(mu > T::lit(0.5) && mu < T::one()) {
        return Err(Error::InvalidParams(format!("atom benchmark needs 1/2 < μ < 1, got {mu}")));
    }
    if n_points == 0 {
        return Err(Error::InvalidParams("n_points must be positive".into()));
    }
    let n = T::lit(n_points as f64);
    let two = T::lit(2.0);
    let cont_mass = (T::one() - mu) / mu;
    let top = two * (T::one() - mu);
    let mut points: Vec<T> = (0..n_points)
        .map(|i| top * (T::lit(i as f64) + T::lit(0.5)) / n)
        .collect();
    let mut weights = vec![cont_mass / n; n_points];
    points.push(T::one());
    weights.push(two - T::one() / mu);
    DiscreteBeliefDistribution::new(points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DiscreteBeliefDistribution<f64>;

    fn d(pairs: &[(f64, f64)]) -> D {
        D::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(D::degenerate(0.5).unwrap().mean(), 0.5);
        assert_eq!(d(&[(0.0, 0.5), (1.0, 0.5)]).mean(), 0.5);
        assert_eq!(d(&[(0.25, 0.5), (0.75, 0.5)]).mean(), 0.5);
    }

    #[test]
    fn construction_strips_zeros_and_merges() {
        let x = d(&[(0.7, 0.25), (0.2, 0.0), (0.3, 0.5), (0.7, 0.25)]);
        assert_eq!(x.points(), &[0.3, 0.7]);
        assert_eq!(x.weights(), &[0.5, 0.5]);
        // binary with a zero endpoint weight is degenerate after stripping
        assert!(d(&[(0.0, 0.0), (0.4, 1.0)]).is_degenerate());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(D::new(vec![0.5], vec![0.9]).is_err());
        assert!(D::new(vec![1.5], vec![1.0]).is_err());
        assert!(D::new(vec![0.1, 0.2], vec![1.2, -0.2]).is_err());
        assert!(D::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(D::new(vec![], vec![]).is_err());
        assert!(D::new(vec![0.1], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn garbling_examples() {
        let tol = GarblingTol::default();
        let full = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let mid = d(&[(0.25, 0.5), (0.75, 0.5)]);
        assert!(is_garbling(&mid, &full, tol));
        assert!(!is_garbling(&full, &mid, tol));
        assert!(is_garbling(&D::degenerate(0.5).unwrap(), &mid, tol));
        assert!(is_garbling(&D::degenerate(0.5).unwrap(), &full, tol));
        // unequal means
        assert!(!is_garbling(&D::degenerate(0.4).unwrap(), &full, tol));
        assert!(is_strict_garbling(&mid, &full, tol));
        assert!(!is_strict_garbling(&full, &full, tol));
    }

    #[test]
    fn garbling_of_non_binary() {
        let tol = GarblingTol::default();
        let p = d(&[(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]);
        // {0.25, 0.75} has J(0.5) = 0.125 = J_p(0.5): boundary case, still a garbling
        assert!(is_garbling(&d(&[(0.25, 0.5), (0.75, 0.5)]), &p, tol));
        // {0.1, 0.9} is not: J_q(0.5) = 0.2 > 0.125
        assert!(!is_garbling(&d(&[(0.1, 0.5), (0.9, 0.5)]), &p, tol));
        let jp = IntegratedCdf::new(&p);
        assert!(jp.admits_binary(0.25, 0.75, 0.5, 1e-9));
        assert!(!jp.admits_binary(0.1, 0.9, 0.5, 1e-9));
    }

    #[test]
    fn attention_cost_examples() {
        let k1 = CostModel::constant(1.0).unwrap();
        let k2 = CostModel::constant(2.0).unwrap();
        let c = |q: &D, k: &CostModel<f64>| attention_cost(q, 0.5, k, None).unwrap();
        assert_eq!(c(&D::degenerate(0.5).unwrap(), &k1), 0.0);
        assert!((c(&d(&[(0.25, 0.5), (0.75, 0.5)]), &k1) - 0.0625).abs() < 1e-15);
        assert!((c(&d(&[(0.0, 0.5), (1.0, 0.5)]), &k2) - 0.5).abs() < 1e-15);
        assert!(CostModel::constant(0.0).is_err());
    }

    #[test]
    fn experiment_dependent_cost_needs_sender() {
        let sched = CostSchedule::new(1.0, vec![(d(&[(0.25, 0.5), (0.75, 0.5)]), 3.0)]).unwrap();
        let cm = CostModel::ExperimentDependent(sched);
        let q = D::degenerate(0.5).unwrap();
        assert_eq!(attention_cost(&q, 0.5, &cm, None), Err(Error::MissingSenderDistribution));
        let full = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let coarse = d(&[(0.3, 0.5), (0.7, 0.5)]);
        assert_eq!(cm.coefficient(Some(&full)).unwrap(), 1.0);
        assert_eq!(cm.coefficient(Some(&coarse)).unwrap(), 3.0);
        assert!(CostSchedule::new(1.0, vec![(full, 0.5)]).is_err());
    }

    #[test]
    fn schedule_parse() {
        let s = CostSchedule::parse("# floor=1.0\n2.5 | 0.25:0.5 0.75:0.5\n").unwrap();
        assert_eq!(s.floor(), 1.0);
        assert_eq!(s.steps().len(), 1);
        assert!(CostSchedule::parse("2.5 | 0.25:0.5 0.75:0.5\n").is_err());
    }

    #[test]
    fn uniform_benchmark_examples() {
        let u = uniform_benchmark(0.4, 2).unwrap();
        assert!(u.approx_eq(&d(&[(0.2, 0.5), (0.6, 0.5)]), 1e-15));
        let u = uniform_benchmark(0.5, 2).unwrap();
        assert!(u.approx_eq(&d(&[(0.25, 0.5), (0.75, 0.5)]), 1e-15));
        assert!((uniform_benchmark(0.3f64, 1000).unwrap().mean() - 0.3).abs() < 1e-9);
        assert!(uniform_benchmark(0.6, 10).is_err());
        assert!(uniform_benchmark(0.0, 10).is_err());
    }

    #[test]
    fn atom_benchmark_examples() {
        let a = atom_benchmark(0.75f64, 1000).unwrap();
        assert_eq!(a.max_point(), 1.0);
        assert!((a.weights()[a.len() - 1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((a.mean() - 0.75).abs() < 1e-9);
        let total: f64 = a.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let near = atom_benchmark(0.5 + 1e-9, 100).unwrap();
        assert!(near.weights()[near.len() - 1] < 1e-8);
        assert!(atom_benchmark(0.5, 10).is_err());
        assert!(atom_benchmark(1.0, 10).is_err());
    }

    #[test]
    fn benchmark_cost_converges_quadratically() {
        // variance of U[0, 2μ] is μ²/3; midpoint rule is off by μ²/(3N²)
        let mu = 0.4f64;
        for n in [10usize, 100, 1000] {
            let u = uniform_benchmark(mu, n).unwrap();
            let err = (u.spread_about(mu) - mu * mu / 3.0).abs();
            assert!(err <= mu * mu / (3.0 * (n * n) as f64) + 1e-15, "n={n} err={err}");
        }
    }

    #[test]
    fn record_round_trip() {
        let x = d(&[(0.1, 0.3), (0.6, 0.7)]);
        let back = D::from_record(&x.to_record()).unwrap();
        assert!(back.approx_eq(&x, 1e-15));
        assert!(D::from_record("0.1,0.5\n0.9,0.5\n").is_err());
        assert!(D::from_record("# mean=0.7\n0.1,0.5\n0.9,0.5\n").is_err());
        assert!(D::from_record("# mean=0.5\n0.1;0.5\n").is_err());
    }

    #[test]
    fn works_in_f32() {
        let full = DiscreteBeliefDistribution::<f32>::binary(0.0, 1.0, 0.5).unwrap();
        let mid = DiscreteBeliefDistribution::<f32>::binary(0.25, 0.75, 0.5).unwrap();
        assert!(is_garbling(&mid, &full, GarblingTol::default()));
        assert!(!is_garbling(&full, &mid, GarblingTol::default()));
    }
}
