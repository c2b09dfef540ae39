//! Least concave majorant of a sampled function and the supporting chord at
//! a prior, which identifies the optimal Bayes-plausible garbling.

use serde::Serialize;

use crate::beliefs::DiscreteBeliefDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real function sampled on a strictly increasing grid over `[a, b]`.
#[derive(Debug, Clone)]
pub struct SampledFunction<T> {
    grid: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    pub fn new(grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParams("grid and values differ in length".into()));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidParams("need at least two grid points".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = grid.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on `n` uniform points of `[a, b]` plus every breakpoint
    /// that falls inside the interval.
    pub fn from_fn(a: T, b: T, n: usize, breakpoints: &[T], f: impl Fn(T) -> T) -> Result<Self> {
        let grid = build_grid(a, b, n, breakpoints)?;
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interval(&self) -> (T, T) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
}

/// Uniform grid on `[a, b]` with `n` points, merged with the breakpoints that
/// lie inside. Points closer than a few ulps are merged, keeping the
/// breakpoint value.
pub fn build_grid<T: Scalar>(a: T, b: T, n: usize, breakpoints: &[T]) -> Result<Vec<T>> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidParams(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(vec![a]);
    }
    let n = n.max(2);
    let step = (b - a) / T::lit((n - 1) as f64);
    let mut grid: Vec<(T, bool)> = (0..n)
        .map(|i| {
            let x = if i == n - 1 { b } else { a + step * T::lit(i as f64) };
            (x, false)
        })
        .collect();
    grid.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&x| x.is_finite() && x > a && x < b)
            .map(|x| (x, true)),
    );
    grid.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite grid"));
    let merge_tol = T::epsilon() * T::lit(16.0) * (T::one() + b.abs());
    let mut out: Vec<(T, bool)> = Vec::with_capacity(grid.len());
    for (x, is_break) in grid {
        match out.last_mut() {
            Some(last) if x - last.0 <= merge_tol => {
                // endpoints stay exact; otherwise prefer the breakpoint value
                if is_break && !last.1 && last.0 != a {
                    *last = (x, true);
                }
            }
            _ => out.push((x, is_break)),
        }
    }
    let last = out.len() - 1;
    out[last].0 = b;
    Ok(out.into_iter().map(|p| p.0).collect())
}

/// Indices of the upper hull vertices of the points `(xs[i], ys[i])`, with
/// `xs` strictly increasing. Collinear points (within `tol` vertically) are
/// dropped so only the extreme points of flat stretches remain.
pub fn upper_hull<T: Scalar>(xs: &[T], ys: &[T], tol: T) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len().min(64));
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let j = hull[hull.len() - 1];
            let h = hull[hull.len() - 2];
            // height of the middle point above the chord h -> i
            let t = (xs[j] - xs[h]) / (xs[i] - xs[h]);
            let chord = ys[h] + (ys[i] - ys[h]) * t;
            if ys[j] - chord <= tol {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn hull_tol<T: Scalar>(ys: &[T]) -> T {
    let scale = ys.iter().fold(T::one(), |m, y| m.max(y.abs()));
    T::rounding_tol() * scale
}

/// Supporting chord of the envelope at a prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Chord<T> {
    /// The prior is a vertex of the envelope: no learning.
    Degenerate(T),
    /// Mixture of `lo` (weight `weight_lo`) and `hi` with mean at the prior.
    Segment { lo: T, hi: T, weight_lo: T },
}

impl<T: Scalar> Chord<T> {
    pub fn to_distribution(&self) -> Result<DiscreteBeliefDistribution<T>> {
        match *self {
            Chord::Degenerate(x) => DiscreteBeliefDistribution::degenerate(x),
            Chord::Segment { lo, hi, weight_lo } => {
                DiscreteBeliefDistribution::new(vec![lo, hi], vec![weight_lo, T::one() - weight_lo])
            }
        }
    }
}

/// Upper concave envelope of a [`SampledFunction`], as its hull vertices.
#[derive(Debug, Clone)]
pub struct EnvelopeSolution<T> {
    grid: Vec<T>,
    values: Vec<T>,
    hull: Vec<usize>,
}

impl<T: Scalar> EnvelopeSolution<T> {
    pub fn hull_points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.hull.iter().map(|&i| (self.grid[i], self.values[i]))
    }

    pub fn hull_indices(&self) -> &[usize] {
        &self.hull
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn check_inside(&self, x: T) -> Result<()> {
        let (a, b) = (self.grid[0], self.grid[self.grid.len() - 1]);
        if !(x >= a && x <= b) {
            return Err(Error::PriorOutsideInterval {
                prior: x.to_f64_lossy(),
                lo: a.to_f64_lossy(),
                hi: b.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Position of `x` among hull vertices: `Ok(k)` when `x` is vertex `k`,
    /// `Err(k)` when it lies strictly between vertices `k - 1` and `k`.
    fn locate(&self, x: T) -> std::result::Result<usize, usize> {
        self.hull
            .binary_search_by(|&i| self.grid[i].partial_cmp(&x).expect("finite"))
    }

    pub fn value_at(&self, x: T) -> Result<T> {
        self.check_inside(x)?;
        Ok(match self.locate(x) {
            Ok(k) => self.values[self.hull[k]],
            Err(k) => {
                let (i, j) = (self.hull[k - 1], self.hull[k]);
                let t = (x - self.grid[i]) / (self.grid[j] - self.grid[i]);
                self.values[i] + (self.values[j] - self.values[i]) * t
            }
        })
    }

    pub fn chord_at(&self, prior: T) -> Result<Chord<T>> {
        self.check_inside(prior)?;
        Ok(match self.locate(prior) {
            Ok(_) => Chord::Degenerate(prior),
            Err(k) => {
                let (lo, hi) = (self.grid[self.hull[k - 1]], self.grid[self.hull[k]]);
                Chord::Segment {
                    lo,
                    hi,
                    weight_lo: (hi - prior) / (hi - lo),
                }
            }
        })
    }

    /// Grid indices where the function touches the envelope face through
    /// `prior`. Every Bayes-plausible mixture over these points is optimal.
    pub fn contact_set(&self, prior: T, tol: T) -> Result<Vec<usize>> {
        self.check_inside(prior)?;
        let (i, j) = match self.locate(prior) {
            Ok(k) => return Ok(vec![self.hull[k]]),
            Err(k) => (self.hull[k - 1], self.hull[k]),
        };
        let (xi, xj, yi, yj) = (self.grid[i], self.grid[j], self.values[i], self.values[j]);
        Ok((i..=j)
            .filter(|&m| {
                let t = (self.grid[m] - xi) / (xj - xi);
                self.values[m] >= yi + (yj - yi) * t - tol
            })
            .collect())
    }
}

pub fn concave_envelope<T: Scalar>(f: &SampledFunction<T>) -> EnvelopeSolution<T> {
    let hull = upper_hull(&f.grid, &f.values, hull_tol(&f.values));
    EnvelopeSolution {
        grid: f.grid.clone(),
        values: f.values.clone(),
        hull,
    }
}

/// Structural class of a garbling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GarblingKind {
    Degenerate,
    Binary,
    MultiPoint,
}

/// An optimal garbling together with the value it attains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarblingSolution<T> {
    pub distribution: DiscreteBeliefDistribution<T>,
    pub value: T,
    pub kind: GarblingKind,
}

impl<T: Scalar> GarblingSolution<T> {
    pub fn new(distribution: DiscreteBeliefDistribution<T>, value: T) -> Self {
        let kind = match distribution.len() {
            1 => GarblingKind::Degenerate,
            2 => GarblingKind::Binary,
            _ => GarblingKind::MultiPoint,
        };
        Self {
            distribution,
            value,
            kind,
        }
    }

    pub fn degenerate(prior: T, value: T) -> Self {
        Self::new(
            DiscreteBeliefDistribution::degenerate(prior).expect("prior inside [0,1]"),
            value,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.kind == GarblingKind::Degenerate
    }

    pub fn support(&self) -> &[T] {
        self.distribution.points()
    }
}

pub fn optimal_garbling<T: Scalar>(f: &SampledFunction<T>, prior: T) -> Result<GarblingSolution<T>> {
    let env = concave_envelope(f);
    let chord = env.chord_at(prior)?;
    Ok(GarblingSolution::new(chord.to_distribution()?, env.value_at(prior)?))
}

/// Value at `at` of the upper concave envelope of the points.
pub fn upper_envelope_at<T: Scalar>(xs: &[T], ys: &[T], at: T) -> Option<T> {
    if xs.is_empty() || at < xs[0] || at > xs[xs.len() - 1] {
        return None;
    }
    let hull = upper_hull(xs, ys, T::zero());
    let k = hull.partition_point(|&i| xs[i] < at);
    if k < hull.len() && xs[hull[k]] == at {
        return Some(ys[hull[k]]);
    }
    let (i, j) = (hull[k - 1], hull[k]);
    let t = (at - xs[i]) / (xs[j] - xs[i]);
    Some(ys[i] + (ys[j] - ys[i]) * t)
}

/// Value at `at` of the lower convex envelope of the points.
pub fn lower_envelope_at<T: Scalar>(xs: &[T], ys: &[T], at: T) -> Option<T> {
    let neg: Vec<T> = ys.iter().map(|&y| -y).collect();
    upper_envelope_at(xs, &neg, at).map(|v| -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64) -> SampledFunction<f64> {
        SampledFunction::from_fn(0.0, 1.0, 2001, &[], f).unwrap()
    }

    #[test]
    fn concave_function_is_its_own_envelope() {
        let f = sampled(|x| -(x - 0.5) * (x - 0.5));
        let env = concave_envelope(&f);
        assert_eq!(env.chord_at(0.5).unwrap(), Chord::Degenerate(0.5));
        assert_eq!(env.hull_indices().len(), f.grid().len());
        let g = optimal_garbling(&f, 0.5).unwrap();
        assert!(g.is_degenerate());
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn convex_function_gives_endpoint_chord() {
        let f = sampled(|x| (x - 0.5) * (x - 0.5));
        let env = concave_envelope(&f);
        assert_eq!(
            env.chord_at(0.5).unwrap(),
            Chord::Segment {
                lo: 0.0,
                hi: 1.0,
                weight_lo: 0.5
            }
        );
        assert!((env.value_at(0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn prior_outside_interval_is_rejected() {
        let f = SampledFunction::from_fn(0.2, 0.8, 11, &[], |x| x).unwrap();
        let env = concave_envelope(&f);
        assert!(env.chord_at(0.1).is_err());
        assert!(env.value_at(0.9).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        assert_eq!(
            SampledFunction::new(vec![0.0, 1.0], vec![0.0, f64::INFINITY]).unwrap_err(),
            Error::NonFinite(1)
        );
        assert!(SampledFunction::new(vec![0.0], vec![0.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn breakpoints_are_sampled_exactly() {
        let g = build_grid(0.0, 1.0, 5, &[0.3, 0.25, 1.5]).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
        let g = build_grid(0.0, 1.0, 3, &[0.5 + 1e-17]).unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn flat_stretch_keeps_extremes_only() {
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ys = [0.0, 0.25, 0.5, 0.75, 0.5];
        assert_eq!(upper_hull(&xs, &ys, 1e-12), vec![0, 3, 4]);
    }

    #[test]
    fn contact_set_on_flat_face() {
        let f = SampledFunction::new(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0], vec![0.0, 0.3, 0.4, 0.5, 0.6, 0.0])
            .unwrap();
        let env = concave_envelope(&f);
        assert_eq!(env.contact_set(0.5, 1e-12).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn envelope_of_points() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 1.0, 0.0];
        assert_eq!(upper_envelope_at(&xs, &ys, 0.25), Some(0.5));
        assert_eq!(lower_envelope_at(&xs, &ys, 0.25), Some(0.0));
        assert_eq!(upper_envelope_at(&xs, &ys, 1.5), None);
    }

    #[test]
    fn f32_envelope() {
        let f = SampledFunction::<f32>::from_fn(0.0, 1.0, 101, &[], |x| (x - 0.5) * (x - 0.5)).unwrap();
        let env = concave_envelope(&f);
        match env.chord_at(0.5).unwrap() {
            Chord::Segment { lo, hi, .. } => assert_eq!((lo, hi), (0.0, 1.0)),
            c => panic!("unexpected {c:?}"),
        }
    }
}
