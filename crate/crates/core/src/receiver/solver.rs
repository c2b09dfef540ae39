//! The full two-stage best response against arbitrary sender experiments.

use serde::Serialize;

use super::stage2::{solve_stage2_interval, stage2_kinks, PosteriorTie, Stage2Choice, Stage2Eval};
use super::ModelParams;
use crate::beliefs::{DiscreteBeliefDistribution, IntegratedCdf};
use crate::concavify::{
    build_grid, lower_envelope_at, upper_envelope_at, upper_hull, GarblingSolution,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the receiver orders her visits when both orders are optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Visit each sender first with probability 1/2.
    #[default]
    Fair,
    Sender1,
    Sender2,
}

impl TieRule {
    /// Probability that sender 1 is visited first.
    pub fn first_visit_prob<T: Scalar>(self) -> T {
        match self {
            TieRule::Fair => T::lit(0.5),
            TieRule::Sender1 => T::one(),
            TieRule::Sender2 => T::zero(),
        }
    }
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fair" => Ok(TieRule::Fair),
            "sender1" => Ok(TieRule::Sender1),
            "sender2" => Ok(TieRule::Sender2),
            _ => Err(Error::Parse(format!(
                "unknown tie rule `{s}` (expected fair, sender1 or sender2)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub grid_points: usize,
    pub order_tie: TieRule,
    pub posterior_tie: PosteriorTie,
    /// Lattice used to describe the garblings of non-binary experiments.
    pub lattice_step: T,
    /// Additional beliefs that must lie exactly on the stage-1 grid.
    pub extra_breakpoints: Vec<T>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            order_tie: TieRule::Fair,
            posterior_tie: PosteriorTie::FirstVisited,
            lattice_step: T::lit(0.005),
            extra_breakpoints: Vec::new(),
        }
    }
}

/// Binary garblings available at a sender: a binary distribution with the
/// sender's mean is a garbling iff its support lies inside one of the
/// intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn interval(lo: T, hi: T) -> Self {
        Self {
            intervals: vec![(lo, hi)],
        }
    }

    /// For binary or degenerate experiments this is exact. Otherwise the
    /// lower endpoints are restricted to a lattice plus the support points,
    /// and each upper endpoint is found by bisection.
    pub fn of(p: &DiscreteBeliefDistribution<T>, lattice_step: T) -> Self {
        Self::with_starts(p, lattice_step, &[])
    }

    /// Like [`FeasibleSet::of`], with additional lower endpoints `extra`.
    pub fn with_starts(p: &DiscreteBeliefDistribution<T>, lattice_step: T, extra: &[T]) -> Self {
        if p.len() <= 2 {
            return Self::interval(p.min_point(), p.max_point());
        }
        let mu = p.mean();
        let j = IntegratedCdf::new(p);
        let tol = T::lit(1e-9).max(T::rounding_tol());
        let (lo, hi) = (p.min_point(), p.max_point());

        let mut starts: Vec<T> = p.points().iter().copied().filter(|&x| x < mu).collect();
        let n = ((mu - lo) / lattice_step).floor().to_usize().unwrap_or(0);
        starts.extend((0..=n).map(|i| lo + lattice_step * T::lit(i as f64)).filter(|&a| a < mu));
        starts.extend(extra.iter().copied().filter(|&a| a >= lo && a < mu));
        starts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        starts.dedup();

        let mut intervals: Vec<(T, T)> = Vec::new();
        for a in starts {
            let b = if j.admits_binary(a, hi, mu, tol) {
                hi
            } else {
                let (mut ok, mut bad) = (mu, hi);
                for _ in 0..60 {
                    let mid = (ok + bad) / T::lit(2.0);
                    if j.admits_binary(a, mid, mu, tol) {
                        ok = mid;
                    } else {
                        bad = mid;
                    }
                }
                ok
            };
            if b <= mu {
                continue;
            }
            match intervals.last() {
                Some(&(_, pb)) if b <= pb => {}
                _ => intervals.push((a, b)),
            }
        }
        if intervals.is_empty() {
            intervals.push((mu, mu));
        }
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    /// Whether the binary `{a, b}` lies inside some interval.
    pub fn contains(&self, a: T, b: T) -> bool {
        let tol = T::rounding_tol();
        self.intervals.iter().any(|&(lo, hi)| a >= lo - tol && b <= hi + tol)
    }
}

/// One sender as seen by the receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SenderSide<T> {
    pub experiment: DiscreteBeliefDistribution<T>,
    pub prior: T,
    /// Attention-cost coefficient at this sender.
    pub k: T,
    #[serde(skip)]
    pub feasible: FeasibleSet<T>,
}

impl<T: Scalar> SenderSide<T> {
    pub fn new(experiment: DiscreteBeliefDistribution<T>, k: T, lattice_step: T) -> Result<Self> {
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::InvalidParams(format!("k = {k} must be positive")));
        }
        // stage-1 supports end at these beliefs, so they must start intervals
        let mu = experiment.mean();
        let mut kinks = Vec::new();
        for (l, h) in [(T::zero(), T::one()), (experiment.min_point(), experiment.max_point())] {
            if l < mu && mu < h {
                kinks.extend(stage2_kinks(&ModelParams { k, mu, l, h }));
            }
        }
        let feasible = FeasibleSet::with_starts(&experiment, lattice_step, &kinks);
        Ok(Self {
            prior: experiment.mean(),
            experiment,
            k,
            feasible,
        })
    }

    /// Binary experiment on `{lo, hi}` with mean `mu`.
    pub fn binary(lo: T, hi: T, mu: T, k: T) -> Result<Self> {
        Self::new(DiscreteBeliefDistribution::binary(lo, hi, mu)?, k, T::lit(0.005))
    }
}

/// Stage-2 optimum at belief `x` when the second sender's garblings are
/// described by `feasible`.
pub fn solve_stage2<T: Scalar>(
    x: T,
    mu: T,
    k: T,
    feasible: &FeasibleSet<T>,
    tie: PosteriorTie,
) -> Stage2Eval<T> {
    let mut best: Option<Stage2Eval<T>> = None;
    let tol = T::rounding_tol();
    for &(lo, hi) in feasible.intervals() {
        let e = solve_stage2_interval(x, mu, k, lo, hi, tie);
        best = Some(match best {
            None => e,
            Some(b) if e.value > b.value + tol => Stage2Eval {
                p_first_min: e.p_first_min,
                p_first_max: e.p_first_max,
                ..e
            },
            Some(b) if b.value > e.value + tol => b,
            Some(b) => Stage2Eval {
                p_first_min: b.p_first_min.min(e.p_first_min),
                p_first_max: b.p_first_max.max(e.p_first_max),
                ..b
            },
        });
    }
    best.expect("feasible set is never empty")
}

/// Optimal stage-1 behaviour on one grid range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Outcome<T> {
    pub value: T,
    /// Grid indices of the most informative optimal garbling (equal when it
    /// is degenerate).
    pub lo: usize,
    pub hi: usize,
    pub weight_lo: T,
    /// Selection probability of the first sender under the chosen plan.
    pub first_selected: T,
    /// Range of that probability over every optimal plan.
    pub first_selected_min: T,
    pub first_selected_max: T,
}

/// Concavifies `u1` on `xs` at `prior` and evaluates the first sender's
/// selection probability over the optimal set. `p`, `pmin`, `pmax` are the
/// stage-2 selection probabilities at each grid belief.
pub fn stage1_outcome<T: Scalar>(
    xs: &[T],
    u1: &[T],
    p: &[T],
    pmin: &[T],
    pmax: &[T],
    prior: T,
) -> Stage1Outcome<T> {
    let scale = u1.iter().fold(T::one(), |m, y| m.max(y.abs()));
    let tol = T::rounding_tol() * scale;
    let hull = upper_hull(xs, u1, tol);
    let k = hull.partition_point(|&i| xs[i] < prior);
    let degenerate = |i: usize| Stage1Outcome {
        value: u1[i],
        lo: i,
        hi: i,
        weight_lo: T::one(),
        first_selected: p[i],
        first_selected_min: pmin[i],
        first_selected_max: pmax[i],
    };
    if k == hull.len() {
        return degenerate(hull[k - 1]);
    }
    let j = hull[k];
    if xs[j] <= prior || k == 0 {
        return degenerate(j);
    }
    let i = hull[k - 1];
    let (xi, xj, yi, yj) = (xs[i], xs[j], u1[i], u1[j]);
    let w = (xj - prior) / (xj - xi);
    let value = w * yi + (T::one() - w) * yj;

    let contact: Vec<usize> = (i..=j)
        .filter(|&m| {
            let t = (xs[m] - xi) / (xj - xi);
            u1[m] >= yi + (yj - yi) * t - tol
        })
        .collect();
    let cx: Vec<T> = contact.iter().map(|&m| xs[m]).collect();
    let cmin: Vec<T> = contact.iter().map(|&m| pmin[m]).collect();
    let cmax: Vec<T> = contact.iter().map(|&m| pmax[m]).collect();
    let first_selected = w * p[i] + (T::one() - w) * p[j];
    Stage1Outcome {
        value,
        lo: i,
        hi: j,
        weight_lo: w,
        first_selected,
        first_selected_min: lower_envelope_at(&cx, &cmin, prior).unwrap_or(first_selected),
        first_selected_max: upper_envelope_at(&cx, &cmax, prior).unwrap_or(first_selected),
    }
}

/// Grid index range `[start, end)` of beliefs inside `[a, b]`.
pub fn grid_range<T: Scalar>(xs: &[T], a: T, b: T) -> (usize, usize) {
    let tol = T::epsilon() * T::lit(64.0);
    let start = xs.partition_point(|&x| x < a - tol);
    let end = xs.partition_point(|&x| x <= b + tol);
    (start, end.max(start))
}

/// What happens after a stage-1 belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    SelectVisited,
    SelectOther,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2Decision<T> {
    pub belief: T,
    pub weight: T,
    pub stop_rule: StopRule,
    pub garbling: GarblingSolution<T>,
    /// Probability the first-visited sender ends up selected.
    pub first_selected: T,
}

/// The receiver's plan for one visit order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStagePlan<T> {
    /// Sender visited first (0 or 1).
    pub first: usize,
    pub value: T,
    pub gross: T,
    pub stage1_cost: T,
    pub stage2_cost: T,
    pub stage1: GarblingSolution<T>,
    pub stage2: Vec<Stage2Decision<T>>,
    pub first_selected: T,
    pub first_selected_min: T,
    pub first_selected_max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverStrategy<T> {
    /// Probability that sender 1 is visited first.
    pub first_visit_prob: T,
    pub value: T,
    /// `plans[i]` visits sender `i` first.
    pub plans: Vec<TwoStagePlan<T>>,
    /// Probability that each sender is selected.
    pub sender_payoffs: [T; 2],
}

impl<T: Scalar> ReceiverStrategy<T> {
    /// The plan used with the larger probability (sender 1 first on a tie).
    pub fn primary_plan(&self) -> &TwoStagePlan<T> {
        if self.first_visit_prob >= T::lit(0.5) {
            &self.plans[0]
        } else {
            &self.plans[1]
        }
    }
}

/// Precomputed stage-2 tables for a pair of senders on a shared belief grid.
#[derive(Debug, Clone)]
pub struct TwoStageSolver<T> {
    sides: [SenderSide<T>; 2],
    config: SolverConfig<T>,
    grid: Vec<T>,
    tables: [Vec<Stage2Eval<T>>; 2],
}

impl<T: Scalar> TwoStageSolver<T> {
    pub fn new(sides: [SenderSide<T>; 2], config: SolverConfig<T>) -> Result<Self> {
        let mut bps = config.extra_breakpoints.clone();
        for s in &sides {
            bps.push(s.prior);
            for &(lo, hi) in s.feasible.intervals() {
                bps.extend([lo, hi]);
                if lo < s.prior && s.prior < hi {
                    if let Ok(p) = ModelParams::new(s.k, s.prior, lo, hi) {
                        bps.extend(stage2_kinks(&p));
                    }
                }
            }
        }
        let grid = build_grid(T::zero(), T::one(), config.grid_points, &bps)?;
        let tables = [0, 1].map(|s| Self::table_for(&grid, &sides[s], config.posterior_tie));
        Ok(Self {
            sides,
            config,
            grid,
            tables,
        })
    }

    fn table_for(grid: &[T], side: &SenderSide<T>, tie: PosteriorTie) -> Vec<Stage2Eval<T>> {
        grid.iter()
            .map(|&x| solve_stage2(x, side.prior, side.k, &side.feasible, tie))
            .collect()
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn side(&self, i: usize) -> &SenderSide<T> {
        &self.sides[i]
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    /// Stage-2 evaluations on the grid when sender `second` is visited second.
    pub fn table(&self, second: usize) -> &[Stage2Eval<T>] {
        &self.tables[second]
    }

    /// Best stage-1 outcome at a first sender with garblings `feasible`,
    /// prior `prior` and coefficient `k`, against the tabulated sender
    /// `second`.
    pub fn stage1_against(&self, feasible: &FeasibleSet<T>, prior: T, k: T, second: usize) -> Stage1Outcome<T> {
        stage1_with_table(&self.grid, &self.tables[second], feasible, prior, k)
    }

    pub fn plan(&self, first: usize) -> Result<TwoStagePlan<T>> {
        let second = 1 - first;
        let f = &self.sides[first];
        let s = &self.sides[second];
        let out = self.stage1_against(&f.feasible, f.prior, f.k, second);
        let table = &self.tables[second];
        let points: Vec<(usize, T)> = if out.lo == out.hi {
            vec![(out.lo, T::one())]
        } else {
            vec![(out.lo, out.weight_lo), (out.hi, T::one() - out.weight_lo)]
        };
        let mut stage2 = Vec::with_capacity(points.len());
        let (mut gross, mut c1, mut c2) = (T::zero(), T::zero(), T::zero());
        for &(i, w) in &points {
            let x = self.grid[i];
            let e = table[i];
            let cost2 = e.cost(s.prior, s.k);
            gross = gross + w * (e.value + cost2);
            c2 = c2 + w * cost2;
            c1 = c1 + w * f.k * (x - f.prior) * (x - f.prior);
            let stop_rule = match e.choice {
                Stage2Choice::Learn { .. } => StopRule::Continue,
                Stage2Choice::Stay if e.p_first > T::lit(0.5) => StopRule::SelectVisited,
                Stage2Choice::Stay => StopRule::SelectOther,
            };
            stage2.push(Stage2Decision {
                belief: x,
                weight: w,
                stop_rule,
                garbling: e.to_solution(s.prior)?,
                first_selected: e.p_first,
            });
        }
        let stage1_dist = if points.len() == 1 {
            DiscreteBeliefDistribution::degenerate(self.grid[out.lo])?
        } else {
            DiscreteBeliefDistribution::new(
                vec![self.grid[out.lo], self.grid[out.hi]],
                vec![out.weight_lo, T::one() - out.weight_lo],
            )?
        };
        Ok(TwoStagePlan {
            first,
            value: out.value,
            gross,
            stage1_cost: c1,
            stage2_cost: c2,
            stage1: GarblingSolution::new(stage1_dist, out.value),
            stage2,
            first_selected: out.first_selected,
            first_selected_min: out.first_selected_min,
            first_selected_max: out.first_selected_max,
        })
    }

    pub fn solve(&self) -> Result<ReceiverStrategy<T>> {
        let plans = vec![self.plan(0)?, self.plan(1)?];
        let tol = T::lit(1e-9).max(T::rounding_tol());
        let lambda = if (plans[0].value - plans[1].value).abs() <= tol {
            self.config.order_tie.first_visit_prob()
        } else if plans[0].value > plans[1].value {
            T::one()
        } else {
            T::zero()
        };
        let value = plans[0].value.max(plans[1].value);
        let u1 = lambda * plans[0].first_selected
            + (T::one() - lambda) * (T::one() - plans[1].first_selected);
        Ok(ReceiverStrategy {
            first_visit_prob: lambda,
            value,
            sender_payoffs: [u1, T::one() - u1],
            plans,
        })
    }
}

/// [`TwoStageSolver::stage1_against`] with an explicit stage-2 table.
pub fn stage1_with_table<T: Scalar>(
    grid: &[T],
    table: &[Stage2Eval<T>],
    feasible: &FeasibleSet<T>,
    prior: T,
    k: T,
) -> Stage1Outcome<T> {
    let mut best: Option<Stage1Outcome<T>> = None;
    for &(a, b) in feasible.intervals() {
        let (s, e) = grid_range(grid, a, b);
        if s >= e {
            continue;
        }
        let xs = &grid[s..e];
        let near = T::epsilon() * T::lit(64.0);
        if prior < xs[0] - near || prior > xs[xs.len() - 1] + near {
            continue;
        }
        let prior = prior.max(xs[0]).min(xs[xs.len() - 1]);
        let t = &table[s..e];
        let u1: Vec<T> = xs
            .iter()
            .zip(t)
            .map(|(&x, ev)| ev.value - k * (x - prior) * (x - prior))
            .collect();
        let p: Vec<T> = t.iter().map(|ev| ev.p_first).collect();
        let pmin: Vec<T> = t.iter().map(|ev| ev.p_first_min).collect();
        let pmax: Vec<T> = t.iter().map(|ev| ev.p_first_max).collect();
        let mut o = stage1_outcome(xs, &u1, &p, &pmin, &pmax, prior);
        o.lo += s;
        o.hi += s;
        let tol = T::rounding_tol();
        best = Some(match best {
            None => o,
            Some(b) if o.value > b.value + tol => o,
            Some(b) if b.value > o.value + tol => b,
            Some(b) => Stage1Outcome {
                first_selected_min: b.first_selected_min.min(o.first_selected_min),
                first_selected_max: b.first_selected_max.max(o.first_selected_max),
                ..b
            },
        });
    }
    best.expect("prior lies inside some feasible interval")
}

/// Best response to experiments `p1`, `p2` that share the prior
/// `params.mu`, with constant coefficient `params.k`.
pub fn best_response<T: Scalar>(
    p1: &DiscreteBeliefDistribution<T>,
    p2: &DiscreteBeliefDistribution<T>,
    params: &ModelParams<T>,
    config: SolverConfig<T>,
) -> Result<ReceiverStrategy<T>> {
    let tol = T::lit(1e-9).max(T::rounding_tol());
    for p in [p1, p2] {
        p.check_bayes_plausible(params.mu, tol)?;
    }
    let sides = [
        SenderSide::new(p1.clone(), params.k, config.lattice_step)?,
        SenderSide::new(p2.clone(), params.k, config.lattice_step)?,
    ];
    TwoStageSolver::new(sides, config)?.solve()
}
