//! Deviation search.
//!
//! A deviating sender replaces its experiment by `D`. With undetected
//! deviations the receiver keeps her visit order and her stage-1 plan at the
//! other sender; she only re-optimizes at the deviator once she visits it.
//! With public deviations she re-solves the whole problem, order included.

use rayon::prelude::*;
use serde::Serialize;

use super::{BranchOutcome, Deviation, ResponseTrace, SearchConfig, SecondVisitResponse};
use crate::beliefs::{CostSchedule, DiscreteBeliefDistribution};
use crate::error::Result;
use crate::receiver::{
    solve_stage2, stage1_with_table, FeasibleSet, ReceiverStrategy, SenderSide, SolverConfig,
    Stage1Outcome, Stage2Eval, StopRule, TwoStageSolver,
};

type Belief = DiscreteBeliefDistribution<f64>;

const ORDER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    /// The receiver learns of a deviation only when she visits the deviator.
    #[default]
    Undetected,
    /// Experiments are public: the receiver re-plans from scratch.
    Public,
}

/// A deviation to test: sender index (0 or 1) and experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub sender: usize,
    pub distribution: Belief,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions<'a> {
    pub observation: Observation,
    /// Experiment-dependent coefficient for the deviator; `None` keeps the
    /// deviator's on-path coefficient.
    pub cost: Option<&'a CostSchedule<f64>>,
    /// Explicit deviations; `None` searches binary deviations on the lattice
    /// extended by the on-path stage-1 beliefs.
    pub candidates: Option<Vec<Candidate>>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub strategy: ReceiverStrategy<f64>,
    pub margin: f64,
    pub margin_favorable: f64,
    /// Largest gain per sender.
    pub sender_margins: [f64; 2],
    pub best: Option<Deviation>,
    pub checked: usize,
}

/// Lattice `{0, step, 2·step, ..., 1}`.
pub(crate) fn lattice(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|i| (i as f64 * step).min(1.0)).collect()
}

/// `δ_μ` and every binary `{α, β}` on the lattice with `α < μ < β`.
pub fn binary_deviations(mu: f64, step: f64) -> Vec<Belief> {
    binary_deviations_on(mu, &lattice(step))
}

fn binary_deviations_on(mu: f64, pts: &[f64]) -> Vec<Belief> {
    let eps = 1e-12;
    let mut out = vec![Belief::degenerate(mu).expect("finite prior")];
    for &a in pts.iter().filter(|&&a| a < mu - eps) {
        for &b in pts.iter().filter(|&&b| b > mu + eps) {
            if let Ok(d) = Belief::binary(a, b, mu) {
                out.push(d);
            }
        }
    }
    out
}

/// Three-point experiments with mean `mu` on a coarse lattice; the middle
/// point receives a fraction of its largest feasible mass.
pub fn three_point_deviations(mu: f64, step: f64, fractions: &[f64]) -> Vec<Belief> {
    let pts = lattice(step);
    let eps = 1e-12;
    let mut out = Vec::new();
    for (i, &x1) in pts.iter().enumerate() {
        if x1 >= mu - eps {
            break;
        }
        for (j, &x2) in pts.iter().enumerate().skip(i + 1) {
            for &x3 in pts.iter().skip(j + 1) {
                if x3 <= mu + eps {
                    continue;
                }
                let cap = if x2 <= mu {
                    ((x3 - mu) / (x3 - x2)).min((mu - x1) / (x2 - x1))
                } else {
                    ((mu - x1) / (x2 - x1)).min((x3 - mu) / (x3 - x2))
                }
                .min(1.0);
                for &f in fractions {
                    let w2 = f * cap;
                    if !(w2 > 0.0 && w2 < 1.0) {
                        continue;
                    }
                    let m = (mu - w2 * x2) / (1.0 - w2);
                    if !(m > x1 && m < x3) {
                        continue;
                    }
                    let w1 = (1.0 - w2) * (x3 - m) / (x3 - x1);
                    let w3 = 1.0 - w2 - w1;
                    if let Ok(d) = Belief::new(vec![x1, x2, x3], vec![w1, w2, w3]) {
                        out.push(d);
                    }
                }
            }
        }
    }
    out
}

struct Ctx<'a> {
    solver: TwoStageSolver<f64>,
    strategy: ReceiverStrategy<f64>,
    cfg: &'a SearchConfig,
    opts: &'a SearchOptions<'a>,
}

#[derive(Debug, Clone, Copy)]
struct Gain {
    min: f64,
    max: f64,
}

impl Ctx<'_> {
    fn lambda(&self, d: usize) -> f64 {
        let l = self.strategy.first_visit_prob;
        if d == 0 {
            l
        } else {
            1.0 - l
        }
    }

    fn k_dev(&self, d: usize, dist: &Belief) -> f64 {
        self.opts
            .cost
            .map_or(self.solver.side(d).k, |c| c.coefficient(dist))
    }

    /// Deviator's stage-1 outcome when visited first, or `None` when it
    /// coincides with the on-path one.
    fn first_branch(&self, d: usize, dist: &Belief, feas: &FeasibleSet<f64>, k: f64) -> Option<Stage1Outcome<f64>> {
        let side = self.solver.side(d);
        let plan = &self.strategy.plans[d];
        let tol = 1e-12;
        if let ([(a, b)], [(lo, hi)]) = (feas.intervals(), side.feasible.intervals()) {
            let sup = plan.stage1.support();
            let (cmin, cmax) = (sup[0], sup[sup.len() - 1]);
            if k == side.k && *lo <= a + tol && *b <= hi + tol && *a <= cmin + tol && cmax <= b + tol {
                return None;
            }
        }
        Some(self.solver.stage1_against(feas, dist.mean(), k, 1 - d))
    }

    fn second_branch(&self, d: usize, dist: &Belief, feas: &FeasibleSet<f64>, k: f64) -> Vec<(f64, f64, Option<Stage2Eval<f64>>, f64)> {
        let plan = &self.strategy.plans[1 - d];
        plan.stage2
            .iter()
            .map(|dec| {
                let e = (dec.stop_rule == StopRule::Continue)
                    .then(|| solve_stage2(dec.belief, dist.mean(), k, feas, self.cfg.posterior_tie));
                (dec.belief, dec.weight, e, 1.0 - dec.first_selected)
            })
            .collect()
    }

    fn undetected(&self, d: usize, dist: &Belief) -> (Gain, ResponseParts) {
        let k = self.k_dev(d, dist);
        let feas = FeasibleSet::of(dist, self.cfg.deviation_step);
        let plan = &self.strategy.plans[d];
        let first = self.first_branch(d, dist, &feas, k);
        let (a_min, a_max) = first.map_or((plan.first_selected_min, plan.first_selected_max), |o| {
            (o.first_selected_min, o.first_selected_max)
        });
        let second = self.second_branch(d, dist, &feas, k);
        let (mut b_min, mut b_max) = (0.0, 0.0);
        for &(_, w, e, on_path) in &second {
            let (lo, hi) = e.map_or((on_path, on_path), |e| (1.0 - e.p_first_max, 1.0 - e.p_first_min));
            b_min += w * lo;
            b_max += w * hi;
        }
        let lam = self.lambda(d);
        let u = self.strategy.sender_payoffs[d];
        let gain = Gain {
            min: lam * a_min + (1.0 - lam) * b_min - u,
            max: lam * a_max + (1.0 - lam) * b_max - u,
        };
        let parts = ResponseParts {
            visited_first_prob: lam,
            first: BranchOutcome {
                selection: a_min,
                selection_favorable: a_max,
                on_path: plan.first_selected,
            },
            second_branch: BranchOutcome {
                selection: b_min,
                selection_favorable: b_max,
                on_path: 1.0 - self.strategy.plans[1 - d].first_selected,
            },
            first_outcome: first,
            second,
        };
        (gain, parts)
    }

    fn public(&self, d: usize, dist: &Belief) -> (Gain, ResponseParts) {
        let o = 1 - d;
        let k = self.k_dev(d, dist);
        let feas = FeasibleSet::of(dist, self.cfg.deviation_step);
        let mu = dist.mean();
        let out_a = self.solver.stage1_against(&feas, mu, k, o);
        let grid = self.solver.grid();
        let table: Vec<Stage2Eval<f64>> = grid
            .iter()
            .map(|&x| solve_stage2(x, mu, k, &feas, self.cfg.posterior_tie))
            .collect();
        let so = self.solver.side(o);
        let out_b = stage1_with_table(grid, &table, &so.feasible, so.prior, so.k);

        let a = (out_a.first_selected_min, out_a.first_selected_max);
        let b = (1.0 - out_b.first_selected_max, 1.0 - out_b.first_selected_min);
        let (sel, lam) = if out_a.value > out_b.value + ORDER_TOL {
            (a, 1.0)
        } else if out_b.value > out_a.value + ORDER_TOL {
            (b, 0.0)
        } else {
            ((a.0.min(b.0), a.1.max(b.1)), 0.5)
        };
        let u = self.strategy.sender_payoffs[d];
        let on_path_first = self.strategy.plans[d].first_selected;
        let gain = Gain {
            min: sel.0 - u,
            max: sel.1 - u,
        };
        let mut second = Vec::new();
        for (i, w) in chord_points(&out_b) {
            let e = table[i];
            let visits = e.learns();
            second.push((grid[i], w, visits.then_some(e), 1.0 - e.p_first));
        }
        let parts = ResponseParts {
            visited_first_prob: lam,
            first: BranchOutcome {
                selection: a.0,
                selection_favorable: a.1,
                on_path: on_path_first,
            },
            second_branch: BranchOutcome {
                selection: b.0,
                selection_favorable: b.1,
                on_path: 1.0 - self.strategy.plans[o].first_selected,
            },
            first_outcome: Some(out_a),
            second,
        };
        (gain, parts)
    }

    fn evaluate(&self, d: usize, dist: &Belief) -> (Gain, ResponseParts) {
        match self.opts.observation {
            Observation::Undetected => self.undetected(d, dist),
            Observation::Public => self.public(d, dist),
        }
    }

    fn trace(&self, d: usize, dist: &Belief) -> Result<ResponseTrace> {
        let (_, parts) = self.evaluate(d, dist);
        let grid = self.solver.grid();
        let first_stage_garbling = match parts.first_outcome {
            None => self.strategy.plans[d].stage1.distribution.clone(),
            Some(o) => chord_distribution(grid, &o)?,
        };
        let mu = dist.mean();
        let second_visit = parts
            .second
            .iter()
            .map(|&(belief, weight, e, _)| {
                Ok(SecondVisitResponse {
                    belief,
                    weight,
                    visits: e.is_some(),
                    garbling: match e {
                        Some(e) => Some(e.to_solution(mu)?.distribution),
                        None => None,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResponseTrace {
            visited_first_prob: parts.visited_first_prob,
            first: parts.first,
            second: parts.second_branch,
            first_stage_garbling,
            second_visit,
        })
    }
}

struct ResponseParts {
    visited_first_prob: f64,
    first: BranchOutcome,
    second_branch: BranchOutcome,
    first_outcome: Option<Stage1Outcome<f64>>,
    /// `(belief, weight, stage-2 evaluation when the deviator is visited,
    /// deviator selection otherwise)`.
    second: Vec<(f64, f64, Option<Stage2Eval<f64>>, f64)>,
}

fn chord_points(o: &Stage1Outcome<f64>) -> Vec<(usize, f64)> {
    if o.lo == o.hi {
        vec![(o.lo, 1.0)]
    } else {
        vec![(o.lo, o.weight_lo), (o.hi, 1.0 - o.weight_lo)]
    }
}

fn chord_distribution(grid: &[f64], o: &Stage1Outcome<f64>) -> Result<Belief> {
    let pts = chord_points(o);
    Belief::new(
        pts.iter().map(|&(i, _)| grid[i]).collect(),
        pts.iter().map(|&(_, w)| w).collect(),
    )
}

fn symmetric(sides: &[SenderSide<f64>; 2], lambda: f64) -> bool {
    lambda == 0.5
        && sides[0].k == sides[1].k
        && sides[0].experiment.approx_eq(&sides[1].experiment, 1e-12)
}

/// Solves the on-path problem and searches deviations by both senders.
///
/// The lattice of binary deviations is added to the belief grid so that
/// deviation supports are represented exactly.
pub fn deviation_search(
    sides: [SenderSide<f64>; 2],
    cfg: &SearchConfig,
    opts: &SearchOptions<'_>,
) -> Result<SearchOutcome> {
    let mut bps = lattice(cfg.deviation_step);
    if let Some(cands) = &opts.candidates {
        for c in cands {
            bps.extend_from_slice(c.distribution.points());
        }
    }
    let solver_cfg = SolverConfig {
        grid_points: cfg.grid_points,
        order_tie: cfg.order_tie,
        posterior_tie: cfg.posterior_tie,
        lattice_step: cfg.deviation_step,
        extra_breakpoints: bps,
    };
    let solver = TwoStageSolver::new(sides, solver_cfg)?;
    let strategy = solver.solve()?;

    let candidates: Vec<Candidate> = match &opts.candidates {
        Some(c) => c.clone(),
        None => {
            let both = [solver.side(0).clone(), solver.side(1).clone()];
            let senders: &[usize] = if symmetric(&both, strategy.first_visit_prob) {
                &[0]
            } else {
                &[0, 1]
            };
            // on-path stage-1 beliefs are where a deviation can make the
            // receiver just indifferent about learning
            let mut pts = lattice(cfg.deviation_step);
            for plan in &strategy.plans {
                pts.extend_from_slice(plan.stage1.support());
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            senders
                .iter()
                .flat_map(|&d| {
                    binary_deviations_on(both[d].prior, &pts)
                        .into_iter()
                        .map(move |distribution| Candidate { sender: d, distribution })
                })
                .collect()
        }
    };
    let mirrored = opts.candidates.is_none() && candidates.iter().all(|c| c.sender == 0);

    let ctx = Ctx {
        solver,
        strategy,
        cfg,
        opts,
    };
    let eval = |c: &Candidate| ctx.evaluate(c.sender, &c.distribution).0;
    let gains: Vec<Gain> = if cfg.parallel {
        candidates.par_iter().map(eval).collect()
    } else {
        candidates.iter().map(eval).collect()
    };

    let mut best: Option<usize> = None;
    let mut margin = f64::NEG_INFINITY;
    let mut margin_favorable = f64::NEG_INFINITY;
    let mut sender_margins = [f64::NEG_INFINITY; 2];
    for (i, g) in gains.iter().enumerate() {
        let d = candidates[i].sender;
        sender_margins[d] = sender_margins[d].max(g.min);
        margin_favorable = margin_favorable.max(g.max);
        if g.min > margin {
            margin = g.min;
            best = Some(i);
        }
    }
    if mirrored {
        sender_margins[1] = sender_margins[0];
    }
    let best = match best {
        Some(i) => {
            let c = &candidates[i];
            Some(Deviation {
                sender: c.sender + 1,
                distribution: c.distribution.clone(),
                gain: gains[i].min,
                gain_favorable: gains[i].max,
                trace: Some(ctx.trace(c.sender, &c.distribution)?),
            })
        }
        None => None,
    };
    Ok(SearchOutcome {
        strategy: ctx.strategy,
        margin,
        margin_favorable,
        sender_margins,
        best,
        checked: gains.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(mu: f64, k: f64) -> [SenderSide<f64>; 2] {
        let s = SenderSide::binary(0.0, 1.0, mu, k).unwrap();
        [s.clone(), s]
    }

    #[test]
    fn lattice_deviations_have_the_prior_mean() {
        let ds = binary_deviations(0.3, 0.05);
        assert_eq!(ds.len(), 1 + 6 * 14);
        assert_eq!(binary_deviations_on(0.3, &[0.0, 0.3, 1.0]).len(), 2);
        assert!(ds.iter().all(|d| (d.mean() - 0.3).abs() < 1e-12));
        let ts = three_point_deviations(0.5, 0.1, &[0.5]);
        assert!(!ts.is_empty());
        assert!(ts.iter().all(|d| d.len() == 3 && (d.mean() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn full_info_inside_region_has_no_profitable_deviation() {
        let cfg = SearchConfig {
            deviation_step: 0.01,
            ..SearchConfig::default()
        };
        let out = deviation_search(full(0.5, 1.0), &cfg, &SearchOptions::default()).unwrap();
        assert!(out.margin.abs() < 1e-6, "{}", out.margin);
        assert!((out.strategy.sender_payoffs[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn low_prior_is_refuted() {
        let cfg = SearchConfig {
            deviation_step: 0.01,
            ..SearchConfig::default()
        };
        let out = deviation_search(full(0.1, 1.0), &cfg, &SearchOptions::default()).unwrap();
        assert!(out.margin > 1e-3, "{}", out.margin);
        let dev = out.best.unwrap();
        assert!(dev.trace.is_some());
        assert!(dev.gain <= dev.gain_favorable + 1e-12);
    }

    #[test]
    fn public_deviations() {
        let cfg = SearchConfig {
            deviation_step: 0.02,
            ..SearchConfig::default()
        };
        let opts = SearchOptions {
            observation: Observation::Public,
            ..SearchOptions::default()
        };
        let out = deviation_search(full(0.5, 1.0), &cfg, &opts).unwrap();
        assert!(out.margin < 1e-6, "{}", out.margin);
        let out = deviation_search(full(0.1, 1.0), &cfg, &opts).unwrap();
        assert!(out.margin > 1e-3, "{}", out.margin);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut cfg = SearchConfig {
            deviation_step: 0.02,
            ..SearchConfig::default()
        };
        let a = deviation_search(full(0.2, 1.0), &cfg, &SearchOptions::default()).unwrap();
        cfg.parallel = false;
        let b = deviation_search(full(0.2, 1.0), &cfg, &SearchOptions::default()).unwrap();
        assert_eq!(a.margin, b.margin);
        assert_eq!(a.best, b.best);
    }
}
