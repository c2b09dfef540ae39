//! Variants of the baseline game: publicly observed experiments,
//! heterogeneous prior means, and experiment-dependent attention costs.

use serde::Serialize;

use crate::beliefs::{CostSchedule, DiscreteBeliefDistribution};
use crate::equilibrium::{
    check_profile, full_info_region, EquilibriumReport, Observation, SearchConfig, SearchOptions,
    Verdict,
};
use crate::error::{Error, Result};
use crate::receiver::{
    AdmissibleSet, ModelParams, SenderSide, SolverConfig, SupportPiece, TwoStageSolver,
};

type Belief = DiscreteBeliefDistribution<f64>;

/// Symmetric binary profile when the receiver observes both experiments
/// before choosing whom to visit first. Deviations may therefore shift the
/// visit order; the closed-form region is the same as without observation.
pub fn check_public(params: &ModelParams<f64>, cfg: &SearchConfig) -> Result<EquilibriumReport> {
    params.validate()?;
    let ModelParams { k, mu, l, h } = *params;
    let side = SenderSide::binary(l, h, mu, k)?;
    let opts = SearchOptions {
        observation: Observation::Public,
        ..SearchOptions::default()
    };
    let mut r = check_profile([side.clone(), side], cfg, &opts, Some(params.in_multiplicity_region()))?;
    let favorable = if r.margin_favorable > cfg.profit_threshold {
        Verdict::Refuted
    } else {
        Verdict::Equilibrium
    };
    r.notes.push(format!("with visit-order ties resolved for the deviator: {favorable}"));
    Ok(r)
}

/// Two senders offering full information about priors `mu1`, `mu2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeteroParams {
    pub mu1: f64,
    pub mu2: f64,
    /// Closed forms assume `k = 1`.
    pub k: f64,
}

impl HeteroParams {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        Self::with_k(mu1, mu2, 1.0)
    }

    pub fn with_k(mu1: f64, mu2: f64, k: f64) -> Result<Self> {
        for mu in [mu1, mu2] {
            if !(mu > 0.0 && mu < 1.0) {
                return Err(Error::InvalidParams(format!("prior mean {mu} must lie in (0, 1)")));
            }
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParams(format!("k = {k} must be positive")));
        }
        Ok(Self { mu1, mu2, k })
    }

    fn prior(&self, sender: usize) -> f64 {
        if sender == 0 {
            self.mu1
        } else {
            self.mu2
        }
    }

    fn require_unit_cost(&self) -> Result<()> {
        if self.k != 1.0 {
            return Err(Error::OutOfRegion(format!("closed forms assume k = 1, got k = {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeteroStage1 {
    /// 1 to 4.
    pub case: u8,
    /// Beliefs about the first-visited sender from which every
    /// Bayes-plausible garbling is optimal.
    pub admissible: AdmissibleSet<f64>,
}

/// Stage-1 solution set at the first-visited sender (prior `first`) when
/// the sender visited second has prior `second`, with `k = 1`.
pub fn lemma4_case(first: f64, second: f64) -> Option<HeteroStage1> {
    let (m1, m2) = (first, second);
    let eps = 1e-12;
    let within = |x: f64, lo: f64, hi: f64| x >= lo - eps && x <= hi + eps;
    let iv = |lo, hi| SupportPiece::Interval { lo, hi };
    let pt = |at| SupportPiece::Point { at };
    let (case, pieces) = if within(m2, 0.5, 0.75) && within(m1, m2 - 0.25, m2 + 0.25) {
        (1, vec![iv(m2 - 0.25, 0.75), pt(m2 + 0.25)])
    } else if within(m2, 0.75, 1.0) && within(m1, m2 - 0.25, 0.75) {
        (2, vec![iv(m2 - 0.25, 0.75)])
    } else if within(m2, 0.25, 0.5) && within(m1, m2 - 0.25, m2 + 0.25) {
        (3, vec![pt(m2 - 0.25), iv(0.25, m2 + 0.25)])
    } else if within(m2, 0.0, 0.25) && within(m1, 0.25, m2 + 0.25) {
        (4, vec![iv(0.25, m2 + 0.25)])
    } else {
        return None;
    };
    Some(HeteroStage1 {
        case,
        admissible: AdmissibleSet { pieces },
    })
}

/// Stage-1 solution set when sender `second_visited` (0 or 1) is visited
/// second.
pub fn hetero_stage1(hp: &HeteroParams, second_visited: usize) -> Result<HeteroStage1> {
    hp.require_unit_cost()?;
    let first = hp.prior(1 - second_visited);
    let second = hp.prior(second_visited);
    lemma4_case(first, second).ok_or_else(|| {
        Error::OutOfRegion(format!(
            "no stage-1 case applies with prior {first} visited first and {second} second"
        ))
    })
}

/// The receiver's expected payoff `μ₁² + μ₂² + (μ₁ + μ₂)/2 − 2μ₁μ₂ + 1/16`.
pub fn hetero_value(hp: &HeteroParams) -> Result<f64> {
    hp.require_unit_cost()?;
    if hetero_stage1(hp, 1).is_err() && hetero_stage1(hp, 0).is_err() {
        return Err(Error::OutOfRegion(format!(
            "no stage-1 case applies at μ₁ = {}, μ₂ = {}",
            hp.mu1, hp.mu2
        )));
    }
    let HeteroParams { mu1, mu2, .. } = *hp;
    Ok(mu1 * mu1 + mu2 * mu2 + (mu1 + mu2) / 2.0 - 2.0 * mu1 * mu2 + 1.0 / 16.0)
}

/// Whether a stage-1 case holds in one visit order exactly when it holds in
/// the other.
pub fn exchangeable(mu1: f64, mu2: f64) -> bool {
    lemma4_case(mu1, mu2).is_some() == lemma4_case(mu2, mu1).is_some()
}

/// Sufficient condition for a full-information equilibrium with
/// heterogeneous means: `|μ₂ − μ₁| ≤ 1/4` and either both means lie in
/// `[1/4, 3/4]`, or one is below 3/4 and the other above, or one is below
/// 1/4 and the other above.
pub fn hetero_region(mu1: f64, mu2: f64) -> bool {
    let eps = 1e-12;
    let (lo, hi) = (mu1.min(mu2), mu1.max(mu2));
    let mid = |x: f64| (0.25 - eps..=0.75 + eps).contains(&x);
    hi - lo <= 0.25 + eps
        && ((mid(lo) && mid(hi)) || (lo <= 0.75 + eps && hi >= 0.75 - eps) || (lo <= 0.25 + eps && hi >= 0.25 - eps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeteroReport {
    pub params: HeteroParams,
    pub report: EquilibriumReport,
    /// Receiver value with sender 1 first and with sender 2 first.
    pub order_values: [f64; 2],
    pub hetero_value: f64,
    pub exchangeable: bool,
    /// Largest deviation of the first-visited sender's selection
    /// probability from an affine function on the admissible intervals.
    pub affine_residual: f64,
}

fn affine_residual(xs: &[f64], ps: &[f64]) -> f64 {
    if xs.len() < 3 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let mp = ps.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxp: f64 = xs.iter().zip(ps).map(|(x, p)| (x - mx) * (p - mp)).sum();
    let slope = if sxx > 0.0 { sxp / sxx } else { 0.0 };
    xs.iter()
        .zip(ps)
        .map(|(x, p)| (p - mp - slope * (x - mx)).abs())
        .fold(0.0, f64::max)
}

/// Full information by both senders with priors `μ₁ ≠ μ₂` and `k = 1`.
/// Outside the sufficient region nothing is claimed and `OutOfRegion` is
/// returned; inside, the deviation search must confirm.
pub fn check_hetero_fullinfo(hp: &HeteroParams, cfg: &SearchConfig) -> Result<HeteroReport> {
    hp.require_unit_cost()?;
    if !hetero_region(hp.mu1, hp.mu2) {
        return Err(Error::OutOfRegion(format!(
            "no full-information equilibrium is characterized at μ₁ = {}, μ₂ = {}",
            hp.mu1, hp.mu2
        )));
    }
    let sides = [
        SenderSide::binary(0.0, 1.0, hp.mu1, hp.k)?,
        SenderSide::binary(0.0, 1.0, hp.mu2, hp.k)?,
    ];
    let solver = TwoStageSolver::new(
        sides.clone(),
        SolverConfig {
            grid_points: cfg.grid_points,
            order_tie: cfg.order_tie,
            posterior_tie: cfg.posterior_tie,
            ..SolverConfig::default()
        },
    )?;
    let plans = [solver.plan(0)?, solver.plan(1)?];
    let mut residual: f64 = 0.0;
    for first in 0..2 {
        let Ok(st) = hetero_stage1(hp, 1 - first) else {
            continue;
        };
        let table = solver.table(1 - first);
        for piece in &st.admissible.pieces {
            if let SupportPiece::Interval { lo, hi } = *piece {
                let (xs, ps): (Vec<f64>, Vec<f64>) = solver
                    .grid()
                    .iter()
                    .zip(table)
                    .filter(|(&x, _)| x >= lo && x <= hi)
                    .map(|(&x, e)| (x, e.p_first))
                    .unzip();
                residual = residual.max(affine_residual(&xs, &ps));
            }
        }
    }
    let mut report = check_profile(sides, cfg, &SearchOptions::default(), Some(true))?;
    for first in 0..2 {
        let Ok(st) = hetero_stage1(hp, 1 - first) else {
            continue;
        };
        if !st.admissible.contains(hp.prior(first), 1e-12) {
            report.notes.push(format!(
                "with sender {} first, learning nothing there is not optimal (its prior {} lies outside \
                 the stage-1 solution set), so a deviation there cannot be ignored",
                first + 1,
                hp.prior(first)
            ));
        }
    }
    Ok(HeteroReport {
        params: *hp,
        report,
        order_values: [plans[0].value, plans[1].value],
        hetero_value: hetero_value(hp)?,
        exchangeable: exchangeable(hp.mu1, hp.mu2),
        affine_residual: residual,
    })
}

/// Full information by both senders when the attention cost at a sender
/// depends on its experiment. The on-path coefficient is `k_F`, the one in
/// force at full information; a deviator faces the coefficient of its
/// deviation.
pub fn check_costvariant_fullinfo(
    mu: f64,
    schedule: &CostSchedule<f64>,
    cfg: &SearchConfig,
) -> Result<EquilibriumReport> {
    let full = Belief::binary(0.0, 1.0, mu)?;
    let k_f = schedule.coefficient(&full);
    if !full_info_region(k_f, mu) {
        return Err(Error::OutOfRegion(format!(
            "needs k_F > 1/2 and 1/(4k_F) ≤ μ ≤ 1 − 1/(4k_F); got k_F = {k_f}, μ = {mu}"
        )));
    }
    let side = SenderSide::binary(0.0, 1.0, mu, k_f)?;
    let opts = SearchOptions {
        cost: Some(schedule),
        ..SearchOptions::default()
    };
    check_profile([side.clone(), side], cfg, &opts, Some(true))
}
