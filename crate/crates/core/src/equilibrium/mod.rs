//! Equilibrium verification for the two-sender game: on-path accounting,
//! binary deviation search, closed-form regions and the benchmarks.

mod checks;
mod kzero;
mod search;
mod single;

pub use checks::{
    check_binary_symmetric, check_full_info, check_outcome_equivalent, check_profile,
    first_visit_value, first_visit_value_numeric, full_info_region, region_sweep,
    selection_probability, RegionCell,
};
pub use kzero::{
    kzero_atom_check, kzero_fullinfo_deviation, kzero_fullinfo_refute, kzero_payoff,
    kzero_uniform_check, FullInfoRefutation, KZeroOpponent, KZeroReport,
};
pub use search::{
    binary_deviations, deviation_search, three_point_deviations, Candidate, Observation,
    SearchOptions, SearchOutcome,
};
pub use single::{single_sender_acceptance, single_sender_solve, SingleSenderParams, SingleSenderResult};

use serde::Serialize;

use crate::beliefs::DiscreteBeliefDistribution;
use crate::receiver::{PosteriorTie, TieRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equilibrium,
    Refuted,
    /// The numeric search and the closed form disagree, or the closed form
    /// says nothing and the search found no profitable deviation.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Equilibrium => "equilibrium",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Knobs of the deviation search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub grid_points: usize,
    pub deviation_step: f64,
    pub profit_threshold: f64,
    pub order_tie: TieRule,
    pub posterior_tie: PosteriorTie,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            deviation_step: 0.005,
            profit_threshold: 1e-4,
            order_tie: TieRule::Fair,
            posterior_tie: PosteriorTie::FirstVisited,
            parallel: true,
        }
    }
}

/// Selection probabilities of a deviator in one visit-order branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchOutcome {
    /// Under the receiver best response least favourable to the deviator.
    pub selection: f64,
    /// Under the best response most favourable to the deviator.
    pub selection_favorable: f64,
    pub on_path: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondVisitResponse {
    /// Stage-1 belief about the sender visited first.
    pub belief: f64,
    pub weight: f64,
    /// Whether the receiver reaches the deviator at all.
    pub visits: bool,
    pub garbling: Option<DiscreteBeliefDistribution<f64>>,
}

/// How the receiver reacts to a deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseTrace {
    /// Probability the deviator is visited first.
    pub visited_first_prob: f64,
    pub first: BranchOutcome,
    pub second: BranchOutcome,
    /// Stage-1 garbling chosen at the deviator when visited first.
    pub first_stage_garbling: DiscreteBeliefDistribution<f64>,
    pub second_visit: Vec<SecondVisitResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    /// 1-based sender id.
    pub sender: usize,
    pub distribution: DiscreteBeliefDistribution<f64>,
    /// Payoff gain under the neutralizing best response.
    pub gain: f64,
    /// Payoff gain under the deviator-favourable best response.
    pub gain_favorable: f64,
    pub trace: Option<ResponseTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub verdict: Verdict,
    pub on_path_sender_payoffs: [f64; 2],
    pub receiver_value: f64,
    pub first_visit_prob: f64,
    pub best_deviation: Option<Deviation>,
    /// Largest gain over all searched deviations.
    pub margin: f64,
    /// Same, when off-path ties are resolved in the deviator's favour.
    pub margin_favorable: f64,
    pub deviations_checked: usize,
    /// Verdict implied by the closed-form region, when one applies.
    pub closed_form: Option<bool>,
    /// Receiver value when both senders offer full information, for
    /// comparison with `receiver_value`.
    pub full_info_value: Option<f64>,
    pub notes: Vec<String>,
}

impl EquilibriumReport {
    pub fn is_equilibrium(&self) -> bool {
        self.verdict == Verdict::Equilibrium
    }
}

/// Combines the numeric margin with a closed-form indicator.
pub(crate) fn decide(margin: f64, threshold: f64, closed_form: Option<bool>) -> Verdict {
    let numeric_eq = margin <= threshold;
    match closed_form {
        Some(true) if numeric_eq => Verdict::Equilibrium,
        Some(false) if !numeric_eq => Verdict::Refuted,
        Some(_) => Verdict::Inconclusive,
        None if numeric_eq => Verdict::Inconclusive,
        None => Verdict::Refuted,
    }
}
