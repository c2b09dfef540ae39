//! The receiver's two-stage learning problem.
//!
//! At stage 1 she garbles the experiment of the sender she visits first; at
//! stage 2, holding the resulting belief `x` about that sender, she garbles
//! the other sender's experiment and then selects whichever sender has the
//! higher posterior. Attention costs are `k·E[(posterior − prior)²]` at each
//! visited sender.

mod solver;
mod stage1;
mod stage2;

pub use solver::{
    best_response, grid_range, solve_stage2, stage1_outcome, stage1_with_table, FeasibleSet,
    ReceiverStrategy, SenderSide, SolverConfig, Stage1Outcome, Stage2Decision, StopRule, TieRule,
    TwoStagePlan, TwoStageSolver,
};
pub use stage1::{
    lower_tangent, stage1_case, stage1_closed_form, stage1_oracle, stage1_value,
    stage1_value_oracle, upper_tangent, AdmissibleSet, Stage1Case, Stage1Solution, SupportPiece,
};
pub use stage2::{
    solve_stage2_interval, stage2_case, stage2_closed_form, stage2_kinks, stage2_oracle,
    stage2_payoff, PosteriorTie, Stage2Case, Stage2Choice, Stage2Eval,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cost coefficient, common prior and the support `{l, h}` of the senders'
/// binary experiments (full information is `l = 0`, `h = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub k: T,
    pub mu: T,
    pub l: T,
    pub h: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(k: T, mu: T, l: T, h: T) -> Result<Self> {
        let p = Self { k, mu, l, h };
        p.validate()?;
        Ok(p)
    }

    /// Both senders offer full information.
    pub fn full_info(k: T, mu: T) -> Result<Self> {
        Self::new(k, mu, T::zero(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        let Self { k, mu, l, h } = *self;
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::InvalidParams(format!("k = {k} must be positive")));
        }
        if !(T::zero() <= l && l < mu && mu < h && h <= T::one()) {
            return Err(Error::InvalidParams(format!(
                "need 0 ≤ l < μ < h ≤ 1, got l = {l}, μ = {mu}, h = {h}"
            )));
        }
        Ok(())
    }

    /// `1/(4k)`: half-width of the interior stage-2 chord.
    pub fn quarter(&self) -> T {
        T::one() / (T::lit(4.0) * self.k)
    }

    /// `k > 1/(2(h − l))`.
    pub fn high_cost(&self) -> bool {
        self.k > T::one() / (T::lit(2.0) * (self.h - self.l))
    }

    /// Several stage-1 garblings are optimal, including `δ_μ` and
    /// `{μ − 1/(4k), μ + 1/(4k)}`.
    pub fn in_multiplicity_region(&self) -> bool {
        let q = self.quarter();
        self.high_cost() && self.mu >= self.l + q && self.mu <= self.h - q
    }
}
