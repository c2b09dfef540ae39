//! One sender facing a receiver with an outside option worth `λ`: the
//! receiver accepts when her posterior is at least `λ`.

use serde::Serialize;

use crate::beliefs::{is_garbling, is_strict_garbling, DiscreteBeliefDistribution, GarblingTol};
use crate::concavify::GarblingSolution;
use crate::error::{Error, Result};
use crate::receiver::{solve_stage2_interval, PosteriorTie, Stage2Eval};

type Belief = DiscreteBeliefDistribution<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleSenderParams {
    /// Value of the outside option.
    pub lambda: f64,
    pub mu: f64,
    /// Attention-cost coefficient; zero means costless attention.
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSenderResult {
    pub params: SingleSenderParams,
    /// Sender-optimal experiment.
    pub sender: Belief,
    /// Receiver's garbling of it.
    pub receiver: GarblingSolution<f64>,
    pub acceptance: f64,
    /// Receiver's garbling of full information.
    pub full_info_response: GarblingSolution<f64>,
    pub is_full_info: bool,
    /// `receiver` is a garbling of `full_info_response`, and a strict one.
    pub garbling_of_full_info: bool,
    pub strict_garbling_of_full_info: bool,
}

fn respond(p: &SingleSenderParams, lo: f64, hi: f64) -> Stage2Eval<f64> {
    // the outside option plays the first-visited sender; ties go to the sender
    solve_stage2_interval(p.lambda, p.mu, p.k, lo, hi, PosteriorTie::SecondVisited)
}

fn acceptance(p: &SingleSenderParams, lo: f64, hi: f64) -> f64 {
    1.0 - respond(p, lo, hi).p_first_min
}

/// Acceptance probability of a binary or degenerate offer.
pub fn single_sender_acceptance(p: &SingleSenderParams, offer: &Belief) -> Result<f64> {
    offer.check_bayes_plausible(p.mu, 1e-9)?;
    if offer.len() > 2 {
        return Err(Error::InvalidDistribution("offer must have at most two support points".into()));
    }
    Ok(acceptance(p, offer.min_point(), offer.max_point()))
}

/// Sender-optimal binary experiment, found on a lattice with step `step`
/// and refined twice by a factor of ten around the best point. Receiver
/// indifferences are resolved in the sender's favour.
pub fn single_sender_solve(p: SingleSenderParams, step: f64) -> Result<SingleSenderResult> {
    let SingleSenderParams { lambda, mu, k } = p;
    if !(mu > 0.0 && mu < 1.0) || !(0.0..=1.0).contains(&lambda) || !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 < μ < 1, 0 ≤ λ ≤ 1 and k ≥ 0; got μ = {mu}, λ = {lambda}, k = {k}"
        )));
    }
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidParams(format!("bad search step {step}")));
    }
    let full = Belief::binary(0.0, 1.0, mu)?;

    if k == 0.0 {
        let sender = if lambda <= mu {
            Belief::degenerate(mu)?
        } else {
            Belief::binary(0.0, lambda, mu)?
        };
        let acceptance = sender.expect(|x| if x >= lambda { 1.0 } else { 0.0 });
        let value = sender.expect(|x| x.max(lambda));
        let receiver = GarblingSolution::new(sender.clone(), value);
        let fi = GarblingSolution::new(full.clone(), mu + (1.0 - mu) * lambda);
        return Ok(finish(p, sender, receiver, acceptance, fi));
    }

    let fi = respond(&p, 0.0, 1.0).to_solution(mu)?;
    if lambda <= mu {
        let sender = Belief::degenerate(mu)?;
        let e = respond(&p, mu, mu);
        return Ok(finish(p, sender, e.to_solution(mu)?, 1.0 - e.p_first_min, fi));
    }

    let mut best = (mu, mu, acceptance(&p, mu, mu));
    let consider = |a: f64, b: f64, best: &mut (f64, f64, f64)| {
        if a < mu && b > mu && a >= 0.0 && b <= 1.0 {
            let v = acceptance(&p, a, b);
            if v > best.2 + 1e-12 {
                *best = (a, b, v);
            }
        }
    };
    let n = (1.0 / step).round() as usize;
    for i in 0..=n {
        for j in 0..=n {
            consider(i as f64 * step, j as f64 * step, &mut best);
        }
    }
    let mut h = step;
    for _ in 0..2 {
        let (a0, b0) = (best.0, best.1);
        let fine = h / 10.0;
        for i in -10..=10 {
            for j in -10..=10 {
                consider(a0 + i as f64 * fine, b0 + j as f64 * fine, &mut best);
            }
        }
        h = fine;
    }
    let (a, b, acc) = best;
    let sender = if a < b { Belief::binary(a, b, mu)? } else { Belief::degenerate(mu)? };
    let receiver = respond(&p, a, b).to_solution(mu)?;
    Ok(finish(p, sender, receiver, acc, fi))
}

fn finish(
    params: SingleSenderParams,
    sender: Belief,
    receiver: GarblingSolution<f64>,
    acceptance: f64,
    full_info_response: GarblingSolution<f64>,
) -> SingleSenderResult {
    let tol = GarblingTol::default();
    let full = Belief::binary(0.0, 1.0, params.mu).expect("interior prior");
    SingleSenderResult {
        is_full_info: sender.approx_eq(&full, 1e-9),
        garbling_of_full_info: is_garbling(&receiver.distribution, &full_info_response.distribution, tol),
        strict_garbling_of_full_info: is_strict_garbling(
            &receiver.distribution,
            &full_info_response.distribution,
            tol,
        ),
        params,
        sender,
        receiver,
        acceptance,
        full_info_response,
    }
}
