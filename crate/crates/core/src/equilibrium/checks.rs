use rayon::prelude::*;
use serde::Serialize;

use super::search::{deviation_search, SearchOptions};
use super::{decide, EquilibriumReport, SearchConfig, Verdict};
use crate::beliefs::{is_garbling, DiscreteBeliefDistribution, GarblingTol};
use crate::error::{Error, Result};
use crate::receiver::{
    solve_stage2_interval, stage1_closed_form, ModelParams, PosteriorTie, SenderSide,
};

type Belief = DiscreteBeliefDistribution<f64>;

/// Whether full information by both senders is an equilibrium:
/// `k > 1/2` and `1/(4k) ≤ μ ≤ 1 − 1/(4k)`.
pub fn full_info_region(k: f64, mu: f64) -> bool {
    let q = 1.0 / (4.0 * k);
    k > 0.5 && mu >= q && mu <= 1.0 - q
}

/// Probability that the first-visited sender is selected when the receiver
/// holds stage-1 belief `x`, for admissible `x` in the multiplicity region.
/// It is affine: `2k(x − μ) + 1/2`.
pub fn selection_probability(x: f64, params: &ModelParams<f64>) -> Result<f64> {
    let sol = stage1_closed_form(params)?;
    if !sol.case.has_multiplicity() {
        return Err(Error::OutOfRegion(format!(
            "stage-1 optimum is unique at k = {}, μ = {} (case {})",
            params.k,
            params.mu,
            sol.case.label()
        )));
    }
    if !sol.admissible.contains(x, 1e-9) {
        return Err(Error::OutOfRegion(format!("belief {x} is not in any optimal stage-1 support")));
    }
    Ok((2.0 * params.k * (x - params.mu) + 0.5).clamp(0.0, 1.0))
}

/// First-visited sender's selection probability under stage-1 garbling `f`,
/// from the closed-form selection probability.
pub fn first_visit_value(f: &Belief, params: &ModelParams<f64>) -> Result<f64> {
    f.check_bayes_plausible(params.mu, 1e-9)?;
    let mut total = 0.0;
    for (x, w) in f.iter() {
        total += w * selection_probability(x, params)?;
    }
    Ok(total)
}

/// Same quantity from the stage-2 solver, for any `f`.
pub fn first_visit_value_numeric(f: &Belief, params: &ModelParams<f64>) -> f64 {
    let ModelParams { k, mu, l, h } = *params;
    f.expect(|x| solve_stage2_interval(x, mu, k, l, h, PosteriorTie::FirstVisited).p_first)
}

/// Numeric search on an arbitrary profile, combined with an optional
/// closed-form indicator.
pub fn check_profile(
    sides: [SenderSide<f64>; 2],
    cfg: &SearchConfig,
    opts: &SearchOptions<'_>,
    closed_form: Option<bool>,
) -> Result<EquilibriumReport> {
    let out = deviation_search(sides, cfg, opts)?;
    let verdict = decide(out.margin, cfg.profit_threshold, closed_form);
    let mut notes = Vec::new();
    match (closed_form, verdict) {
        (Some(true), Verdict::Inconclusive) => notes.push(format!(
            "search found a gain of {:.3e} inside the closed-form equilibrium region",
            out.margin
        )),
        (Some(false), Verdict::Inconclusive) => notes.push(format!(
            "no deviation on the lattice gains more than {:.1e}, but the closed form predicts a profitable one",
            cfg.profit_threshold
        )),
        (None, Verdict::Inconclusive) => notes.push(
            "no profitable deviation found among the searched deviations; this is not a proof".into(),
        ),
        _ => {}
    }
    if out.margin_favorable > cfg.profit_threshold && out.margin <= cfg.profit_threshold {
        notes.push(format!(
            "resolving off-path ties in the deviator's favour yields a gain of {:.3e}",
            out.margin_favorable
        ));
    }
    Ok(EquilibriumReport {
        verdict,
        on_path_sender_payoffs: out.strategy.sender_payoffs,
        receiver_value: out.strategy.value,
        first_visit_prob: out.strategy.first_visit_prob,
        best_deviation: out.best,
        margin: out.margin,
        margin_favorable: out.margin_favorable,
        deviations_checked: out.checked,
        closed_form,
        full_info_value: None,
        notes,
    })
}

/// Both senders offer the binary experiment on `{l, h}`; equilibrium iff
/// `k > 1/(2(h − l))` and `l + 1/(4k) ≤ μ ≤ h − 1/(4k)`.
pub fn check_binary_symmetric(params: &ModelParams<f64>, cfg: &SearchConfig) -> Result<EquilibriumReport> {
    params.validate()?;
    let ModelParams { k, mu, l, h } = *params;
    let side = SenderSide::binary(l, h, mu, k)?;
    let mut r = check_profile(
        [side.clone(), side],
        cfg,
        &SearchOptions::default(),
        Some(params.in_multiplicity_region()),
    )?;
    if r.verdict == Verdict::Inconclusive && 2.0 * k * (h - l) <= 1.0 && (2.0 * mu - l - h).abs() < 1e-9 {
        r.notes.push(
            "at the midpoint prior with low cost the stage-1 optimum is not unique: learning the \
             whole experiment at the first sender is optimal, the second sender is never visited \
             and no deviation can pay"
                .into(),
        );
    }
    Ok(r)
}

pub fn check_full_info(k: f64, mu: f64, cfg: &SearchConfig) -> Result<EquilibriumReport> {
    check_binary_symmetric(&ModelParams::full_info(k, mu)?, cfg)
}

/// Profiles that contain `{μ − 1/(4k), μ + 1/(4k)}` as a garbling are
/// outcome-equivalent to full information and hence equilibria. When the
/// containment fails the closed form is silent and the search decides.
pub fn check_outcome_equivalent(
    p1: &Belief,
    p2: &Belief,
    k: f64,
    cfg: &SearchConfig,
) -> Result<EquilibriumReport> {
    let mu = p1.mean();
    p2.check_bayes_plausible(mu, 1e-9)?;
    if !full_info_region(k, mu) {
        return Err(Error::OutOfRegion(format!(
            "outcome equivalence needs k > 1/2 and 1/(4k) ≤ μ ≤ 1 − 1/(4k); got k = {k}, μ = {mu}"
        )));
    }
    let q = 1.0 / (4.0 * k);
    let target = Belief::binary(mu - q, mu + q, mu)?;
    let tol = GarblingTol::default();
    let contains = is_garbling(&target, p1, tol) && is_garbling(&target, p2, tol);
    let sides = [
        SenderSide::new(p1.clone(), k, cfg.deviation_step)?,
        SenderSide::new(p2.clone(), k, cfg.deviation_step)?,
    ];
    let mut report = check_profile(sides, cfg, &SearchOptions::default(), contains.then_some(true))?;
    report.full_info_value = Some(stage1_closed_form(&ModelParams::full_info(k, mu)?)?.most_informative.value);
    if !contains {
        report.notes.push(format!(
            "{{{:.6}, {:.6}}} is not a garbling of both experiments",
            mu - q,
            mu + q
        ));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub k: f64,
    pub mu: f64,
    pub verdict: Verdict,
    pub margin: f64,
    pub closed_form: bool,
}

/// Full-information check on every `(k, μ)` pair.
pub fn region_sweep(ks: &[f64], mus: &[f64], cfg: &SearchConfig) -> Result<Vec<RegionCell>> {
    let cells: Vec<(f64, f64)> = ks
        .iter()
        .flat_map(|&k| mus.iter().map(move |&mu| (k, mu)))
        .collect();
    let inner = SearchConfig {
        parallel: false,
        ..cfg.clone()
    };
    let run = |&(k, mu): &(f64, f64)| -> Result<RegionCell> {
        let r = check_full_info(k, mu, &inner)?;
        Ok(RegionCell {
            k,
            mu,
            verdict: r.verdict,
            margin: r.margin,
            closed_form: full_info_region(k, mu),
        })
    };
    if cfg.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_boundaries() {
        assert!(full_info_region(1.0, 0.25));
        assert!(full_info_region(1.0, 0.75));
        assert!(!full_info_region(1.0, 0.2));
        assert!(!full_info_region(0.5, 0.5));
        assert!(full_info_region(2.0, 0.2));
    }

    #[test]
    fn selection_probability_is_affine() {
        let p = ModelParams::full_info(1.0, 0.5).unwrap();
        assert_eq!(selection_probability(0.25, &p).unwrap(), 0.0);
        assert_eq!(selection_probability(0.75, &p).unwrap(), 1.0);
        assert_eq!(selection_probability(0.5, &p).unwrap(), 0.5);
        for i in 0..=50 {
            let x = 0.25 + 0.01 * i as f64;
            let cf = selection_probability(x, &p).unwrap();
            let num = solve_stage2_interval(x, 0.5, 1.0, 0.0, 1.0, PosteriorTie::FirstVisited).p_first;
            assert!((cf - num).abs() < 1e-9, "{x}: {cf} vs {num}");
        }
        let q = ModelParams::full_info(1.0, 0.1).unwrap();
        assert!(matches!(selection_probability(0.1, &q), Err(Error::OutOfRegion(_))));
    }

    #[test]
    fn first_visit_value_of_optimal_garblings() {
        let p = ModelParams::full_info(1.0, 0.5).unwrap();
        for f in [
            Belief::degenerate(0.5).unwrap(),
            Belief::binary(0.25, 0.75, 0.5).unwrap(),
            Belief::binary(0.3, 0.6, 0.5).unwrap(),
            Belief::new(vec![0.25, 0.5, 0.75], vec![0.25, 0.5, 0.25]).unwrap(),
        ] {
            assert!((first_visit_value(&f, &p).unwrap() - 0.5).abs() < 1e-12);
            assert!((first_visit_value_numeric(&f, &p) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn binary_symmetric_examples() {
        let cfg = SearchConfig {
            deviation_step: 0.01,
            ..SearchConfig::default()
        };
        let p = ModelParams::new(2.0, 0.5, 0.2, 0.8).unwrap();
        assert_eq!(check_binary_symmetric(&p, &cfg).unwrap().verdict, Verdict::Equilibrium);
        let p = ModelParams::new(2.0, 0.25, 0.2, 0.8).unwrap();
        let r = check_binary_symmetric(&p, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted, "{:?}", r.margin);
    }
}
