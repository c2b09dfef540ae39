//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 2 for invalid arguments, 3 when the request lies outside every
//! characterized region.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::beliefs::{CostSchedule, DiscreteBeliefDistribution};
use crate::concavify::{build_grid, concave_envelope, SampledFunction};
use crate::config::{ConfigOverrides, OutputFormat, RunConfig};
use crate::equilibrium::{
    check_binary_symmetric, check_outcome_equivalent, check_profile, full_info_region,
    kzero_atom_check, kzero_fullinfo_refute, kzero_uniform_check, single_sender_solve,
    SearchConfig, SearchOptions, SingleSenderParams, Verdict,
};
use crate::error::{Error, Result};
use crate::extensions::{check_costvariant_fullinfo, check_hetero_fullinfo, check_public, HeteroParams};
use crate::receiver::{
    best_response, stage1_value, stage2_kinks, stage2_payoff, ModelParams, SenderSide, SolverConfig,
};

type Belief = DiscreteBeliefDistribution<f64>;

const CSV_SCHEMA: &str = "# schema=1";

#[derive(Debug, Parser)]
#[command(name = "inattention", version, about = "Equilibria of competitive persuasion with an inattentive receiver")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    deviation_step: Option<f64>,
    #[arg(long, global = true)]
    profit_threshold: Option<f64>,
    /// fair, sender1 or sender2.
    #[arg(long, global = true)]
    tie_rule: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    parallel: Option<bool>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Receiver's optimal two-stage strategy against a pair of experiments.
    BestResponse {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        mu: Option<f64>,
        /// full, none, binary:l,h or file:<path>.
        #[arg(long, default_value = "full")]
        profile: String,
        /// Sender 2's experiment when it differs from sender 1's.
        #[arg(long)]
        profile2: Option<String>,
    },
    /// Equilibrium check of a symmetric or asymmetric profile.
    Check {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value = "full")]
        profile: String,
        #[arg(long)]
        profile2: Option<String>,
        /// The receiver observes both experiments before choosing whom to
        /// visit first (binary profiles only).
        #[arg(long)]
        public: bool,
    },
    /// Full-information verdicts over a (μ, k) grid, as CSV.
    Region {
        #[arg(long, conflicts_with = "k_range")]
        k: Option<f64>,
        #[arg(long, value_parser = parse_range)]
        k_range: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_range, default_value = "0,1")]
        mu_range: (f64, f64),
        /// Interior points per range.
        #[arg(long, default_value_t = 99)]
        steps: usize,
        /// Interior points of the k range; defaults to `--steps`.
        #[arg(long)]
        k_steps: Option<usize>,
    },
    /// Full information with heterogeneous prior means.
    Hetero {
        #[arg(long, required_unless_present = "mu1_range")]
        mu1: Option<f64>,
        #[arg(long, required_unless_present = "mu1_range")]
        mu2: Option<f64>,
        #[arg(long, value_parser = parse_range, requires = "mu2_range")]
        mu1_range: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_range)]
        mu2_range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Full information when the attention cost depends on the experiment.
    Variant {
        #[arg(long, required_unless_present = "mu_range")]
        mu: Option<f64>,
        #[arg(long, value_parser = parse_range)]
        mu_range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 99)]
        steps: usize,
        /// Schedule file: `# floor=<k>` then `<coef> | <x>:<w> ...` lines.
        #[arg(long)]
        cost_schedule: PathBuf,
    },
    /// Sender-optimal experiment against a single inattentive receiver.
    SingleSender {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        k: f64,
    },
    /// Costless-attention benchmarks.
    K0 {
        /// uniform, atom or full.
        #[arg(long)]
        benchmark: String,
        #[arg(long)]
        mu: f64,
        /// Probability the deviator is visited first.
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Discretization of the atom benchmark.
        #[arg(long, default_value_t = 1000)]
        n_points: usize,
    },
    /// Payoff and its concave envelope, as CSV. With `--x` the stage-2
    /// payoff at stage-1 belief x, otherwise the stage-1 objective.
    EnvelopeDump {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if !(a < b) {
        return Err(format!("empty range {a},{b}"));
    }
    Ok((a, b))
}

/// `n` interior points of `[a, b]`.
fn interior(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| a + (b - a) * i as f64 / (n + 1) as f64).collect()
}

/// Experiment given on the command line. `mu` is required unless it is
/// read from a file.
fn parse_profile(spec: &str, mu: Option<f64>) -> Result<Belief> {
    let need = || mu.ok_or_else(|| Error::InvalidParams(format!("--mu is required for profile `{spec}`")));
    match spec {
        "full" => Belief::binary(0.0, 1.0, need()?),
        "none" => Belief::degenerate(need()?),
        _ => {
            if let Some(rest) = spec.strip_prefix("binary:") {
                let (l, h) = parse_range(rest).map_err(Error::Parse)?;
                Belief::binary(l, h, need()?)
            } else if let Some(path) = spec.strip_prefix("file:") {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
                let d = Belief::from_record(&text)?;
                if let Some(m) = mu {
                    d.check_bayes_plausible(m, 1e-9)?;
                }
                Ok(d)
            } else {
                Err(Error::Parse(format!(
                    "unknown profile `{spec}`; expected full, none, binary:l,h or file:<path>"
                )))
            }
        }
    }
}

enum Output {
    Json(serde_json::Value),
    Csv(String),
}

fn json_of<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Rows as CSV or a JSON array, per the configured format.
fn table<R: Serialize>(fmt: Option<OutputFormat>, header: &str, rows: &[R], line: impl Fn(&R) -> String) -> Output {
    match fmt {
        Some(OutputFormat::Json) => Output::Json(json_of(&rows)),
        _ => {
            let mut s = format!("{CSV_SCHEMA}\n{header}\n");
            for r in rows {
                let _ = writeln!(s, "{}", line(r));
            }
            Output::Csv(s)
        }
    }
}

fn report_only(cfg: &RunConfig, name: &str) -> Result<()> {
    if cfg.output_format == Some(OutputFormat::Csv) {
        return Err(Error::InvalidParams(format!("`{name}` emits JSON only")));
    }
    Ok(())
}

fn nearest(grid: &[f64], x: f64) -> f64 {
    grid.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())).unwrap_or(x)
}

fn check(cfg: &RunConfig, k: f64, mu: Option<f64>, profile: &str, profile2: Option<&str>, public: bool) -> Result<Output> {
    report_only(cfg, "check")?;
    let p1 = parse_profile(profile, mu)?;
    let p2 = match profile2 {
        Some(s) => parse_profile(s, Some(p1.mean()))?,
        None => p1.clone(),
    };
    let mu = p1.mean();
    let scfg = cfg.search();
    let binary = p1.points().len() == 2 && p1.approx_eq(&p2, 1e-12);
    let report = if binary {
        let pts = p1.points();
        let params = ModelParams::new(k, mu, pts[0], pts[1])?;
        if public {
            check_public(&params, &scfg)?
        } else {
            check_binary_symmetric(&params, &scfg)?
        }
    } else if public {
        return Err(Error::InvalidParams("--public needs a symmetric binary profile".into()));
    } else if full_info_region(k, mu) && p1.points().len() > 1 && p2.points().len() > 1 {
        check_outcome_equivalent(&p1, &p2, k, &scfg)?
    } else {
        let sides = [
            SenderSide::new(p1.clone(), k, scfg.deviation_step)?,
            SenderSide::new(p2.clone(), k, scfg.deviation_step)?,
        ];
        check_profile(sides, &scfg, &SearchOptions::default(), None)?
    };
    let grid = build_grid(0.0, 1.0, cfg.grid_points, &[mu])?;
    Ok(Output::Json(json!({
        "k": k,
        "mu": mu,
        "mu_grid": nearest(&grid, mu),
        "profile": [p1, p2],
        "public": public,
        "report": report,
    })))
}

fn region(cfg: &RunConfig, ks: Vec<f64>, mus: Vec<f64>) -> Result<Output> {
    #[derive(Serialize)]
    struct Row {
        mu: f64,
        k: f64,
        verdict: Verdict,
        margin: f64,
    }
    let cells = crate::equilibrium::region_sweep(&ks, &mus, &cfg.search())?;
    let rows: Vec<Row> = cells
        .into_iter()
        .map(|c| Row {
            mu: c.mu,
            k: c.k,
            verdict: c.verdict,
            margin: c.margin,
        })
        .collect();
    Ok(table(cfg.output_format, "mu,k,verdict,margin", &rows, |r| {
        format!("{},{},{},{:.6e}", r.mu, r.k, r.verdict, r.margin)
    }))
}

/// Cells outside every characterized region get verdict `out_of_region`.
#[derive(Serialize)]
struct SweepRow {
    a: f64,
    b: f64,
    verdict: String,
    margin: Option<f64>,
}

fn sweep<F>(cfg: &RunConfig, cells: Vec<(f64, f64)>, run: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64, f64, &SearchConfig) -> Result<(Verdict, f64)> + Sync,
{
    let inner = SearchConfig {
        parallel: false,
        ..cfg.search()
    };
    let one = |&(a, b): &(f64, f64)| -> Result<SweepRow> {
        let (verdict, margin) = match run(a, b, &inner) {
            Ok((v, m)) => (v.to_string(), Some(m)),
            Err(Error::OutOfRegion(_)) => ("out_of_region".to_string(), None),
            Err(e) => return Err(e),
        };
        Ok(SweepRow { a, b, verdict, margin })
    };
    if cfg.parallel {
        cells.par_iter().map(one).collect()
    } else {
        cells.iter().map(one).collect()
    }
}

fn margin_cell(m: Option<f64>) -> String {
    m.map(|m| format!("{m:.6e}")).unwrap_or_default()
}

fn hetero(
    cfg: &RunConfig,
    point: Option<(f64, f64)>,
    ranges: Option<((f64, f64), (f64, f64))>,
    steps: usize,
) -> Result<Output> {
    if let Some(((a1, b1), (a2, b2))) = ranges {
        let cells: Vec<(f64, f64)> = interior(a1, b1, steps)
            .into_iter()
            .flat_map(|m1| interior(a2, b2, steps).into_iter().map(move |m2| (m1, m2)))
            .collect();
        let rows = sweep(cfg, cells, |m1, m2, c| {
            let r = check_hetero_fullinfo(&HeteroParams::new(m1, m2)?, c)?;
            Ok((r.report.verdict, r.report.margin))
        })?;
        return Ok(table(cfg.output_format, "mu1,mu2,verdict,margin", &rows, |r| {
            format!("{},{},{},{}", r.a, r.b, r.verdict, margin_cell(r.margin))
        }));
    }
    report_only(cfg, "hetero")?;
    let (mu1, mu2) = point.ok_or_else(|| Error::InvalidParams("--mu1 and --mu2 are required".into()))?;
    let r = check_hetero_fullinfo(&HeteroParams::new(mu1, mu2)?, &cfg.search())?;
    Ok(Output::Json(json_of(&r)))
}

fn variant(cfg: &RunConfig, mu: Option<f64>, range: Option<(f64, f64)>, steps: usize, path: &Path) -> Result<Output> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let schedule = CostSchedule::parse(&text)?;
    if let Some((a, b)) = range {
        let cells = interior(a, b, steps).into_iter().map(|m| (m, 0.0)).collect();
        let rows = sweep(cfg, cells, |m, _, c| {
            let r = check_costvariant_fullinfo(m, &schedule, c)?;
            Ok((r.verdict, r.margin))
        })?;
        return Ok(table(cfg.output_format, "mu,verdict,margin", &rows, |r| {
            format!("{},{},{}", r.a, r.verdict, margin_cell(r.margin))
        }));
    }
    report_only(cfg, "variant")?;
    let mu = mu.ok_or_else(|| Error::InvalidParams("--mu is required".into()))?;
    let r = check_costvariant_fullinfo(mu, &schedule, &cfg.search())?;
    Ok(Output::Json(json!({ "mu": mu, "schedule": schedule, "report": r })))
}

fn k0(cfg: &RunConfig, benchmark: &str, mu: f64, lambda: f64, step: f64, n_points: usize) -> Result<Output> {
    report_only(cfg, "k0")?;
    let v = match benchmark {
        "uniform" => json_of(&kzero_uniform_check(mu, step)?),
        "atom" => json_of(&kzero_atom_check(mu, lambda, step, n_points)?),
        "full" => json_of(&kzero_fullinfo_refute(mu, lambda)?),
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown benchmark `{benchmark}`; expected uniform, atom or full"
            )))
        }
    };
    Ok(Output::Json(v))
}

fn envelope_dump(cfg: &RunConfig, params: ModelParams<f64>, x: Option<f64>) -> Result<Output> {
    #[derive(Serialize)]
    struct Row {
        y: f64,
        f: f64,
        envelope: f64,
    }
    params.validate()?;
    let mut bps = stage2_kinks(&params);
    bps.push(params.mu);
    let f = match x {
        Some(x) => {
            if !(x >= 0.0 && x <= 1.0) {
                return Err(Error::InvalidParams(format!("x = {x} is not a belief")));
            }
            SampledFunction::from_fn(params.l, params.h, cfg.grid_points, &bps, |y| stage2_payoff(y, x, &params))?
        }
        None => SampledFunction::from_fn(params.l, params.h, cfg.grid_points, &bps, |y| stage1_value(y, &params))?,
    };
    let env = concave_envelope(&f);
    let rows = f
        .grid()
        .iter()
        .zip(f.values())
        .map(|(&y, &v)| Ok(Row { y, f: v, envelope: env.value_at(y)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(table(cfg.output_format, "y,f,envelope", &rows, |r| format!("{},{},{}", r.y, r.f, r.envelope)))
}

fn execute(cfg: &RunConfig, cmd: Command) -> Result<Output> {
    match cmd {
        Command::BestResponse { k, mu, profile, profile2 } => {
            report_only(cfg, "best-response")?;
            let p1 = parse_profile(&profile, mu)?;
            let p2 = match profile2 {
                Some(s) => parse_profile(&s, Some(p1.mean()))?,
                None => p1.clone(),
            };
            let params = ModelParams::full_info(k, p1.mean())?;
            let solver = SolverConfig {
                grid_points: cfg.grid_points,
                order_tie: cfg.tie_rule,
                lattice_step: cfg.deviation_step,
                ..SolverConfig::default()
            };
            let s = best_response(&p1, &p2, &params, solver)?;
            Ok(Output::Json(json!({ "k": k, "mu": params.mu, "profile": [p1, p2], "strategy": s })))
        }
        Command::Check { k, mu, profile, profile2, public } => {
            check(cfg, k, mu, &profile, profile2.as_deref(), public)
        }
        Command::Region { k, k_range, mu_range, steps, k_steps } => {
            let ks = match (k, k_range) {
                (Some(k), _) => vec![k],
                (None, Some((a, b))) => interior(a, b, k_steps.unwrap_or(steps)),
                (None, None) => return Err(Error::InvalidParams("--k or --k-range is required".into())),
            };
            region(cfg, ks, interior(mu_range.0, mu_range.1, steps))
        }
        Command::Hetero { mu1, mu2, mu1_range, mu2_range, steps } => {
            let point = mu1.zip(mu2);
            hetero(cfg, point, mu1_range.zip(mu2_range), steps)
        }
        Command::Variant { mu, mu_range, steps, cost_schedule } => variant(cfg, mu, mu_range, steps, &cost_schedule),
        Command::SingleSender { lambda, mu, k } => {
            report_only(cfg, "single-sender")?;
            let r = single_sender_solve(SingleSenderParams { lambda, mu, k }, cfg.deviation_step)?;
            Ok(Output::Json(json_of(&r)))
        }
        Command::K0 { benchmark, mu, lambda, step, n_points } => k0(cfg, &benchmark, mu, lambda, step, n_points),
        Command::EnvelopeDump { k, mu, x, l, h } => envelope_dump(cfg, ModelParams::new(k, mu, l, h)?, x),
    }
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &g.config {
        cfg.apply(ConfigOverrides::load(p)?)?;
    }
    cfg.apply(ConfigOverrides {
        grid_points: g.grid_points,
        deviation_step: g.deviation_step,
        profit_threshold: g.profit_threshold,
        tie_rule: g.tie_rule.clone(),
        output_format: g.format.clone(),
        parallel: g.parallel,
        seed: g.seed,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn render(out: Output) -> String {
    match out {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
            s.push('\n');
            s
        }
        Output::Csv(s) => s,
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutOfRegion(_) => 3,
        _ => 2,
    }
}

/// Parses `argv` (program name first), runs the subcommand and writes its
/// output to stdout or `--out`.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = resolve_config(&cli.global).and_then(|cfg| execute(&cfg, cli.command));
    let text = match result {
        Ok(out) => render(out),
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
