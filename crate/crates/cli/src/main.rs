//! `whlm`: robust moment estimation and verification experiments.
//!
//! Exit status: 0 ok, 2 usage or parse error, 3 domain error, 4 capacity
//! error, 5 a verified property does not hold.

mod input;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use whlm_core::distributions::{congruence_check_with_step, DEFAULT_GRID};
use whlm_core::estimators::{
    trimmed_sd_eq1, trimmed_sd_eq2, whl_central_moment, whl_standardized_moment,
};
use whlm_core::pseudosample::DEFAULT_BUDGET;
use whlm_core::report::{render, Format, Record};
use whlm_core::verify::{
    equivariance_suite, kernel_dist_probe, mc_plan_consistency, pairwise_diff_shape,
    support_bound_probe, variance_comparison,
};
use whlm_core::{Family, KernelOrder, LEstimatorSpec, MomentError, PseudoPlan, Sample, TrimSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_CAPACITY: u8 = 4;
const EXIT_PROPERTY: u8 = 5;

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "whlm",
    version,
    about = "Weighted Hodges-Lehmann moments and kernel-distribution checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Central or standardized moment of a sample.
    Estimate(EstimateArgs),
    /// Trimmed standard deviation.
    Tsd(TsdArgs),
    /// Sign analysis of quantile averages under a parameter change.
    Congruence(CongruenceArgs),
    /// Run a verification experiment.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Source {
    /// CSV or newline-separated reals ("-" for stdin).
    #[arg(
        long,
        short,
        conflicts_with = "family",
        required_unless_present = "family"
    )]
    input: Option<PathBuf>,
    /// Draw the sample from a family, e.g. "lognormal:mu=0,sigma=1".
    #[arg(long)]
    family: Option<String>,
    /// Sample size when drawing from --family.
    #[arg(long, default_value_t = 100)]
    n: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long, value_enum, default_value_t = PlanKind::Exact)]
    plan: PlanKind,
    /// Largest exact enumeration allowed.
    #[arg(long, env = "WHLM_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Kernel draws in Monte Carlo mode.
    #[arg(long, default_value_t = 1_000_000)]
    draws: u64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PlanKind {
    Exact,
    MonteCarlo,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EstimatorKind {
    Central,
    Standardized,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LKind {
    TrimmedMean,
    Median,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TsdVariant {
    /// Trimmed mean of halved squared pairwise differences.
    Pairwise,
    /// Symmetric order-statistic differences.
    OrderStatistics,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, short)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    eps0: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Trimming of the variance in the standardized estimator (defaults to --eps0).
    #[arg(long)]
    eps0_var: Option<f64>,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Central)]
    estimator: EstimatorKind,
    #[arg(long, value_enum, default_value_t = LKind::TrimmedMean)]
    lest: LKind,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct TsdArgs {
    #[command(flatten)]
    source: Source,
    /// Trimming fraction: eps0 for the pairwise form, eps for the order-statistic form.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = TsdVariant::Pairwise)]
    variant: TsdVariant,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CongruenceArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    param: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Finite-difference step (default max(1e-6, 1e-4 |theta|)).
    #[arg(long)]
    step: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// pairwise-shape, kernel-shape, variance-dominance, support-bounds,
    /// equivariance or mc-consistency.
    experiment: String,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    k: Option<usize>,
    /// Monte Carlo draws for the shape probes and mc-consistency.
    #[arg(long)]
    draws: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [20usize, 50, 100])]
    n_values: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    /// Sample size when mc-consistency draws from --family.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<MomentError> for Failure {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::Capacity { .. } | MomentError::Overflow { .. } => Failure {
                code: EXIT_CAPACITY,
                message: format!("{e} (--plan monte-carlo --draws N)"),
            },
            other => Failure {
                code: EXIT_DOMAIN,
                message: other.to_string(),
            },
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_family(spec: &str) -> CliResult<Family> {
    spec.parse()
        .map_err(|e: MomentError| Failure::usage(e.to_string()))
}

fn read_input(path: &PathBuf) -> CliResult<Vec<f64>> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::usage(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
    };
    input::parse_reals(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_sample(src: &Source, seed: u64) -> CliResult<Sample> {
    let values = match (&src.input, &src.family) {
        (Some(path), None) => read_input(path)?,
        (None, Some(spec)) => parse_family(spec)?.sample(src.n, seed),
        _ => return Err(Failure::usage("give exactly one of --input or --family")),
    };
    Ok(Sample::new(values)?)
}

fn plan(args: &PlanArgs, seed: u64) -> PseudoPlan {
    let p = match args.plan {
        PlanKind::Exact => PseudoPlan::exact(),
        PlanKind::MonteCarlo => PseudoPlan::monte_carlo(args.draws, seed),
    };
    p.with_budget(args.budget)
}

fn emit<T: Record>(report: &T, out: &OutputArgs) -> CliResult<()> {
    let format = match out.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    let text = render(report, format)?;
    match &out.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult<u8> {
    let sample = load_sample(&a.source, a.seed)?;
    let k = KernelOrder::new(a.k)?;
    let trim = TrimSpec::new(a.eps0, a.gamma)?;
    let lest = match a.lest {
        LKind::TrimmedMean => LEstimatorSpec::TrimmedMean,
        LKind::Median => LEstimatorSpec::Median,
    };
    let plan = plan(&a.plan, a.seed);
    let est = match a.estimator {
        EstimatorKind::Central => whl_central_moment(&sample, k, &trim, &lest, &plan)?,
        EstimatorKind::Standardized => {
            let den = TrimSpec::new(a.eps0_var.unwrap_or(a.eps0), a.gamma)?;
            whl_standardized_moment(&sample, k, &trim, &den, &lest, &plan)?
        }
    };
    emit(&est, &a.out)?;
    Ok(0)
}

fn cmd_tsd(a: &TsdArgs) -> CliResult<u8> {
    let sample = load_sample(&a.source, a.seed)?;
    let est = match a.variant {
        TsdVariant::Pairwise => trimmed_sd_eq2(&sample, a.eps, a.gamma, &plan(&a.plan, a.seed))?,
        TsdVariant::OrderStatistics => trimmed_sd_eq1(&sample, a.eps)?,
    };
    emit(&est, &a.out)?;
    Ok(0)
}

fn cmd_congruence(a: &CongruenceArgs) -> CliResult<u8> {
    let family = parse_family(&a.family)?;
    family
        .param(&a.param)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let verdict = congruence_check_with_step(&family, &a.param, a.gamma, a.grid, a.step)?;
    eprintln!("{} {}: {}", family, verdict.param, verdict.verdict);
    emit(&verdict, &a.out)?;
    Ok(0)
}

fn property(holds: bool, what: &str) -> u8 {
    if holds {
        0
    } else {
        eprintln!("property does not hold: {what}");
        EXIT_PROPERTY
    }
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<u8> {
    let family = |default: &str| parse_family(a.family.as_deref().unwrap_or(default));
    let draws = a.draws.unwrap_or(1_000_000) as usize;
    match a.experiment.as_str() {
        "pairwise-shape" => {
            let p = pairwise_diff_shape(&family("normal")?, draws, a.seed, a.bins)?;
            emit(&p, &a.out)?;
            Ok(property(p.monotone_left >= 0.9, "monotone fraction toward zero >= 0.9"))
        }
        "kernel-shape" => {
            let p = kernel_dist_probe(&family("normal")?, a.k.unwrap_or(3), draws, a.seed, a.bins)?;
            emit(&p, &a.out)?;
            Ok(property(p.median_over_sigma <= 0.1, "|median| / sigma <= 0.1"))
        }
        "variance-dominance" => {
            let v = variance_comparison(&family("normal")?, &a.n_values, a.eps, a.replications, a.seed)?;
            for (n, r) in v.n_values.iter().zip(&v.ratio) {
                eprintln!("n={n:<6} var ratio {r:.4}");
            }
            emit(&v, &a.out)?;
            Ok(property(v.dominates && v.non_decreasing, "ratio > 1 and non-decreasing in n"))
        }
        "support-bounds" => {
            let p = support_bound_probe(a.k.unwrap_or(3), a.resolution)?;
            emit(&p, &a.out)?;
            Ok(property(p.max_abs_error <= 1e-2, "grid extrema within 1e-2 of the support bounds"))
        }
        "equivariance" => {
            let r = equivariance_suite(a.trials, a.seed)?;
            emit(&r, &a.out)?;
            Ok(property(r.passed, "location-scale equivariance within 1e-9"))
        }
        "mc-consistency" => {
            let values = match (&a.input, &a.family) {
                (Some(p), None) => read_input(p)?,
                (None, Some(spec)) => parse_family(spec)?.sample(a.n, a.seed),
                (None, None) => parse_family("weibull")?.sample(a.n, a.seed),
                _ => return Err(Failure::usage("give at most one of --input or --family")),
            };
            let sample = Sample::new(values)?;
            let k = KernelOrder::new(a.k.unwrap_or(3))?;
            let seeds: Vec<u64> = (0..10).map(|i| a.seed.wrapping_add(i)).collect();
            let r = mc_plan_consistency(&sample, k, a.eps, a.draws.unwrap_or(1_000_000), &seeds, 0.01)?;
            emit(&r, &a.out)?;
            Ok(property(r.passes >= 9, "at least 9 of 10 seeds within 1%"))
        }
        other => Err(Failure::usage(format!(
            "unknown experiment '{other}' (expected pairwise-shape, kernel-shape, variance-dominance, \
             support-bounds, equivariance or mc-consistency)"
        ))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Tsd(a) => cmd_tsd(a),
        Command::Congruence(a) => cmd_congruence(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("whlm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
