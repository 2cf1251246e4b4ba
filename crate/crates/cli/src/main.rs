//! `mmexp`: error exponents, optimal metrics and simulations for linear codes
//! under codebook mismatch.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical
//! non-convergence, 4 size-cap violation. Log verbosity follows `RUST_LOG`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mmexp",
    version,
    about = "Random coding exponents for linear codes under codebook mismatch"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alphabet sizes, H(P_X), I(X;Y), and the rate implied by --r-fec.
    Info(InfoArgs),
    /// Exponent-versus-rate curves as CSV.
    Exponents(ExponentsArgs),
    /// The metric reaching the constant-composition exponent at one rate, as JSON.
    OptimalMetric(OptimalMetricArgs),
    /// Monte-Carlo error probability of the random linear ensemble, as JSON.
    Simulate(SimulateArgs),
    /// Ensemble checks.
    #[command(subcommand)]
    Probe(ProbeCommand),
}

#[derive(Args)]
struct Common {
    /// Output file, written atomically; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    r_fec: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExponentsArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Rate grid in bits per channel use, `min:max:step`.
    #[arg(long, default_value = "0.05:0.5:0.025")]
    rates: String,
    /// Comma-separated: ml, map, optimal, or paths to metric JSON files.
    #[arg(long, default_value = "ml,map,optimal")]
    metrics: String,
    /// Optimizer tolerance override, `name=value`; repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["rate", "r_fec"]))]
struct OptimalMetricArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Rate in bits per channel use.
    #[arg(long)]
    rate: Option<f64>,
    /// Code rate; the information rate is `H(P_X) - m (1 - r_fec)`.
    #[arg(long)]
    r_fec: Option<f64>,
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Block length in channel symbols.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r_fec: f64,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics to compare on the same codes and noise.
    #[arg(long, default_value = "ml")]
    metrics: String,
    /// Split the trials into this many paired batches.
    #[arg(long, default_value_t = 1)]
    batches: usize,
    /// Coset offset: uniform, zero, or shifted:<u32>.
    #[arg(long, default_value = "uniform")]
    offset: String,
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Chi-square uniformity of single, paired and XOR-dependent codewords.
    Independence(IndependenceArgs),
    /// Exact union-event probability against its lower and upper bounds.
    Union(UnionArgs),
}

#[derive(Args)]
struct IndependenceArgs {
    #[arg(long)]
    n: usize,
    /// Bits per channel symbol.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    r_fec: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "uniform")]
    offset: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct UnionArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r_fec: f64,
    /// A single metric: ml, map, optimal, or a metric file.
    #[arg(long, default_value = "ml")]
    metrics: String,
    /// Sampled `(x, y)` pairs.
    #[arg(long, default_value_t = 16)]
    pairs: usize,
    #[arg(long, default_value_t = 4000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[command(flatten)]
    common: Common,
}

fn exit_code(e: &mismatch_exponent::Error) -> u8 {
    if e.is_cap_violation() {
        4
    } else if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Info(a) => commands::info(&a.channel, a.r_fec, a.common.out.as_deref()),
        Command::Exponents(a) => commands::exponents(&a.channel, &a.rates, &a.metrics, &a.tol, a.common.out.as_deref()),
        Command::OptimalMetric(a) => {
            commands::optimal_metric(&a.channel, a.rate, a.r_fec, &a.tol, a.common.out.as_deref())
        }
        Command::Simulate(a) => commands::simulate(
            &commands::SimulateRequest {
                channel: a.channel,
                n: a.n,
                r_fec: a.r_fec,
                trials: a.trials,
                seed: a.seed,
                metrics: a.metrics,
                batches: a.batches,
                offset: a.offset,
                tol: a.tol,
            },
            a.common.out.as_deref(),
        ),
        Command::Probe(ProbeCommand::Independence(a)) => {
            commands::probe_independence(a.n, a.m, a.r_fec, a.samples, a.seed, &a.offset, a.common.out.as_deref())
        }
        Command::Probe(ProbeCommand::Union(a)) => commands::probe_union(
            &commands::UnionRequest {
                channel: a.channel,
                n: a.n,
                r_fec: a.r_fec,
                metric: a.metrics,
                pairs: a.pairs,
                mc_samples: a.mc_samples,
                seed: a.seed,
                tol: a.tol,
            },
            a.common.out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
