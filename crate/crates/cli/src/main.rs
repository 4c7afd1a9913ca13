//! `relaycons`: robustness checks, simulations, bounds, graph generation and
//! trace reports.
//!
//! Exit codes: 0 success or property holds, 1 negative verdict, 2 usage or
//! validation error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "relaycons", version, about = "Resilient multi-hop leader-follower consensus toolkit")]
struct Cli {
    /// Directory searched for graph and scenario files given by relative
    /// path that do not exist in the working directory.
    #[arg(long, env = "RELAYCONS_CORPUS", global = true)]
    corpus: Option<PathBuf>,
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a graph is an r-robust following graph with l hops.
    Check(CheckArgs),
    /// Run a scenario file and write per-axis trace CSVs plus metrics.
    Simulate(SimulateArgs),
    /// Print consensus error bounds.
    Bound(BoundArgs),
    /// Emit a graph from a family together with its checker certificates.
    Generate(GenerateArgs),
    /// Steady-state metrics of an existing trace CSV.
    Report(ReportArgs),
}

#[derive(clap::Args)]
pub struct CheckArgs {
    /// Graph file (`n`, `leaders` and edge lines).
    pub graph: PathBuf,
    #[arg(short, long)]
    pub r: usize,
    /// Hop bound on relay paths.
    #[arg(short, long)]
    pub l: usize,
    /// Local adversary bound.
    #[arg(short, long)]
    pub f: usize,
    /// Independent paths may not pass through the set under test.
    #[arg(long)]
    pub strict_paths: bool,
    /// Enumerate removal sets on all cores.
    #[arg(long)]
    pub parallel: bool,
    /// Allow more than 20 followers (the enumeration is exponential).
    #[arg(long)]
    pub override_size_guard: bool,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Output directory for `trace_<axis>.csv` and `metrics.txt`.
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    /// Replace the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Steady window length in steps (default: last 20%).
    #[arg(long)]
    pub window: Option<usize>,
    /// Steady error above this is reported as not converged (default 10 eps).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrderArg {
    First,
    Second,
}

#[derive(clap::Args)]
pub struct BoundArgs {
    /// Number of normal followers.
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Normal followers with a leader link; prints the layered bound.
    #[arg(long)]
    pub direct: Option<usize>,
    #[arg(long, value_enum, default_value = "first")]
    pub order: OrderArg,
    /// Sampling period (first-order layered bound).
    #[arg(long)]
    pub period: Option<f64>,
    /// Consensus gain (first-order layered bound).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Compensation gain plus speed and disturbance bounds (first-order
    /// layered bound).
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Star,
    Layered,
    Example1Analog,
    Example2Analog,
    LeaderSetCertified,
    LeaderSetRejected,
    Random,
}

#[derive(clap::Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Node count (star, random).
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Edge probability (random).
    #[arg(short, long)]
    pub p: Option<f64>,
    /// Adversary bound (layered).
    #[arg(short, long, default_value_t = 1)]
    pub f: usize,
    /// Number of layers (layered).
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Property a random graph must satisfy, as `r,l,f`.
    #[arg(long, value_parser = parse_triple)]
    pub target: Option<(usize, usize, usize)>,
    /// Random draws before giving up.
    #[arg(long, default_value_t = 1000)]
    pub attempts: usize,
    /// Graph file to write; the note goes next to it with a `.note`
    /// extension. Prints both when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ReportArgs {
    pub csv: PathBuf,
    /// Scenario the trace came from: supplies normal nodes and the bound.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Axis index within the scenario.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    /// Nodes to evaluate, comma separated (default: every column whose
    /// error is not identically zero).
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    /// Error bound (default: the scenario's layered bound).
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Steady error above this is reported as not converged.
    #[arg(long)]
    pub threshold: Option<f64>,
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected r,l,f but got `{s}`"));
    }
    let num = |t: &str| t.parse::<usize>().map_err(|_| format!("`{t}` is not a count"));
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let ctx = commands::Context { corpus: cli.corpus };
    let result = match cli.command {
        Command::Check(a) => commands::check(&ctx, &a),
        Command::Simulate(a) => commands::simulate(&ctx, &a),
        Command::Bound(a) => commands::bound(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Report(a) => commands::report(&ctx, &a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
