//! Command-line front end for the cooperative bandit simulator.
//!
//! Subcommands: `graph-metrics`, `simulate`, `bounds`, `replicate`.
//! Exit codes: 0 on success, 2 on validation errors, 3 on numeric failures
//! (spectrum rejection). `COOP_BANDITS_THREADS` caps worker parallelism.

mod commands;
mod config;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coop_bandits::graph::{default_kappa, ConsensusModel, Graph};
use coop_bandits::numerics::RandomStream;
use coop_bandits::policies::{PolicyKind, Schedule};

use config::{graph_preset, Overrides, RunConfiguration};

/// Error with the exit code contract: validation problems exit 2, numeric
/// failures (spectrum rejection, eigensolver trouble) exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn validation(message: String) -> Self {
        CliError::Validation(message)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<coop_bandits::Error> for CliError {
    fn from(e: coop_bandits::Error) -> Self {
        match e {
            coop_bandits::Error::SpectrumRejected { .. }
            | coop_bandits::Error::EigenNoConvergence { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "coop-bandits",
    version,
    about = "Distributed cooperative multi-armed bandit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral report for a communication graph: eigenvalues, epsilon_n,
    /// per-node explore-exploit centrality, and t-dagger thresholds.
    GraphMetrics(GraphMetricsArgs),
    /// Monte Carlo simulation from a configuration file.
    Simulate(SimulateArgs),
    /// Theoretical bound table over a horizon grid (explicit means only).
    Bounds(ConfigArgs),
    /// Built-in experiment presets: fig-b, fig-c, prior.
    Replicate(ReplicateArgs),
}

#[derive(Args)]
struct GraphMetricsArgs {
    /// Edge-list file: first line M, then "u v" pairs, 1-indexed.
    #[arg(long, value_name = "PATH")]
    edge_list: Option<PathBuf>,
    /// Built-in topology (fig4, path3, path4, complete4, complete8).
    #[arg(long, value_name = "NAME", conflicts_with = "edge_list")]
    preset: Option<String>,
    /// Erdos-Renyi node count (use with --er-rho).
    #[arg(long, value_name = "N", requires = "er_rho", conflicts_with_all = ["edge_list", "preset"])]
    er_agents: Option<usize>,
    /// Erdos-Renyi edge probability.
    #[arg(long, value_name = "RHO", requires = "er_agents")]
    er_rho: Option<f64>,
    /// Seed for the Erdos-Renyi draw.
    #[arg(long, value_name = "U64", default_value_t = 42)]
    seed: u64,
    /// Consensus step size; default d_max/(d_max-1) (0.5 when d_max <= 1).
    #[arg(long, value_name = "REAL")]
    kappa: Option<f64>,
    /// Exploration schedule used for the t-dagger column.
    #[arg(long, value_name = "NAME", default_value = "sqrt-log")]
    schedule: String,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    inner: ConfigArgs,
}

#[derive(Args)]
struct ReplicateArgs {
    /// Preset name: fig-b, fig-c, or prior.
    preset: String,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct OverrideArgs {
    /// Base seed override.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo run count override.
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
    /// Horizon override.
    #[arg(long, value_name = "T")]
    horizon: Option<usize>,
    /// Output directory override.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Exploration exponent override (> 1).
    #[arg(long, value_name = "REAL")]
    gamma: Option<f64>,
    /// Consensus step size override.
    #[arg(long, value_name = "REAL")]
    kappa: Option<f64>,
    /// Policy override: coop-ucb, coop-ucb2, or coop-ucl.
    #[arg(long, value_name = "NAME")]
    policy: Option<String>,
}

impl OverrideArgs {
    fn into_overrides(self) -> Result<Overrides, CliError> {
        let policy = match self.policy.as_deref() {
            None => None,
            Some("coop-ucb") => Some(PolicyKind::CoopUcb),
            Some("coop-ucb2") => Some(PolicyKind::CoopUcb2),
            Some("coop-ucl") => Some(PolicyKind::CoopUcl),
            Some(other) => {
                return Err(CliError::validation(format!(
                    "unknown policy {other:?} (coop-ucb, coop-ucb2, coop-ucl)"
                )))
            }
        };
        Ok(Overrides {
            seed: self.seed,
            runs: self.runs,
            horizon: self.horizon,
            gamma: self.gamma,
            kappa: self.kappa,
            policy,
            out_dir: self.out,
        })
    }
}

fn setup_thread_pool() -> Result<(), CliError> {
    let Ok(value) = std::env::var("COOP_BANDITS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().map_err(|_| {
        CliError::validation(format!(
            "COOP_BANDITS_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    if threads == 0 {
        return Err(CliError::validation(
            "COOP_BANDITS_THREADS must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::validation(format!("cannot size the thread pool: {e}")))
}

fn parse_schedule(name: &str) -> Result<Schedule, CliError> {
    match name {
        "sqrt-log" => Ok(Schedule::SqrtLog),
        "zero" => Ok(Schedule::Zero),
        other => Err(CliError::validation(format!(
            "unknown schedule {other:?} (sqrt-log, zero)"
        ))),
    }
}

fn graph_metrics(args: GraphMetricsArgs) -> Result<(), CliError> {
    let graph =
        match (&args.edge_list, &args.preset, args.er_agents) {
            (Some(path), None, None) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::validation(format!("cannot read {}: {e}", path.display()))
                })?;
                Graph::parse_edge_list(&text)?
            }
            (None, Some(name), None) => graph_preset(name)?,
            (None, None, Some(agents)) => {
                let rho = args.er_rho.expect("clap enforces the pair");
                let mut stream = RandomStream::new(args.seed);
                Graph::erdos_renyi(agents, rho, &mut stream)?
            }
            _ => return Err(CliError::validation(
                "choose exactly one graph source: --edge-list, --preset, or --er-agents/--er-rho"
                    .into(),
            )),
        };
    let kappa = args.kappa.unwrap_or_else(|| default_kappa(&graph));
    let schedule = parse_schedule(&args.schedule)?;
    let model = ConsensusModel::new(&graph, kappa)?;
    commands::cmd_graph_metrics(&model, schedule)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GraphMetrics(args) => graph_metrics(args),
        Command::Simulate(args) => {
            let mut configuration = RunConfiguration::load(&args.inner.config)?;
            configuration.apply(&args.inner.overrides.into_overrides()?);
            let resolved = config::resolve(configuration)?;
            commands::cmd_simulate(resolved)
        }
        Command::Bounds(args) => {
            let mut configuration = RunConfiguration::load(&args.config)?;
            configuration.apply(&args.overrides.into_overrides()?);
            let resolved = config::resolve(configuration)?;
            commands::cmd_bounds(resolved)
        }
        Command::Replicate(args) => {
            let overrides = args.overrides.into_overrides()?;
            presets::run_preset(&args.preset, &overrides)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = setup_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
