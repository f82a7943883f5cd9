//! Run configuration files: a single JSON document resolving to a graph,
//! consensus model, environment, policy, and prior. Everything is validated
//! before any simulation starts or any output file is created.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use coop_bandits::graph::{default_kappa, ConsensusModel, Graph};
use coop_bandits::numerics::{Mat, RandomStream};
use coop_bandits::policies::{BayesianPrior, PolicyConfig, PolicyKind, Schedule};
use coop_bandits::simulation::{BanditEnvironment, EnvSpec};

use crate::CliError;

/// Substream reserved for sampling an ER graph source, disjoint from the
/// environment and episode substreams used inside a run.
const GRAPH_SUBSTREAM: u64 = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfiguration {
    pub graph: GraphSource,
    /// Consensus step size; omitted means `d_max/(d_max - 1)` with the
    /// `d_max <= 1` fallback of 0.5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub policy: PolicySpec,
    /// Gaussian prior for coop-UCL; omitted means uninformative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    pub environment: EnvironmentSpec,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    /// Full per-round traces are written for this many leading runs.
    #[serde(default = "default_trace_runs")]
    pub trace_runs: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_trace_runs() -> usize {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    /// Path to an edge-list file: first line `M`, then `u v` pairs,
    /// 1-indexed.
    EdgeList(PathBuf),
    /// Connected Erdos-Renyi sample (drawn from the run seed).
    Er { agents: usize, rho: f64 },
    /// Built-in named topology.
    Preset(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub schedule: Schedule,
    /// Reward deviation assumed by the policy; omitted means the
    /// environment's value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_s: Option<f64>,
}

fn default_gamma() -> f64 {
    1.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSpec {
    /// Same mean and variance on every arm, no correlation.
    ScaledIdentity { mean: f64, variance: f64 },
    /// Full mean vector and covariance matrix.
    Full {
        mean_vector: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentSpec {
    /// Fixed arm means.
    Explicit { means: Vec<f64>, sigma_s: f64 },
    /// Means redrawn per run from a Gaussian.
    Draw {
        arms: usize,
        mean: f64,
        sd: f64,
        sigma_s: f64,
    },
}

impl EnvironmentSpec {
    pub fn arms(&self) -> usize {
        match self {
            EnvironmentSpec::Explicit { means, .. } => means.len(),
            EnvironmentSpec::Draw { arms, .. } => *arms,
        }
    }
}

/// Command-line overrides applied on top of a configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub horizon: Option<usize>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub policy: Option<PolicyKind>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfiguration {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config parse error: {e}")))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(runs) = overrides.runs {
            self.runs = runs;
        }
        if let Some(horizon) = overrides.horizon {
            self.horizon = horizon;
        }
        if let Some(gamma) = overrides.gamma {
            self.policy.gamma = gamma;
        }
        if let Some(kappa) = overrides.kappa {
            self.kappa = Some(kappa);
        }
        if let Some(kind) = overrides.policy {
            self.policy.kind = kind;
        }
        if let Some(out) = &overrides.out_dir {
            self.out_dir = out.clone();
        }
    }
}

/// Built-in topologies usable as `{"preset": NAME}` graph sources.
pub fn graph_preset(name: &str) -> Result<Graph, CliError> {
    let graph = match name {
        // 4-node comparison graph: triangle 1-2-3 plus pendant node 4.
        "fig4" => Graph::from_edge_list(4, &[(1, 2), (1, 3), (2, 3), (3, 4)]),
        "path3" => Graph::path(3),
        "path4" => Graph::path(4),
        "complete4" => Graph::complete(4),
        "complete8" => Graph::complete(8),
        other => {
            let message = format!(
                "unknown graph preset {other:?} \
                 (available: fig4, path3, path4, complete4, complete8)"
            );
            return Err(CliError::validation(message));
        }
    };
    graph.map_err(CliError::from)
}

/// The 4-node preset pins kappa = 1: the experiment ratio
/// `d_max/(d_max - 1)` places -1 in the spectrum of every 4-node topology.
pub const FIG4_KAPPA: f64 = 1.0;

/// Everything a command needs, built and validated from a configuration.
pub struct ResolvedRun {
    /// Echo of the configuration with defaults and overrides materialized;
    /// embedding this in artifacts makes reruns reproducible.
    pub config: RunConfiguration,
    pub model: ConsensusModel,
    pub env: EnvSpec,
    pub policy: PolicyConfig,
    pub prior: Option<BayesianPrior>,
}

pub fn resolve(mut config: RunConfiguration) -> Result<ResolvedRun, CliError> {
    let graph = match &config.graph {
        GraphSource::EdgeList(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::validation(format!("cannot read edge list {}: {e}", path.display()))
            })?;
            Graph::parse_edge_list(&text)?
        }
        GraphSource::Er { agents, rho } => {
            let mut stream = RandomStream::with_substream(config.seed, GRAPH_SUBSTREAM);
            Graph::erdos_renyi(*agents, *rho, &mut stream)?
        }
        GraphSource::Preset(name) => graph_preset(name)?,
    };

    let kappa = config.kappa.unwrap_or_else(|| {
        if matches!(&config.graph, GraphSource::Preset(name) if name == "fig4") {
            FIG4_KAPPA
        } else {
            default_kappa(&graph)
        }
    });
    // Pin the resolved step size so a rerun from the echoed config cannot
    // drift.
    config.kappa = Some(kappa);
    let model = ConsensusModel::new(&graph, kappa)?;

    if config.runs == 0 {
        return Err(CliError::validation("runs must be at least 1".into()));
    }
    let arms = config.environment.arms();
    if config.horizon < arms {
        return Err(CliError::validation(format!(
            "horizon {} shorter than the {arms}-round initialization sweep",
            config.horizon
        )));
    }

    let env = match &config.environment {
        EnvironmentSpec::Explicit { means, sigma_s } => {
            EnvSpec::Fixed(BanditEnvironment::new(means.clone(), *sigma_s)?)
        }
        EnvironmentSpec::Draw {
            arms,
            mean,
            sd,
            sigma_s,
        } => {
            if !(*sd >= 0.0) {
                return Err(CliError::validation(format!(
                    "environment draw sd must be nonnegative, got {sd}"
                )));
            }
            EnvSpec::Redraw {
                arms: *arms,
                mean_of_means: *mean,
                sd_of_means: *sd,
                sigma_s: *sigma_s,
            }
        }
    };

    let sigma_s = config.policy.sigma_s.unwrap_or_else(|| env.sigma_s());
    config.policy.sigma_s = Some(sigma_s);
    let policy = PolicyConfig {
        kind: config.policy.kind,
        gamma: config.policy.gamma,
        schedule: config.policy.schedule,
        sigma_s,
        agents: model.agents(),
    };
    policy.validate()?;

    let prior = match &config.prior {
        None => None,
        Some(PriorSpec::ScaledIdentity { mean, variance }) => {
            Some(BayesianPrior::scaled_identity(arms, *mean, *variance)?)
        }
        Some(PriorSpec::Full {
            mean_vector,
            covariance,
        }) => {
            if covariance.len() != mean_vector.len()
                || covariance.iter().any(|row| row.len() != mean_vector.len())
            {
                return Err(CliError::validation(
                    "prior covariance must be square and match the mean vector".into(),
                ));
            }
            let sigma0 = Mat::from_fn(mean_vector.len(), mean_vector.len(), |r, c| {
                covariance[r][c]
            });
            Some(BayesianPrior::from_covariance(
                mean_vector.clone(),
                &sigma0,
            )?)
        }
    };
    if let Some(p) = &prior {
        if p.arms() != arms {
            return Err(CliError::validation(format!(
                "prior covers {} arms but the environment has {arms}",
                p.arms()
            )));
        }
    }

    Ok(ResolvedRun {
        config,
        model,
        env,
        policy,
        prior,
    })
}
