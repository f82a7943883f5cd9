//! Built-in experiment presets.
//!
//! - `fig-b`: policy comparison (coop-UCB, coop-UCB2, coop-UCL with the
//!   informative prior, and four isolated single agents) on the fixed
//!   4-node graph, 10 arms with means drawn from Normal(75, 25^2),
//!   sigma_s = 30, 5000 runs.
//! - `fig-c`: 100 connected ER graphs (M=10, rho=ln(10)/10), 1000 runs per
//!   graph, per-node regret against explore-exploit centrality.
//! - `prior`: coop-UCL with the informative prior (mean 75, covariance
//!   625 I) against the uninformative prior on the 4-node graph.
//!
//! Every preset accepts the usual overrides (seed, runs, horizon, gamma,
//! kappa, out directory) and writes CSV plus a JSON summary.

use std::fs;
use std::path::PathBuf;

use serde_json::json;

use coop_bandits::graph::{default_kappa, ConsensusModel, Graph};
use coop_bandits::numerics::RandomStream;
use coop_bandits::policies::{BayesianPrior, PolicyConfig, PolicyKind};
use coop_bandits::simulation::{monte_carlo, spearman_rank_correlation, EnvSpec, MonteCarloSpec};

use crate::commands::metrics_json;
use crate::config::{graph_preset, Overrides, FIG4_KAPPA};
use crate::CliError;

const PAPER_ARMS: usize = 10;
const PAPER_MEAN: f64 = 75.0;
const PAPER_SD: f64 = 25.0;
const PAPER_SIGMA_S: f64 = 30.0;
const PAPER_PRIOR_VARIANCE: f64 = 625.0;
const ER_AGENTS: usize = 10;

fn paper_env() -> EnvSpec {
    EnvSpec::Redraw {
        arms: PAPER_ARMS,
        mean_of_means: PAPER_MEAN,
        sd_of_means: PAPER_SD,
        sigma_s: PAPER_SIGMA_S,
    }
}

struct PresetParams {
    seed: u64,
    runs: usize,
    horizon: usize,
    gamma: f64,
    kappa: Option<f64>,
    out_dir: PathBuf,
}

impl PresetParams {
    fn from_overrides(overrides: &Overrides, default_runs: usize) -> Self {
        Self {
            seed: overrides.seed.unwrap_or(42),
            runs: overrides.runs.unwrap_or(default_runs),
            horizon: overrides.horizon.unwrap_or(500),
            gamma: overrides.gamma.unwrap_or(1.1),
            kappa: overrides.kappa,
            out_dir: overrides
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
        }
    }
}

pub fn run_preset(name: &str, overrides: &Overrides) -> Result<(), CliError> {
    match name {
        "fig-b" => fig_b(overrides),
        "fig-c" => fig_c(overrides),
        "prior" => prior(overrides),
        other => Err(CliError::validation(format!(
            "unknown preset {other:?} (available: fig-b, fig-c, prior)"
        ))),
    }
}

fn write_file(path: &std::path::Path, content: &[u8]) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

fn comparison_csv(curves: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("t,variant,group_mean_regret\n");
    for (variant, curve) in curves {
        for (t, value) in curve.iter().enumerate() {
            out.push_str(&format!("{},{variant},{value}\n", t + 1));
        }
    }
    out
}

fn fig_b(overrides: &Overrides) -> Result<(), CliError> {
    let params = PresetParams::from_overrides(overrides, 5000);
    let graph = graph_preset("fig4")?;
    let kappa = params.kappa.unwrap_or(FIG4_KAPPA);
    let model = ConsensusModel::new(&graph, kappa)?;
    let env = paper_env();

    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut finals = serde_json::Map::new();

    let cooperative = [
        ("coop-ucb", PolicyKind::CoopUcb, None, 1u64),
        ("coop-ucb2", PolicyKind::CoopUcb2, None, 2),
        (
            "coop-ucl",
            PolicyKind::CoopUcl,
            Some(BayesianPrior::scaled_identity(
                PAPER_ARMS,
                PAPER_MEAN,
                PAPER_PRIOR_VARIANCE,
            )?),
            3,
        ),
    ];
    for (name, kind, prior, substream) in cooperative {
        let policy = PolicyConfig {
            kind,
            gamma: params.gamma,
            schedule: Default::default(),
            sigma_s: PAPER_SIGMA_S,
            agents: model.agents(),
        };
        policy.validate()?;
        let mut spec = MonteCarloSpec::new(
            env.clone(),
            model.clone(),
            policy,
            prior,
            params.horizon,
            params.runs,
            params.seed,
        );
        spec.episode_substream = substream;
        let result = monte_carlo(&spec)?;
        finals.insert(name.into(), json!(result.group_regret_at_horizon()));
        println!(
            "{name}: group regret at T={} is {:.2}",
            params.horizon,
            result.group_regret_at_horizon()
        );
        curves.push((name.to_string(), result.group_mean_regret));
    }

    // Baseline: four isolated single-node agents on matched environment
    // draws, each with its own reward substream; their curves add up to a
    // group-comparable total.
    let single_graph = Graph::from_edge_list(1, &[])?;
    let single_model = ConsensusModel::new(&single_graph, 1.0)?;
    let single_policy = PolicyConfig {
        kind: PolicyKind::CoopUcb2,
        gamma: params.gamma,
        schedule: Default::default(),
        sigma_s: PAPER_SIGMA_S,
        agents: 1,
    };
    let mut total = vec![0.0; params.horizon];
    for agent in 0..model.agents() as u64 {
        let mut spec = MonteCarloSpec::new(
            env.clone(),
            single_model.clone(),
            single_policy.clone(),
            None,
            params.horizon,
            params.runs,
            params.seed,
        );
        spec.episode_substream = 10 + agent;
        let result = monte_carlo(&spec)?;
        for (acc, v) in total.iter_mut().zip(&result.group_mean_regret) {
            *acc += v;
        }
    }
    let name = format!("single-agent-x{}", model.agents());
    finals.insert(name.clone(), json!(total.last().copied().unwrap_or(0.0)));
    println!(
        "{name}: total regret at T={} is {:.2}",
        params.horizon,
        total.last().copied().unwrap_or(0.0)
    );
    curves.push((name, total));

    fs::create_dir_all(&params.out_dir).map_err(|e| {
        CliError::validation(format!("cannot create {}: {e}", params.out_dir.display()))
    })?;
    write_file(
        &params.out_dir.join("fig-b-comparison.csv"),
        comparison_csv(&curves).as_bytes(),
    )?;
    let summary = json!({
        "preset": "fig-b",
        "seed": params.seed,
        "runs": params.runs,
        "horizon": params.horizon,
        "gamma": params.gamma,
        "environment": {"arms": PAPER_ARMS, "mean": PAPER_MEAN, "sd": PAPER_SD, "sigma_s": PAPER_SIGMA_S},
        "prior": {"mean": PAPER_MEAN, "variance": PAPER_PRIOR_VARIANCE},
        "graph": metrics_json(&model, Default::default()),
        "group_regret_at_horizon": finals,
    });
    write_file(
        &params.out_dir.join("fig-b-summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("json")
            .as_bytes(),
    )?;
    println!("artifacts written to {}", params.out_dir.display());
    Ok(())
}

fn fig_c(overrides: &Overrides) -> Result<(), CliError> {
    let params = PresetParams::from_overrides(overrides, 1000);
    let graphs = 100usize;
    let rho = (ER_AGENTS as f64).ln() / ER_AGENTS as f64;
    let mut stream = RandomStream::with_substream(params.seed, 777);

    let mut rows = String::from("graph,node,epsilon_c,epsilon_c_normalized,mean_regret\n");
    let mut correlations = Vec::with_capacity(graphs);
    for g in 0..graphs {
        // Resample until the spectrum validates at the experiment step size.
        let model = loop {
            let graph = Graph::erdos_renyi(ER_AGENTS, rho, &mut stream)?;
            let kappa = params.kappa.unwrap_or_else(|| default_kappa(&graph));
            match ConsensusModel::new(&graph, kappa) {
                Ok(model) => break model,
                Err(_) if params.kappa.is_none() => continue,
                Err(e) => return Err(e.into()),
            }
        };
        let policy = PolicyConfig {
            kind: PolicyKind::CoopUcb2,
            gamma: params.gamma,
            schedule: Default::default(),
            sigma_s: PAPER_SIGMA_S,
            agents: model.agents(),
        };
        policy.validate()?;
        let spec = MonteCarloSpec::new(
            paper_env(),
            model.clone(),
            policy,
            None,
            params.horizon,
            params.runs,
            params.seed + (g as u64 + 1) * params.runs as u64,
        );
        let result = monte_carlo(&spec)?;
        let regret = result.agent_final_regret();
        correlations.push(spearman_rank_correlation(model.epsilon_c(), &regret));
        let max_centrality = model
            .epsilon_c()
            .iter()
            .fold(0.0f64, |acc, &e| acc.max(e))
            .max(f64::MIN_POSITIVE);
        for (node, (&e, r)) in model.epsilon_c().iter().zip(&regret).enumerate() {
            rows.push_str(&format!(
                "{g},{},{e},{},{r}\n",
                node + 1,
                e / max_centrality
            ));
        }
    }
    let mean_correlation: f64 = correlations.iter().sum::<f64>() / graphs as f64;
    println!(
        "mean Spearman correlation between centrality and regret over {graphs} graphs: {mean_correlation:.4}"
    );

    fs::create_dir_all(&params.out_dir).map_err(|e| {
        CliError::validation(format!("cannot create {}: {e}", params.out_dir.display()))
    })?;
    write_file(&params.out_dir.join("fig-c-nodes.csv"), rows.as_bytes())?;
    let summary = json!({
        "preset": "fig-c",
        "seed": params.seed,
        "graphs": graphs,
        "runs_per_graph": params.runs,
        "horizon": params.horizon,
        "gamma": params.gamma,
        "rho": rho,
        "agents": ER_AGENTS,
        "environment": {"arms": PAPER_ARMS, "mean": PAPER_MEAN, "sd": PAPER_SD, "sigma_s": PAPER_SIGMA_S},
        "mean_spearman_correlation": mean_correlation,
        "per_graph_spearman": correlations,
    });
    write_file(
        &params.out_dir.join("fig-c-summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("json")
            .as_bytes(),
    )?;
    println!("artifacts written to {}", params.out_dir.display());
    Ok(())
}

fn prior(overrides: &Overrides) -> Result<(), CliError> {
    let params = PresetParams::from_overrides(overrides, 1000);
    let graph = graph_preset("fig4")?;
    let kappa = params.kappa.unwrap_or(FIG4_KAPPA);
    let model = ConsensusModel::new(&graph, kappa)?;
    let env = paper_env();
    let policy = PolicyConfig {
        kind: PolicyKind::CoopUcl,
        gamma: params.gamma,
        schedule: Default::default(),
        sigma_s: PAPER_SIGMA_S,
        agents: model.agents(),
    };
    policy.validate()?;

    let variants = [
        (
            "coop-ucl-informative",
            Some(BayesianPrior::scaled_identity(
                PAPER_ARMS,
                PAPER_MEAN,
                PAPER_PRIOR_VARIANCE,
            )?),
        ),
        ("coop-ucl-uninformative", None),
    ];
    let mut curves = Vec::new();
    let mut finals = serde_json::Map::new();
    for (name, prior) in variants {
        let spec = MonteCarloSpec::new(
            env.clone(),
            model.clone(),
            policy.clone(),
            prior,
            params.horizon,
            params.runs,
            params.seed,
        );
        let result = monte_carlo(&spec)?;
        finals.insert(name.into(), json!(result.group_regret_at_horizon()));
        println!(
            "{name}: group regret at T={} is {:.2}",
            params.horizon,
            result.group_regret_at_horizon()
        );
        curves.push((name.to_string(), result.group_mean_regret));
    }

    fs::create_dir_all(&params.out_dir).map_err(|e| {
        CliError::validation(format!("cannot create {}: {e}", params.out_dir.display()))
    })?;
    write_file(
        &params.out_dir.join("prior-comparison.csv"),
        comparison_csv(&curves).as_bytes(),
    )?;
    let summary = json!({
        "preset": "prior",
        "seed": params.seed,
        "runs": params.runs,
        "horizon": params.horizon,
        "gamma": params.gamma,
        "environment": {"arms": PAPER_ARMS, "mean": PAPER_MEAN, "sd": PAPER_SD, "sigma_s": PAPER_SIGMA_S},
        "prior": {"mean": PAPER_MEAN, "variance": PAPER_PRIOR_VARIANCE},
        "graph": metrics_json(&model, Default::default()),
        "group_regret_at_horizon": finals,
    });
    write_file(
        &params.out_dir.join("prior-summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("json")
            .as_bytes(),
    )?;
    println!("artifacts written to {}", params.out_dir.display());
    Ok(())
}
