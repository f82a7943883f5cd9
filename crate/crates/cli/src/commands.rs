//! The graph-metrics, simulate, and bounds subcommands.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::json;

use coop_bandits::graph::ConsensusModel;
use coop_bandits::policies::{t_dagger, Schedule};
use coop_bandits::report::{trace_csv_header, write_aggregate_csv, write_trace_csv, BoundsOverlay};
use coop_bandits::simulation::{
    fusion_center_lower_bound, monte_carlo, theorem1_bound, theorem2_bound, AggregateResult,
    BanditEnvironment, EnvSpec, MonteCarloSpec,
};

use crate::config::ResolvedRun;
use crate::CliError;

/// How the sign split inside the centrality measure reads the indicator:
/// entrywise along the diagonal of the eigenvector outer products.
pub const CENTRALITY_CONVENTION: &str =
    "sign split over eigenvector products taken entrywise along the summation diagonal";

const REGRET_COUNTING: &str =
    "regret counts rounds 1..=horizon, including the forced initialization sweep";

/// Write to stdout, treating a closed pipe (e.g. `| head`) as success.
pub fn print_stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::validation(format!("cannot write to stdout: {e}"))),
    }
}

pub fn metrics_json(model: &ConsensusModel, schedule: Schedule) -> serde_json::Value {
    let t_daggers: Vec<f64> = model
        .epsilon_c()
        .iter()
        .map(|&e| t_dagger(e, schedule))
        .collect();
    let mut value = serde_json::to_value(model.metrics()).expect("metrics serialize");
    let map = value.as_object_mut().expect("metrics object");
    map.insert("t_dagger".into(), json!(t_daggers));
    map.insert("schedule".into(), json!(schedule.to_string()));
    map.insert("centrality_indicator".into(), json!(CENTRALITY_CONVENTION));
    value
}

pub fn cmd_graph_metrics(model: &ConsensusModel, schedule: Schedule) -> Result<(), CliError> {
    let value = metrics_json(model, schedule);
    let mut text = serde_json::to_string_pretty(&value).expect("json");
    text.push('\n');
    print_stdout(&text)
}

fn bounds_overlay(
    env: &BanditEnvironment,
    model: &ConsensusModel,
    gamma: f64,
    schedule: Schedule,
    horizon: f64,
) -> Result<Vec<BoundsOverlay>, CliError> {
    let lower = fusion_center_lower_bound(env, horizon)?;
    let mut rows = Vec::new();
    for arm in 0..env.arms() {
        let gap = env.gap(arm);
        if gap > 0.0 {
            rows.push(BoundsOverlay {
                arm: arm + 1,
                gap,
                fusion_center_lower: lower[arm],
                theorem1: Some(theorem1_bound(env, model, gamma, schedule, horizon, arm)?),
                theorem2: Some(theorem2_bound(env, model, gamma, schedule, horizon, arm)?),
            });
        } else {
            rows.push(BoundsOverlay {
                arm: arm + 1,
                gap,
                fusion_center_lower: None,
                theorem1: None,
                theorem2: None,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_simulate(run: ResolvedRun) -> Result<(), CliError> {
    let ResolvedRun {
        config,
        model,
        env,
        policy,
        prior,
    } = run;

    let mut spec = MonteCarloSpec::new(
        env.clone(),
        model.clone(),
        policy.clone(),
        prior,
        config.horizon,
        config.runs,
        config.seed,
    );
    spec.keep_traces = config.trace_runs;
    let result = monte_carlo(&spec)?;

    // Bounds are defined only against a fixed environment.
    let bounds = match &env {
        EnvSpec::Fixed(fixed) => Some(bounds_overlay(
            fixed,
            &model,
            policy.gamma,
            policy.schedule,
            config.horizon as f64,
        )?),
        EnvSpec::Redraw { .. } => None,
    };

    let summary = json!({
        "resolved_config": config,
        "graph": metrics_json(&model, policy.schedule),
        "regret_counting": REGRET_COUNTING,
        "results": {
            "runs": result.runs,
            "horizon": result.horizon,
            "group_regret_at_horizon": result.group_regret_at_horizon(),
            "agent_final_regret": result.agent_final_regret(),
            "mean_arm_pulls": result.mean_arm_pulls,
            "mean_suboptimal_pulls": result.mean_suboptimal_pulls,
            "suboptimal_pulls_std_error": result.suboptimal_pulls_std_error,
        },
        "bounds": bounds,
    });

    fs::create_dir_all(&config.out_dir).map_err(|e| {
        CliError::validation(format!(
            "cannot create output directory {}: {e}",
            config.out_dir.display()
        ))
    })?;
    write_artifacts(&config.out_dir, &result, &summary)?;

    println!(
        "group regret at T={}: {:.4} over {} runs (policy {})",
        config.horizon,
        result.group_regret_at_horizon(),
        result.runs,
        policy.kind,
    );
    if let Some(rows) = &bounds {
        for row in rows {
            match (row.fusion_center_lower, row.theorem1, row.theorem2) {
                (Some(lower), Some(t1), Some(t2)) => println!(
                    "arm {} (gap {:.4}): lower {:.2}, theorem-1 {:.2}, theorem-2 {:.2}",
                    row.arm, row.gap, lower, t1, t2
                ),
                _ => println!("arm {} (gap 0): n/a (best arm)", row.arm),
            }
        }
    }
    println!("artifacts written to {}", config.out_dir.display());
    Ok(())
}

fn write_artifacts(
    out_dir: &Path,
    result: &AggregateResult,
    summary: &serde_json::Value,
) -> Result<(), CliError> {
    let write_err =
        |name: &str, e: std::io::Error| CliError::validation(format!("cannot write {name}: {e}"));

    let mut aggregate = Vec::new();
    write_aggregate_csv(&mut aggregate, result).map_err(|e| write_err("aggregate.csv", e))?;
    fs::write(out_dir.join("aggregate.csv"), aggregate)
        .map_err(|e| write_err("aggregate.csv", e))?;

    if !result.traces.is_empty() {
        let mut trace = Vec::new();
        writeln!(&mut trace, "{}", trace_csv_header()).map_err(|e| write_err("trace.csv", e))?;
        for (run, t) in &result.traces {
            write_trace_csv(&mut trace, *run, t).map_err(|e| write_err("trace.csv", e))?;
        }
        fs::write(out_dir.join("trace.csv"), trace).map_err(|e| write_err("trace.csv", e))?;
    }

    let text = serde_json::to_string_pretty(summary).expect("summary json");
    fs::write(out_dir.join("summary.json"), text).map_err(|e| write_err("summary.json", e))?;
    Ok(())
}

pub fn cmd_bounds(run: ResolvedRun) -> Result<(), CliError> {
    let ResolvedRun {
        config,
        model,
        env,
        policy,
        ..
    } = run;

    let env = match env {
        EnvSpec::Fixed(fixed) => fixed,
        EnvSpec::Redraw { .. } => {
            return Err(CliError::validation(
                "bounds need an explicit environment (fixed arm means)".into(),
            ))
        }
    };
    let horizon = config.horizon as f64;
    if horizon <= 1.0 {
        return Err(CliError::validation(
            "bounds need horizon > 1 (ln T must be positive)".into(),
        ));
    }

    // Geometric grid of horizons up to the configured one.
    let lo = 10.0f64.min(horizon).max(2.0);
    let points = 6;
    let mut grid = Vec::new();
    for i in 0..points {
        let t = lo * (horizon / lo).powf(i as f64 / (points - 1) as f64);
        let t = t.round();
        if grid.last() != Some(&t) {
            grid.push(t);
        }
    }

    let mut table = String::from("arm,gap,T,fusion_lower,theorem1,theorem2\n");
    for arm in 0..env.arms() {
        let gap = env.gap(arm);
        for &t in &grid {
            if gap > 0.0 {
                let lower = fusion_center_lower_bound(&env, t)?[arm].expect("positive gap");
                let t1 = theorem1_bound(&env, &model, policy.gamma, policy.schedule, t, arm)?;
                let t2 = theorem2_bound(&env, &model, policy.gamma, policy.schedule, t, arm)?;
                table.push_str(&format!("{},{gap},{t},{lower},{t1},{t2}\n", arm + 1));
            } else {
                table.push_str(&format!("{},0,{t},n/a,n/a,n/a\n", arm + 1));
            }
        }
    }
    print_stdout(&table)
}
