//! End-to-end tests of the binary: exit codes, artifact layout, and the
//! config round-trip contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coop-bandits"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn graph_metrics_from_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_config(dir.path(), "path3.txt", "3\n1 2\n2 3\n");
    let output = bin()
        .args(["graph-metrics", "--edge-list"])
        .arg(&edges)
        .args(["--kappa", "1.0"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["M"], 3);
    let epsilon_n = json["epsilon_n"].as_f64().unwrap();
    assert!((epsilon_n - 2.0 * 3f64.sqrt()).abs() < 1e-9);
    assert_eq!(json["epsilon_c"].as_array().unwrap().len(), 3);
    assert_eq!(json["t_dagger"].as_array().unwrap().len(), 3);
    assert!(json["centrality_indicator"]
        .as_str()
        .unwrap()
        .contains("diagonal"));
}

#[test]
fn graph_metrics_complete_preset_has_zero_measures() {
    let output = bin()
        .args(["graph-metrics", "--preset", "complete4", "--kappa", "0.75"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(json["epsilon_n"].as_f64().unwrap().abs() < 1e-12);
    for value in json["epsilon_c"].as_array().unwrap() {
        assert!(value.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn spectrum_rejection_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Single edge with kappa = 1 puts -1 in the spectrum.
    let edges = write_config(dir.path(), "pair.txt", "2\n1 2\n");
    let output = bin()
        .args(["graph-metrics", "--edge-list"])
        .arg(&edges)
        .args(["--kappa", "1.0"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("kappa"), "stderr: {stderr}");
}

fn small_config(out_dir: &Path) -> String {
    format!(
        r#"{{
            "graph": {{"preset": "path3"}},
            "kappa": 1.0,
            "policy": {{"kind": "coop-ucb2", "gamma": 1.1}},
            "environment": {{"explicit": {{"means": [20.0, 0.0], "sigma_s": 30.0}}}},
            "horizon": 50,
            "runs": 8,
            "seed": 77,
            "out_dir": "{}"
        }}"#,
        out_dir.display()
    )
}

#[test]
fn simulate_writes_artifacts_and_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let config = write_config(dir.path(), "run.json", &small_config(&out_a));
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(
        code(&output),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    for name in ["aggregate.csv", "trace.csv", "summary.json"] {
        assert!(out_a.join(name).exists(), "{name} missing");
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("group regret at T=50"));
    assert!(stdout.contains("theorem-1"));

    // The summary embeds the resolved configuration; re-running from it
    // must reproduce the CSV byte for byte.
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("summary.json")).unwrap()).unwrap();
    let rerun_config = write_config(
        dir.path(),
        "rerun.json",
        &serde_json::to_string(&summary["resolved_config"]).unwrap(),
    );
    let out_b = dir.path().join("b");
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&rerun_config)
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    assert_eq!(
        fs::read(out_a.join("aggregate.csv")).unwrap(),
        fs::read(out_b.join("aggregate.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("trace.csv")).unwrap(),
        fs::read(out_b.join("trace.csv")).unwrap()
    );
}

#[test]
fn invalid_gamma_fails_validation_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let config = write_config(
        dir.path(),
        "bad.json",
        &small_config(&out).replace("1.1", "1.0"),
    );
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
    assert!(
        !out.exists(),
        "no output directory may be created on failure"
    );
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let config = write_config(
        dir.path(),
        "bad.json",
        &small_config(&out).replace("\"seed\"", "\"sede\""),
    );
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn bounds_table_and_horizon_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("unused");
    let config = write_config(dir.path(), "run.json", &small_config(&out));
    let output = bin()
        .args(["bounds", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.starts_with("arm,gap,T,fusion_lower,theorem1,theorem2"));
    // Best arm rows are marked n/a.
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("1,0,") && l.ends_with("n/a,n/a,n/a")));
    assert!(stdout.lines().any(|l| l.starts_with("2,20,50,")));

    // ln T <= 0 is rejected up front.
    let output = bin()
        .args(["bounds", "--config"])
        .arg(&config)
        .args(["--horizon", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn bounds_reject_drawn_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "draw.json",
        r#"{
            "graph": {"preset": "path3"},
            "kappa": 1.0,
            "policy": {"kind": "coop-ucb2"},
            "environment": {"draw": {"arms": 4, "mean": 75.0, "sd": 25.0, "sigma_s": 30.0}},
            "horizon": 40,
            "runs": 4,
            "seed": 1
        }"#,
    );
    let output = bin()
        .args(["bounds", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("explicit environment"));
}

#[test]
fn replicate_prior_preset_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("preset");
    let output = bin()
        .args([
            "replicate",
            "prior",
            "--runs",
            "4",
            "--horizon",
            "30",
            "--seed",
            "5",
        ])
        .arg("--out")
        .arg(&out)
        .env("COOP_BANDITS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        code(&output),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out.join("prior-comparison.csv").exists());
    assert!(out.join("prior-summary.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("prior-summary.json")).unwrap()).unwrap();
    assert!(summary["group_regret_at_horizon"]["coop-ucl-informative"].is_number());
}

#[test]
fn replicate_fig_b_preset_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figb");
    let output = bin()
        .args([
            "replicate",
            "fig-b",
            "--runs",
            "3",
            "--horizon",
            "25",
            "--seed",
            "9",
        ])
        .arg("--out")
        .arg(&out)
        .env("COOP_BANDITS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        code(&output),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv = fs::read_to_string(out.join("fig-b-comparison.csv")).unwrap();
    assert!(csv.starts_with("t,variant,group_mean_regret"));
    for variant in ["coop-ucb", "coop-ucb2", "coop-ucl", "single-agent-x4"] {
        assert!(csv.contains(variant), "{variant} missing from comparison");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fig-b-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"], 3);
    assert!(summary["graph"]["epsilon_c"].as_array().unwrap().len() == 4);
}

#[test]
fn replicate_fig_c_preset_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figc");
    let output = bin()
        .args([
            "replicate",
            "fig-c",
            "--runs",
            "2",
            "--horizon",
            "20",
            "--seed",
            "3",
        ])
        .arg("--out")
        .arg(&out)
        .env("COOP_BANDITS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        code(&output),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv = fs::read_to_string(out.join("fig-c-nodes.csv")).unwrap();
    assert!(csv.starts_with("graph,node,epsilon_c,epsilon_c_normalized,mean_regret"));
    // 100 graphs x 10 nodes plus the header.
    assert_eq!(csv.lines().count(), 1001);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fig-c-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["graphs"], 100);
    assert!(summary["mean_spearman_correlation"].is_number());
}

#[test]
fn replicate_unknown_preset_exits_2() {
    let output = bin().args(["replicate", "nope"]).output().unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn invalid_thread_cap_exits_2() {
    let output = bin()
        .args(["graph-metrics", "--preset", "path3"])
        .env("COOP_BANDITS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}
