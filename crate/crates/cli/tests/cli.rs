//! End-to-end tests of the binary: subcommands, exit codes, and output
//! formats.

use std::path::Path;
use std::process::{Command, Output};

fn commtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commtest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn test_subcommand_accepts_path_graph() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("path.edges");
    write(&edges, "3\n0 1\n1 2\n");
    let out = commtest(&["test", edges.to_str().unwrap(), "--statistic", "chi2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["raw"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(report["statistic_name"], "chi2");
}

#[test]
fn test_subcommand_rejects_structured_network() {
    // Two dense blocks, nothing between: oSQ rejects decisively.
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("blocks.edges");
    let mut text = String::from("40\n");
    for i in 0..40usize {
        for j in (i + 1)..40 {
            if (i < 20) == (j < 20) {
                text.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    write(&edges, &text);
    let out = commtest(&["test", edges.to_str().unwrap(), "--statistic", "osq"]);
    assert_eq!(out.status.code(), Some(3), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["reject"], true);
}

#[test]
fn test_subcommand_error_paths() {
    let out = commtest(&["test", "/nonexistent/file.edges"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file.edges"));

    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("dup.edges");
    write(&edges, "3\n0 1\n0 1\n");
    let out = commtest(&["test", edges.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn simulate_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("net.edges");
    let args = [
        "simulate",
        "--preset",
        "exp4_symmetric",
        "--n",
        "30",
        "--seed",
        "9",
        "--output",
        out_path.to_str().unwrap(),
    ];
    assert_eq!(commtest(&args).status.code(), Some(0));
    let first = std::fs::read(&out_path).unwrap();
    assert_eq!(commtest(&args).status.code(), Some(0));
    let second = std::fs::read(&out_path).unwrap();
    assert_eq!(first, second);
    assert!(first.starts_with(b"30\n"));

    // generated output feeds straight back into `test`
    let out = commtest(&["test", out_path.to_str().unwrap(), "--statistic", "pe"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
}

#[test]
fn simulate_from_explicit_params() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.toml");
    write(
        &params,
        r#"
k = 2
n = 12
p = [[0.6, 0.1], [0.1, 0.6]]

[membership]
kind = "pure"
h = [0.5, 0.5]
"#,
    );
    let out = commtest(&["simulate", "--params", params.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("12\n"));
}

#[test]
fn snr_preset_and_explicit_agree() {
    let preset = commtest(&["snr", "--preset", "example1_S", "--a", "0.2", "--b", "0.05", "--n", "300"]);
    assert_eq!(preset.status.code(), Some(0));
    let a: serde_json::Value = serde_json::from_slice(&preset.stdout).unwrap();

    let explicit = commtest(&[
        "snr", "--k", "2", "--p", "0.2,0.05;0.05,0.2", "--h", "0.5,0.5", "--n", "300",
    ]);
    assert_eq!(explicit.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_slice(&explicit.stdout).unwrap();

    assert_eq!(a["alpha0"], b["alpha0"]);
    assert_eq!(a["tau_n"], b["tau_n"]);
    assert!((a["tau_n"].as_f64().unwrap() - 2916.0).abs() < 1e-9);

    // missing pieces are config errors
    assert_eq!(commtest(&["snr", "--k", "2", "--n", "10"]).status.code(), Some(2));
    assert_eq!(commtest(&["snr", "--preset", "nope"]).status.code(), Some(2));
}

#[test]
fn inc_subcommand_reads_dense_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let omega = dir.path().join("omega.txt");
    write(&omega, "0.1 0.1 0.1\n0.1 0.1 0.1\n0.1 0.1 0.1\n");
    let out = commtest(&["inc", "--omega", omega.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["rank"], 1);
    assert_eq!(result["vertex_count"], 1);
}

#[test]
fn inc_subcommand_builds_from_params() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.toml");
    write(
        &params,
        r#"
k = 3
n = 30
p = [[0.3, 0.05, 0.05], [0.05, 0.3, 0.05], [0.05, 0.05, 0.3]]

[membership]
kind = "pure"
h = [0.34, 0.33, 0.33]
"#,
    );
    let out = commtest(&["inc", "--params", params.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["vertex_count"], 3);
}

#[test]
fn experiment_subcommand_writes_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    write(
        &config,
        r#"
kind = "null_calibration"
scenario = "null"
replications = 10
level = 0.05
seed = 21

[grid]
n = [30]
alpha = [0.2]
"#,
    );
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let status = commtest(&[
        "experiment", "--config", config.to_str().unwrap(),
        "--threads", "1", "--quiet", "--output", out_a.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&status.stderr));
    let status = commtest(&[
        "experiment", "--config", config.to_str().unwrap(),
        "--threads", "4", "--quiet", "--output", out_b.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    assert_eq!(std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());

    // JSON format to stdout
    let out = commtest(&[
        "experiment", "--config", config.to_str().unwrap(), "--quiet", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed.is_array());

    // bad config is a config error
    let bad = dir.path().join("bad.toml");
    write(&bad, "kind = \"null_calibration\"\n");
    assert_eq!(
        commtest(&["experiment", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
