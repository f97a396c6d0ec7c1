//! End-to-end tests against the built binary: exit codes, output formats,
//! and the published-table reproductions.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fecburst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn qdist_prints_distribution_and_residual_rate() {
    let out = run(&["qdist", "--n", "1", "--k", "1", "--p", "0.5"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], vec!["i", "q"]);
    assert_eq!(rows[1][0], "0");
    assert!((rows[1][1].parse::<f64>().unwrap() - 0.75).abs() < 1e-11);
    assert!((rows[2][1].parse::<f64>().unwrap() - 0.25).abs() < 1e-11);
    assert_eq!(rows[3][0], "p_L");
    assert!((rows[3][1].parse::<f64>().unwrap() - 0.25).abs() < 1e-11);
}

#[test]
fn qdist_with_zero_loss_probability() {
    let out = run(&["qdist", "--n", "10", "--k", "3", "--p", "0.0"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0);
    for row in &rows[2..12] {
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    }
    assert_eq!(rows[12][1].parse::<f64>().unwrap(), 0.0); // p_L
}

#[test]
fn out_of_range_probability_is_a_validation_error() {
    let out = run(&["qdist", "--n", "10", "--k", "3", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p out of range"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn burst_single_matches_the_hand_value() {
    let out = run(&["burst", "--n", "2", "--k", "0", "--p", "0.5", "--mode", "single"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], vec!["value"]);
    assert!((rows[1][0].parse::<f64>().unwrap() - 4.0 / 3.0).abs() < 1e-10);
}

#[test]
fn burst_multi_reports_terms_from_the_epsilon_target() {
    let out = run(&[
        "burst", "--n", "10", "--k", "3", "--p", "0.1", "--mode", "multi", "--epsilon", "0.005",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], vec!["value", "terms_used", "error_bound"]);
    assert_eq!(rows[1][1], "2");
    let value = rows[1][0].parse::<f64>().unwrap();
    assert!((value - 1.42283).abs() < 1e-4);
    let bound = rows[1][2].parse::<f64>().unwrap();
    assert!(bound < 0.005);
}

#[test]
fn burst_multi_over_the_cap_exits_four_and_names_the_requirement() {
    let out = run(&[
        "burst", "--n", "10", "--k", "3", "--p", "0.9", "--mode", "multi", "--epsilon", "0.005",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("1332794850"));
}

#[test]
fn burst_multi_accepts_an_explicit_term_count() {
    let out = run(&[
        "burst", "--n", "4", "--k", "1", "--p", "0.3", "--mode", "multi", "--terms", "3",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[1][1], "3");
}

#[test]
fn burst_without_possible_losses_exits_three() {
    let out = run(&["burst", "--n", "10", "--k", "3", "--p", "0", "--mode", "multi"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no losses possible"));
    let single = run(&["burst", "--n", "10", "--k", "3", "--p", "0", "--mode", "single"]);
    assert_eq!(single.status.code(), Some(3));
}

#[test]
fn burst_flag_conflicts_are_validation_errors() {
    let both = run(&[
        "burst", "--n", "4", "--k", "1", "--p", "0.3", "--mode", "multi", "--epsilon", "0.01",
        "--terms", "2",
    ]);
    assert_eq!(both.status.code(), Some(2));
    let single_eps = run(&[
        "burst", "--n", "4", "--k", "1", "--p", "0.3", "--mode", "single", "--epsilon", "0.01",
    ]);
    assert_eq!(single_eps.status.code(), Some(2));
}

#[test]
fn required_terms_reproduces_the_published_column() {
    let out = run(&[
        "required-terms", "--n", "10", "--k", "3", "--p", "0.05,0.25,0.4,1.0",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], vec!["p", "q0", "n"]);
    assert_eq!(rows[1][2], "1");
    assert_eq!(rows[2][2], "11");
    assert_eq!(rows[3][2], "64");
    assert_eq!(rows[4][2], "NA"); // p = 1: the series never terminates
}

#[test]
fn sweep_compares_coded_against_uncoded() {
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--p-min", "0", "--p-max", "0.3", "--p-step", "0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0],
        vec!["p", "ec_coded", "terms_used", "error_bound", "ec_uncoded", "p_residual"]
    );
    // p = 0: no losses, markers instead of values.
    assert_eq!(rows[1][1], "NA");
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 1.0);
    let mut prev = 0.0;
    for row in &rows[2..] {
        let p = row[0].parse::<f64>().unwrap();
        let coded = row[1].parse::<f64>().unwrap();
        let uncoded = row[4].parse::<f64>().unwrap();
        let residual = row[5].parse::<f64>().unwrap();
        assert!(coded >= uncoded, "p = {p}");
        assert!(coded >= prev, "p = {p}");
        assert!(residual <= p);
        prev = coded;
    }
    assert_eq!(rows.len(), 8); // header + p in {0, 0.05, .., 0.3}
}

#[test]
fn sweep_writes_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--p-min", "0.1", "--p-max", "0.2", "--p-step", "0.05",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let content = std::fs::read_to_string(&path).unwrap();
    assert!(content.starts_with("p,ec_coded"));
    assert_eq!(content.lines().count(), 4);
}

#[test]
fn sweep_to_an_unwritable_path_exits_five() {
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--p-min", "0.1", "--p-max", "0.2", "--p-step", "0.05",
        "--out", "/nonexistent-dir/fig.csv",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn sweep_range_validation() {
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--p-min", "0.3", "--p-max", "0.1", "--p-step", "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--p-min", "0.1", "--p-max", "1.0", "--p-step", "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = [
        "simulate", "--n", "10", "--k", "3", "--p", "0.1", "--blocks", "20000", "--seed", "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other[10] = "100";
    let c = run(&other);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_uncoded_stream_matches_the_geometric_run_length() {
    let out = run(&[
        "simulate", "--n", "16", "--k", "0", "--p", "0.3", "--blocks", "100000", "--seed", "5",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mean = v["burst_length_mean"].as_f64().unwrap();
    let se = v["standard_error_burst"].as_f64().unwrap();
    assert!((mean - 1.0 / 0.7).abs() <= 4.0 * se);
}

#[test]
fn simulate_matches_the_analytical_q0() {
    let out = run(&[
        "simulate", "--n", "10", "--k", "3", "--p", "0.1", "--blocks", "1000000", "--seed", "31",
        "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let q0_count = v["empirical_q"][0].as_u64().unwrap();
    let q0 = 0.9658392790770004f64;
    let se = (q0 * (1.0 - q0) / 1e6).sqrt();
    assert!((q0_count as f64 / 1e6 - q0).abs() <= 4.0 * se);
}

#[test]
fn simulate_rejects_zero_blocks() {
    let out = run(&["simulate", "--n", "4", "--k", "1", "--p", "0.2", "--blocks", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
