//! Behavior of the command-line surface: file contracts, error paths, and
//! grid bookkeeping. The binary is driven directly.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use exposure_games_cli::commands::audit::AuditReportFile;
use exposure_games_cli::commands::solve::SolveSummary;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exposure-games"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("spawn binary");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn run_err(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawn binary");
    assert!(!output.status.success(), "command unexpectedly succeeded");
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Deterministic synthetic ratings with planted rank-3 structure and both
/// group columns.
fn write_ratings(path: &Path, users: usize, items: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let user_vecs: Vec<[f64; 3]> = (0..users)
        .map(|_| std::array::from_fn(|_| 0.5 + 0.3 * rng.random::<f64>()))
        .collect();
    let item_vecs: Vec<[f64; 3]> = (0..items)
        .map(|_| std::array::from_fn(|_| 0.5 + 0.3 * rng.random::<f64>()))
        .collect();
    let mut body = String::from("user_id,item_id,rating,user_group,item_group\n");
    for (u, uv) in user_vecs.iter().enumerate() {
        for (i, iv) in item_vecs.iter().enumerate() {
            if rng.random::<f64>() < 0.4 {
                let dot: f64 = uv.iter().zip(iv).map(|(a, b)| a * b).sum();
                let rating = 2.0 + dot + 0.05 * rng.random::<f64>();
                let ug = if u % 3 == 0 { "F" } else { "M" };
                let ig = if i % 4 == 0 { "F" } else { "M" };
                body.push_str(&format!("u{u:03},i{i:03},{rating:.4},{ug},{ig}\n"));
            }
        }
    }
    fs::write(path, body).unwrap();
}

fn train(dir: &Path, ratings: &Path, variant: &str, d: usize) -> PathBuf {
    let out = dir.join(format!("train-{variant}-{d}"));
    run_ok(
        bin()
            .arg("train")
            .arg("--ratings")
            .arg(ratings)
            .args(["--variant", variant])
            .args(["--d", &d.to_string()])
            .args(["--epochs", "40", "--lr", "0.02", "--reg", "0.05", "--seed", "3"])
            .arg("--out")
            .arg(&out),
    );
    out
}

#[test]
fn train_writes_embedding_tables_with_requested_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings, 25, 12, 1);
    let out = train(dir.path(), &ratings, "pmf", 3);

    let users = fs::read_to_string(out.join("users.csv")).unwrap();
    let header = users.lines().next().unwrap();
    assert_eq!(header, "id,x0,x1,x2,group");
    assert_eq!(users.lines().count(), 26);
    let items = fs::read_to_string(out.join("items.csv")).unwrap();
    assert!(items.starts_with("id,x0,x1,x2,group"));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["d"], 3);
    assert!(metrics["train_rmse"].as_f64().unwrap() >= 0.0);
}

#[test]
fn nmf_rejects_negative_rating_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    fs::write(
        &ratings,
        "user_id,item_id,rating\nu1,i1,2.0\nu1,i2,-1.0\nu2,i1,1.0\n",
    )
    .unwrap();
    let stderr = run_err(
        bin()
            .arg("train")
            .arg("--ratings")
            .arg(&ratings)
            .args(["--variant", "nmf", "--out"])
            .arg(dir.path().join("out")),
    );
    assert!(stderr.contains(":3:"), "no line number in: {stderr}");
    assert!(stderr.contains("-1"), "offending value missing: {stderr}");
}

#[test]
fn solve_grid_produces_expected_record_count() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings, 20, 10, 2);
    let trained = train(dir.path(), &ratings, "pmf", 2);

    let out = dir.path().join("solve");
    run_ok(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(trained.join("users.csv"))
            .args(["--tau", "0.5,1", "--n", "3", "--step", "0.1"])
            .args(["--runs", "2", "--max-iters", "3000"])
            .arg("--out")
            .arg(&out),
    );
    let summary: SolveSummary =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    // 2 taus x 1 n x 1 step x 1 source x 2 runs
    assert_eq!(summary.total_runs, 4);
    assert_eq!(summary.written_runs, 4);
    let records = fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("run-")
        })
        .count();
    assert_eq!(records, 4);
}

#[test]
fn confirmed_only_filters_unconfirmed_records() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings, 16, 8, 5);
    let trained = train(dir.path(), &ratings, "pmf", 2);

    // A run cut off after 3 iterations cannot pass the gradient threshold.
    let out = dir.path().join("solve-cutoff");
    run_ok(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(trained.join("users.csv"))
            .args(["--tau", "1", "--n", "4", "--step", "0.01"])
            .args(["--runs", "2", "--max-iters", "3", "--confirmed-only"])
            .arg("--out")
            .arg(&out),
    );
    let summary: SolveSummary =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.total_runs, 2);
    assert_eq!(summary.written_runs, 0);
    assert!(summary.records.iter().all(|r| r.file.is_none()));
}

#[test]
fn audit_requires_group_labels_for_gender_metrics() {
    let dir = tempfile::tempdir().unwrap();
    // unlabeled embeddings
    let users = dir.path().join("users.csv");
    fs::write(&users, "id,x0,x1\na,1.0,0.0\nb,0.0,1.0\n").unwrap();
    let out = dir.path().join("solve");
    run_ok(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(&users)
            .args(["--tau", "1", "--n", "2", "--step", "0.1"])
            .args(["--runs", "1", "--max-iters", "500"])
            .arg("--out")
            .arg(&out),
    );
    let stderr = run_err(
        bin()
            .arg("audit")
            .arg("--records")
            .arg(&out)
            .arg("--users")
            .arg(&users)
            .args(["--metrics", "gender-gap"])
            .arg("--out")
            .arg(dir.path().join("audit")),
    );
    assert!(stderr.contains("group"), "unexpected error: {stderr}");
}

#[test]
fn audit_report_covers_all_requested_families() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings, 30, 12, 7);
    let trained = train(dir.path(), &ratings, "nmf", 2);
    let out = dir.path().join("solve");
    run_ok(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(trained.join("users.csv"))
            .args(["--tau", "1", "--n", "4", "--step", "0.1"])
            .args(["--runs", "2", "--max-iters", "30000"])
            .arg("--out")
            .arg(&out),
    );
    let audit_out = dir.path().join("audit");
    run_ok(
        bin()
            .arg("audit")
            .arg("--records")
            .arg(&out)
            .arg("--users")
            .arg(trained.join("users.csv"))
            .arg("--items")
            .arg(trained.join("items.csv"))
            .arg("--out")
            .arg(&audit_out),
    );
    let report: AuditReportFile =
        serde_json::from_str(&fs::read_to_string(audit_out.join("audit.json")).unwrap()).unwrap();
    let cluster = report.cluster.expect("cluster section");
    assert_eq!(cluster.per_run.len(), 2);
    let gender = report.gender_gap.expect("gender section");
    assert!(gender.baseline.is_some());
    for row in &gender.per_run {
        assert!(row.best_rated_proportion_gap.abs() <= 1.0);
    }
    let neighborhood = report.neighborhood.expect("neighborhood section");
    assert!(!neighborhood.ks.is_empty());
    // long CSV sanity
    let csv = fs::read_to_string(audit_out.join("audit.csv")).unwrap();
    assert!(csv.starts_with("metric,config,seed,x,y\n"));
    assert!(csv.contains("cluster_count"));
    assert!(csv.contains("median_max_rating_gap,b,b"));
    assert!(csv.contains("neighborhood_proportion_gap"));
}

#[test]
fn scenario_file_definitions_run() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("custom.toml");
    fs::write(
        &file,
        r#"
name = "custom-two-basis"
tau = 1.0
n = 2
nonneg = true

[demand]
points = [[1.0, 0.0], [0.0, 1.0]]
weights = [0.6666666666666666, 0.3333333333333334]

[[checks]]
kind = "critical-point"
tol = 1e-10

[[checks]]
kind = "conservation"
samples = 10
seed = 0

[[checks]]
kind = "eps-pne-table"
taus = [1.0, 2.0]
grid_resolution = 500
"#,
    )
    .unwrap();
    let out = dir.path().join("scenario");
    let output = run_ok(
        bin()
            .arg("scenario")
            .arg("--file")
            .arg(&file)
            .arg("--out")
            .arg(&out),
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(stdout.matches("[PASS]").count(), 3, "stdout: {stdout}");
    assert!(out.join("scenario.json").exists());
}

#[test]
fn unknown_scenario_name_errors() {
    let stderr = run_err(bin().arg("scenario").arg("not-a-scenario"));
    assert!(stderr.contains("unknown scenario"), "stderr: {stderr}");
}

#[test]
fn hardmax_hitting_set_support_bound_error() {
    let dir = tempfile::tempdir().unwrap();
    let stderr = run_err(
        bin()
            .arg("hardmax")
            .args(["--method", "hitting-set", "--scenario", "triangle"])
            .args(["--max-support", "1"])
            .arg("--out")
            .arg(dir.path().join("h")),
    );
    assert!(stderr.contains("no mixed NE"), "stderr: {stderr}");
}

#[test]
fn hardmax_grid_overflow_guard() {
    let dir = tempfile::tempdir().unwrap();
    let stderr = run_err(
        bin()
            .arg("hardmax")
            .args(["--method", "lp", "--scenario", "triangle"])
            .args(["--d", "4", "--k", "10000"])
            .arg("--out")
            .arg(dir.path().join("h")),
    );
    assert!(stderr.contains("exceeds the cap"), "stderr: {stderr}");
}

#[test]
fn replay_rejects_modified_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings, 10, 6, 9);
    let out = train(dir.path(), &ratings, "pmf", 2);
    // tamper with the input
    let mut body = fs::read_to_string(&ratings).unwrap();
    body.push_str("u999,i999,5.0,M,M\n");
    fs::write(&ratings, body).unwrap();
    let stderr = run_err(
        bin()
            .arg("replay")
            .arg("--manifest")
            .arg(out.join("manifest.json"))
            .arg("--out")
            .arg(dir.path().join("replayed")),
    );
    assert!(stderr.contains("changed since"), "stderr: {stderr}");
}
