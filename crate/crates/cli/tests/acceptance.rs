//! Acceptance suite. One test per criterion; each prints a [PASS] line with
//! the measured quantities and enforces its runtime budget.
//!
//! Run with `cargo test -p exposure-games-cli --test acceptance -- --nocapture`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use exposure_games::audit::{
    best_rated_proportion_gap, cluster_count, group_max_rating_gap, LabeledEmbeddings,
};
use exposure_games::demand::DemandDistribution;
use exposure_games::game::{self, GameConfig, StrategyProfile};
use exposure_games::hardmax::{
    discretize_sphere, hitting_set_mixed_ne, lp_mixed_ne, mixed_value_against,
    verify_mixed_strategy,
};
use exposure_games::manifold;
use exposure_games::scenarios::{
    self, clustered_demand_3d, hardmax_no_pne_certificate, protective_positioning_report,
    run_check, tau_delta_nonincreasing, triangle_demand, two_basis_demand, verify_eps_pne_bound,
    ScenarioCheck,
};
use exposure_games::solver::{run_lne, Initialization, LneClassification, OptimizerConfig};

use exposure_games_cli::commands::audit::AuditReportFile;

fn budget(name: &str, started: Instant, limit: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= limit,
        "{name} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
}

fn ball_point(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = v.norm();
    if norm == 0.0 {
        return DVector::zeros(d);
    }
    let radius: f64 = rng.random::<f64>().powf(1.0 / d as f64);
    v * (radius / norm)
}

fn unit_point(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

fn random_demand(rng: &mut ChaCha8Rng, d: usize, m: usize) -> DemandDistribution {
    DemandDistribution::uniform((0..m).map(|_| ball_point(rng, d)).collect()).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, d: usize, n: usize) -> StrategyProfile {
    StrategyProfile::new((0..n).map(|_| unit_point(rng, d)).collect()).unwrap()
}

#[test]
fn criterion_01_conservation_and_normalization() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = [2usize, 3, 10, 50];
    let ns = [2usize, 10, 100];
    let taus = [1e-2, 1e-1, 1.0];
    let mut worst_u: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for case in 0..1000 {
        let d = dims[case % dims.len()];
        let n = ns[(case / dims.len()) % ns.len()];
        let tau = taus[(case / (dims.len() * ns.len())) % taus.len()];
        let m = 5 + case % 10;
        let demand = random_demand(&mut rng, d, m);
        let profile = random_profile(&mut rng, d, n);
        let config = GameConfig::new(d, n, tau).unwrap();
        for (c, _) in demand.iter() {
            let p = game::exposure_probabilities(&config, &profile, c).unwrap();
            worst_p = worst_p.max((p.iter().sum::<f64>() - 1.0).abs());
            assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        let u = game::utility(&config, &demand, &profile).unwrap();
        worst_u = worst_u.max((u.iter().sum::<f64>() - 1.0).abs());
    }
    assert!(worst_u <= 1e-12, "sum-u deviation {worst_u}");
    assert!(worst_p <= 1e-12, "sum-p deviation {worst_p}");
    budget("criterion 1", started, Duration::from_secs(30));
    println!(
        "[PASS] criterion 1: 1000 games, max |sum u - 1| = {worst_u:.2e}, max |sum p - 1| = {worst_p:.2e} ({:.2?})",
        started.elapsed()
    );
}

/// Finite-difference oracle: plain softmax utility of arbitrary raw vectors.
fn oracle_utility(tau: f64, dist: &DemandDistribution, strategies: &[DVector<f64>], i: usize) -> f64 {
    let mut u = 0.0;
    for (c, w) in dist.iter() {
        let exps: Vec<f64> = strategies.iter().map(|s| (c.dot(s) / tau).exp()).collect();
        let total: f64 = exps.iter().sum();
        u += w * exps[i] / total;
    }
    u
}

fn oracle_raw_gradient(
    tau: f64,
    dist: &DemandDistribution,
    strategies: &[DVector<f64>],
    i: usize,
) -> DVector<f64> {
    let d = strategies[0].len();
    let mut g = DVector::zeros(d);
    for (c, w) in dist.iter() {
        let exps: Vec<f64> = strategies.iter().map(|s| (c.dot(s) / tau).exp()).collect();
        let total: f64 = exps.iter().sum();
        let p = exps[i] / total;
        g.axpy(w * p * (1.0 - p), c, 1.0);
    }
    g / tau
}

#[test]
fn criterion_02_derivative_oracles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dims = [2usize, 3, 10];
    let ns = [2usize, 5];
    let taus = [0.1, 1.0];
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for case in 0..100 {
        let d = dims[case % dims.len()];
        let n = ns[case % ns.len()];
        let tau = taus[case % taus.len()];
        let demand = random_demand(&mut rng, d, 4 + case % 8);
        let profile = random_profile(&mut rng, d, n);
        let config = GameConfig::new(d, n, tau).unwrap();
        let i = case % n;
        let h = 1e-5;

        let analytic = game::utility_gradient(&config, &demand, &profile, i).unwrap();
        let numeric = DVector::from_fn(d, |k, _| {
            let mut plus = profile.strategies().to_vec();
            plus[i][k] += h;
            let mut minus = profile.strategies().to_vec();
            minus[i][k] -= h;
            (oracle_utility(tau, &demand, &plus, i) - oracle_utility(tau, &demand, &minus, i))
                / (2.0 * h)
        });
        worst_grad = worst_grad.max((&analytic - &numeric).norm() / numeric.norm().max(1e-12));

        let analytic_h = game::utility_hessian(&config, &demand, &profile, i).unwrap();
        let numeric_h = DMatrix::from_fn(d, d, |r, k| {
            let mut plus = profile.strategies().to_vec();
            plus[i][k] += h;
            let mut minus = profile.strategies().to_vec();
            minus[i][k] -= h;
            (oracle_raw_gradient(tau, &demand, &plus, i)[r]
                - oracle_raw_gradient(tau, &demand, &minus, i)[r])
                / (2.0 * h)
        });
        worst_hess =
            worst_hess.max((&analytic_h - &numeric_h).norm() / numeric_h.norm().max(1e-12));
    }
    assert!(worst_grad < 1e-5, "gradient relative error {worst_grad:.2e}");
    assert!(worst_hess < 1e-4, "hessian relative error {worst_hess:.2e}");
    budget("criterion 2", started, Duration::from_secs(60));
    println!(
        "[PASS] criterion 2: 100 games, max gradient err {worst_grad:.2e}, max hessian err {worst_hess:.2e} ({:.2?})",
        started.elapsed()
    );
}

#[test]
fn criterion_03_triangle_certificate() {
    let started = Instant::now();
    let demand = triangle_demand();
    let certificate = hardmax_no_pne_certificate(&demand, 2000).unwrap();
    assert!(
        certificate.min_margin >= 0.1,
        "min margin {}",
        certificate.min_margin
    );

    let scenario = scenarios::triangle_game();
    let outcome = run_check(
        &scenario,
        &ScenarioCheck::MixedSupportValues {
            on_support: 0.5,
            off_arc: 4.0 / 9.0,
            tol: 1e-12,
        },
    )
    .unwrap();
    assert!(outcome.passed, "{}", outcome.details);
    budget("criterion 3", started, Duration::from_secs(300));
    println!(
        "[PASS] criterion 3: margin {:.6} over {} profiles at 2pi/2000; mixed values exact ({:.2?})",
        certificate.min_margin,
        certificate.profiles_checked,
        started.elapsed()
    );
}

#[test]
fn criterion_04_eps_pne_table() {
    let started = Instant::now();
    let demand = two_basis_demand(2.0 / 3.0, 1.0 / 3.0).unwrap();
    let rows = verify_eps_pne_bound(&demand, 2, &[1.0, 2.0, 4.0, 8.0, 16.0], 20_000).unwrap();
    assert!(tau_delta_nonincreasing(&rows, 1e-12), "rows: {rows:?}");
    for row in &rows {
        if let Some(holds) = row.bound_holds {
            assert!(holds, "bound violated at tau = {}: {row:?}", row.tau);
        }
    }
    budget("criterion 4", started, Duration::from_secs(120));
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("tau={} eps={:.2e} d_obs={:.3}", r.tau, r.tau_delta_max, r.delta_observed))
        .collect();
    println!(
        "[PASS] criterion 4: {} ({:.2?})",
        table.join("; "),
        started.elapsed()
    );
}

#[test]
fn criterion_05_protective_positioning() {
    let started = Instant::now();
    let demand = two_basis_demand(0.5, 0.5).unwrap();
    let report = protective_positioning_report(&demand, 0.25, 20_000).unwrap();
    assert!(report.f_at_pi_4.abs() <= 1e-12, "f(pi/4) = {}", report.f_at_pi_4);
    assert!(report.f_at_zero > 0.0, "f(0) = {}", report.f_at_zero);
    assert!(report.f_at_pi_8 < 0.0, "f(pi/8) = {}", report.f_at_pi_8);
    assert!(
        report.theta_star > 0.0 && report.theta_star < std::f64::consts::FRAC_PI_8,
        "theta* = {}",
        report.theta_star
    );
    assert!(
        report.max_defection_improvement <= 1e-9,
        "defection gain {}",
        report.max_defection_improvement
    );
    assert_ne!(report.second_order.classification, LneClassification::Violated);
    budget("criterion 5", started, Duration::from_secs(60));
    println!(
        "[PASS] criterion 5: theta* = {:.9}, defection gain {:.2e}, second-order {:?} ({:.2?})",
        report.theta_star,
        report.max_defection_improvement,
        report.second_order.classification,
        started.elapsed()
    );
}

#[test]
fn criterion_06_critical_point_at_collapse() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 20 {
        let d = 2 + checked % 5;
        let m = 1 + checked % 25;
        let demand = random_demand(&mut rng, d, m);
        if demand.mean().norm() == 0.0 {
            continue;
        }
        let n = 1 + checked % 6;
        let config = GameConfig::new(d, n, 1.0).unwrap();
        let c_bar = demand.consumer_stats(n).unwrap().c_bar().clone();
        let profile = StrategyProfile::new(vec![c_bar; n]).unwrap();
        for i in 0..n {
            let g = game::utility_gradient(&config, &demand, &profile, i).unwrap();
            let rg = manifold::riemannian_gradient(&profile, i, &g).unwrap();
            worst = worst.max(rg.norm());
        }
        checked += 1;
    }
    assert!(worst <= 1e-10, "max Riemannian gradient norm {worst:.2e}");
    budget("criterion 6", started, Duration::from_secs(10));
    println!(
        "[PASS] criterion 6: 20 distributions, max Riemannian gradient at all-c_bar {worst:.2e} ({:.2?})",
        started.elapsed()
    );
}

#[test]
fn criterion_07_hardmax_lp() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = GameConfig::new(2, 2, 0.0).unwrap();
    let mut worst_value: f64 = 0.0;
    for case in 0..50 {
        let demand = random_demand(&mut rng, 2, 2 + case % 6);
        let k = 3 + rng.random_range(0..20);
        let grid = discretize_sphere(2, k).unwrap();
        let (strategy, value) = lp_mixed_ne(&config, &demand, &grid).unwrap();
        worst_value = worst_value.max((value - 0.5).abs());
        let margin = grid
            .iter()
            .map(|g| mixed_value_against(&demand, &strategy, g) - 0.5)
            .fold(f64::INFINITY, f64::min);
        assert!(margin >= -1e-9, "case {case}: margin {margin:.2e}");
    }
    assert!(worst_value <= 1e-9, "value deviation {worst_value:.2e}");

    let triangle = triangle_demand();
    let (strategy, value) = lp_mixed_ne(&config, &triangle, &triangle.points().to_vec()).unwrap();
    assert!((value - 0.5).abs() <= 1e-9);
    for &p in strategy.probs() {
        assert!((p - 1.0 / 3.0).abs() <= 1e-9, "probs {:?}", strategy.probs());
    }
    budget("criterion 7", started, Duration::from_secs(60));
    println!(
        "[PASS] criterion 7: 50 instances |alpha - 1/2| <= {worst_value:.2e}; triangle uniform thirds ({:.2?})",
        started.elapsed()
    );
}

#[test]
fn criterion_08_hitting_set() {
    let started = Instant::now();
    let triangle = triangle_demand();
    let p = hitting_set_mixed_ne(&triangle, 3).unwrap().expect("triangle NE");
    assert_eq!(p.support_size(), 3);
    for &w in p.probs() {
        assert!((w - 1.0 / 3.0).abs() <= 1e-9);
    }
    let margin_triangle = verify_mixed_strategy(&triangle, &p, 10_000).unwrap();
    assert!(margin_triangle >= -1e-9);

    let antipodal = DemandDistribution::uniform(vec![
        DVector::from_row_slice(&[1.2, 0.0]),
        DVector::from_row_slice(&[-1.2, 0.0]),
    ])
    .unwrap();
    let p = hitting_set_mixed_ne(&antipodal, 2).unwrap().expect("antipodal NE");
    assert_eq!(p.support_size(), 2);
    for &w in p.probs() {
        assert!((w - 0.5).abs() <= 1e-9);
    }
    let margin_antipodal = verify_mixed_strategy(&antipodal, &p, 10_000).unwrap();
    assert!(margin_antipodal >= -1e-9);
    budget("criterion 8", started, Duration::from_secs(60));
    println!(
        "[PASS] criterion 8: triangle -> P_c (margin {margin_triangle:.2e}), antipodal -> half/half (margin {margin_antipodal:.2e}) ({:.2?})",
        started.elapsed()
    );
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exposure-games"))
}

fn run_cli(cmd: &mut Command) {
    let output = cmd.output().expect("spawn binary");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn write_smoke_ratings(path: &Path, users: usize, items: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let user_vecs: Vec<[f64; 3]> = (0..users)
        .map(|_| std::array::from_fn(|_| 0.4 + 0.4 * rng.random::<f64>()))
        .collect();
    let item_vecs: Vec<[f64; 3]> = (0..items)
        .map(|_| std::array::from_fn(|_| 0.4 + 0.4 * rng.random::<f64>()))
        .collect();
    let mut body = String::from("user_id,item_id,rating,user_group,item_group\n");
    for (u, uv) in user_vecs.iter().enumerate() {
        for (i, iv) in item_vecs.iter().enumerate() {
            if rng.random::<f64>() < 0.25 {
                let dot: f64 = uv.iter().zip(iv).map(|(a, b)| a * b).sum();
                let ug = if u % 3 == 0 { "F" } else { "M" };
                let ig = if i % 4 == 0 { "F" } else { "M" };
                body.push_str(&format!(
                    "u{u:04},i{i:03},{:.4},{ug},{ig}\n",
                    2.5 + dot + 0.05 * rng.random::<f64>()
                ));
            }
        }
    }
    fs::write(path, body).unwrap();
}

#[test]
fn criterion_09_cluster_emergence_and_smoke_run() {
    // Part one: cluster emergence on the synthetic 200-consumer demand.
    let started = Instant::now();
    let demand = clustered_demand_3d(200, 0.15, 7);
    let c_bar = demand.consumer_stats(10).unwrap().c_bar().clone();
    let config_high = GameConfig::new(3, 10, 1.0).unwrap();
    for seed in [1u64, 2, 3] {
        let opt = OptimizerConfig::new(0.1, seed);
        let record = run_lne(&config_high, &demand, &opt, Initialization::Seeded).unwrap();
        assert!(record.converged, "tau=1 seed {seed} did not converge");
        assert_eq!(
            cluster_count(&record.final_profile),
            1,
            "tau=1 seed {seed} produced multiple clusters"
        );
        for s in record.final_profile.strategies() {
            assert!(
                (s - &c_bar).norm() <= 1e-3,
                "tau=1 seed {seed}: distance {}",
                (s - &c_bar).norm()
            );
        }
    }
    let config_low = GameConfig::new(3, 10, 1e-2).unwrap();
    let mut max_clusters = 0;
    for seed in [1u64, 2, 3] {
        let opt = OptimizerConfig::new(0.01, seed);
        let record = run_lne(&config_low, &demand, &opt, Initialization::Seeded).unwrap();
        max_clusters = max_clusters.max(cluster_count(&record.final_profile));
    }
    assert!(max_clusters >= 2, "no local clustering at tau = 1e-2");
    budget("criterion 9 (clusters)", started, Duration::from_secs(300));
    let cluster_elapsed = started.elapsed();

    // Part two: subsampled end-to-end smoke run through the binary.
    let smoke_started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_smoke_ratings(&ratings, 300, 40);
    let train_out = dir.path().join("train");
    run_cli(
        bin()
            .arg("train")
            .arg("--ratings")
            .arg(&ratings)
            .args(["--variant", "pmf", "--d", "3"])
            .args(["--epochs", "30", "--lr", "0.02", "--reg", "0.05", "--seed", "0"])
            .arg("--out")
            .arg(&train_out),
    );
    let solve_out = dir.path().join("solve");
    run_cli(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(train_out.join("users.csv"))
            .args(["--tau", "1", "--n", "5", "--step", "0.1", "--runs", "2"])
            .arg("--out")
            .arg(&solve_out),
    );
    let audit_out = dir.path().join("audit");
    run_cli(
        bin()
            .arg("audit")
            .arg("--records")
            .arg(&solve_out)
            .arg("--users")
            .arg(train_out.join("users.csv"))
            .arg("--items")
            .arg(train_out.join("items.csv"))
            .arg("--out")
            .arg(&audit_out),
    );
    let report: AuditReportFile =
        serde_json::from_str(&fs::read_to_string(audit_out.join("audit.json")).unwrap())
            .expect("schema-valid audit report");
    assert!(report.cluster.is_some());
    assert!(report.gender_gap.is_some());
    assert!(report.neighborhood.is_some());
    budget("criterion 9 (smoke)", smoke_started, Duration::from_secs(900));
    println!(
        "[PASS] criterion 9: collapse at tau=1, {max_clusters} clusters at tau=1e-2 ({cluster_elapsed:.2?}); smoke train->solve->audit ok ({:.2?})",
        smoke_started.elapsed()
    );
}

#[test]
fn criterion_10_audit_metric_properties() {
    let started = Instant::now();
    let v = |x: &[f64]| DVector::from_row_slice(x);

    // label-swap antisymmetry is exact
    let consumers = LabeledEmbeddings::new(
        vec![v(&[1.0, 0.2]), v(&[0.4, 1.0]), v(&[0.9, 0.5]), v(&[0.1, 0.8])],
        vec!["A".into(), "B".into(), "A".into(), "B".into()],
    )
    .unwrap();
    let profile = StrategyProfile::new(vec![
        v(&[0.6, 0.8]),
        v(&[1.0, 0.0]),
        v(&[0.0, 1.0]),
    ])
    .unwrap();
    let ab = group_max_rating_gap(&consumers, profile.strategies(), "A", "B").unwrap();
    let ba = group_max_rating_gap(&consumers, profile.strategies(), "B", "A").unwrap();
    assert_eq!(ab, -ba);
    let ab = best_rated_proportion_gap(&consumers, profile.strategies(), "A", "B").unwrap();
    let ba = best_rated_proportion_gap(&consumers, profile.strategies(), "B", "A").unwrap();
    assert_eq!(ab, -ba);

    // cosine scale invariance is exact (power-of-two scaling)
    let scaled = LabeledEmbeddings::new(
        consumers.points().iter().map(|c| c * 1024.0).collect(),
        consumers.labels().to_vec(),
    )
    .unwrap();
    assert_eq!(
        group_max_rating_gap(&consumers, profile.strategies(), "A", "B").unwrap(),
        group_max_rating_gap(&scaled, profile.strategies(), "A", "B").unwrap()
    );
    assert_eq!(
        best_rated_proportion_gap(&consumers, profile.strategies(), "A", "B").unwrap(),
        best_rated_proportion_gap(&scaled, profile.strategies(), "A", "B").unwrap()
    );

    // forced two-group fixtures
    let two_group = LabeledEmbeddings::new(
        vec![v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 1.0])],
        vec!["A".into(), "A".into(), "B".into(), "B".into()],
    )
    .unwrap();
    let all_a = StrategyProfile::new(vec![v(&[1.0, 0.0]), v(&[1.0, 0.0])]).unwrap();
    assert_eq!(
        group_max_rating_gap(&two_group, all_a.strategies(), "A", "B").unwrap(),
        1.0
    );
    assert_eq!(
        best_rated_proportion_gap(&two_group, all_a.strategies(), "A", "B").unwrap(),
        1.0
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bisector = StrategyProfile::new(vec![v(&[h, h]), v(&[h, h])]).unwrap();
    assert_eq!(
        group_max_rating_gap(&two_group, bisector.strategies(), "A", "B").unwrap(),
        0.0
    );
    let split = StrategyProfile::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
    assert_eq!(
        best_rated_proportion_gap(&two_group, split.strategies(), "A", "B").unwrap(),
        0.0
    );
    let single_b = StrategyProfile::new(vec![v(&[0.0, 1.0])]).unwrap();
    assert_eq!(
        best_rated_proportion_gap(&two_group, single_b.strategies(), "A", "B").unwrap(),
        -1.0
    );
    budget("criterion 10", started, Duration::from_secs(10));
    println!(
        "[PASS] criterion 10: antisymmetry and scale invariance exact, forced gaps (1, 0, -1) reproduced ({:.2?})",
        started.elapsed()
    );
}

#[test]
fn criterion_11_replay_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_smoke_ratings(&ratings, 40, 12);

    let train_out = dir.path().join("train");
    run_cli(
        bin()
            .arg("train")
            .arg("--ratings")
            .arg(&ratings)
            .args(["--variant", "pmf", "--d", "2"])
            .args(["--epochs", "25", "--lr", "0.02", "--reg", "0.05", "--seed", "1"])
            .arg("--out")
            .arg(&train_out),
    );
    let solve_out = dir.path().join("solve");
    run_cli(
        bin()
            .arg("solve")
            .arg("--embeddings")
            .arg(train_out.join("users.csv"))
            .args(["--tau", "0.5,1", "--n", "3", "--step", "0.1", "--runs", "2"])
            .args(["--max-iters", "5000"])
            .env("EXPOSURE_GAMES_WORKERS", "1")
            .arg("--out")
            .arg(&solve_out),
    );
    let audit_out = dir.path().join("audit");
    run_cli(
        bin()
            .arg("audit")
            .arg("--records")
            .arg(&solve_out)
            .arg("--users")
            .arg(train_out.join("users.csv"))
            .arg("--items")
            .arg(train_out.join("items.csv"))
            .arg("--out")
            .arg(&audit_out),
    );

    // Replays under different worker-pool sizes must be byte-identical,
    // manifest excluded (it records wall-clock).
    let compare_dirs = |a: &Path, b: &Path| {
        let mut names: Vec<String> = fs::read_dir(a)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != "manifest.json")
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let left = fs::read(a.join(&name)).unwrap();
            let right = fs::read(b.join(&name)).unwrap();
            assert_eq!(left, right, "{name} differs between replays");
        }
    };

    for (manifest_dir, kind) in [(&train_out, "train"), (&solve_out, "solve"), (&audit_out, "audit")] {
        let replay_a = dir.path().join(format!("{kind}-replay-w1"));
        let replay_b = dir.path().join(format!("{kind}-replay-w4"));
        run_cli(
            bin()
                .arg("replay")
                .arg("--manifest")
                .arg(manifest_dir.join("manifest.json"))
                .env("EXPOSURE_GAMES_WORKERS", "1")
                .arg("--out")
                .arg(&replay_a),
        );
        run_cli(
            bin()
                .arg("replay")
                .arg("--manifest")
                .arg(manifest_dir.join("manifest.json"))
                .env("EXPOSURE_GAMES_WORKERS", "4")
                .arg("--out")
                .arg(&replay_b),
        );
        compare_dirs(manifest_dir, &replay_a);
        compare_dirs(&replay_a, &replay_b);
    }
    println!(
        "[PASS] criterion 11: train/solve/audit replays byte-identical under worker pools 1 and 4 ({:.2?})",
        started.elapsed()
    );
}
