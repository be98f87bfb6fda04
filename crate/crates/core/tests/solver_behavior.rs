//! End-to-end behavior of the ascent runs: concentration at high
//! temperature, the four-player protective equilibrium, and the uniform
//! gradient convergence behind the concentration theorem.

use exposure_games::demand::DemandDistribution;
use exposure_games::game::{self, GameConfig, StrategyProfile};
use exposure_games::scenarios::{self, two_basis_demand};
use exposure_games::solver::{run_lne, Initialization, OptimizerConfig};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn shifted_ball_demand(d: usize, m: usize, seed: u64) -> DemandDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = DVector::from_element(d, 0.4);
    let points = (0..m)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal));
            &shift + v
        })
        .collect();
    DemandDistribution::uniform(points).unwrap()
}

#[test]
fn high_temperature_collapses_onto_the_mean_direction() {
    let demand = shifted_ball_demand(3, 40, 5);
    let config = GameConfig::new(3, 4, 1.0).unwrap();
    let c_bar = demand.consumer_stats(4).unwrap().c_bar().clone();
    for seed in [0u64, 1, 2] {
        let opt = OptimizerConfig::new(0.1, seed);
        let record = run_lne(&config, &demand, &opt, Initialization::Seeded).unwrap();
        assert!(record.converged, "seed {seed} did not converge");
        for s in record.final_profile.strategies() {
            assert!(
                (s - &c_bar).norm() <= 1e-3,
                "seed {seed}: strategy {:.6?} far from c_bar",
                s.as_slice()
            );
        }
        for pair in record.final_profile.strategies().windows(2) {
            assert!((&pair[0] - &pair[1]).norm() <= 1e-3);
        }
    }
}

#[test]
fn symmetric_init_converges_to_protective_profile() {
    let demand = two_basis_demand(0.5, 0.5).unwrap();
    let tau = 0.25;
    let theta_star = scenarios::solve_theta_star(&demand, tau).unwrap();
    let config = GameConfig::new(2, 4, tau).unwrap();
    let phi = |t: f64| DVector::from_row_slice(&[t.cos(), t.sin()]);
    let start = 0.02;
    let init = StrategyProfile::new(vec![
        phi(start),
        phi(start),
        phi(std::f64::consts::FRAC_PI_2 - start),
        phi(std::f64::consts::FRAC_PI_2 - start),
    ])
    .unwrap();
    let opt = OptimizerConfig::new(0.05, 0);
    let record = run_lne(&config, &demand, &opt, Initialization::Profile(init)).unwrap();
    assert!(record.converged);
    let angles: Vec<f64> = record
        .final_profile
        .strategies()
        .iter()
        .map(|s| s[1].atan2(s[0]))
        .collect();
    assert!((angles[0] - theta_star).abs() < 1e-4, "theta_1 = {}", angles[0]);
    assert!((angles[1] - theta_star).abs() < 1e-4);
    let mirrored = std::f64::consts::FRAC_PI_2 - theta_star;
    assert!((angles[2] - mirrored).abs() < 1e-4);
    assert!((angles[3] - mirrored).abs() < 1e-4);
}

#[test]
fn rescaled_gradients_converge_uniformly_to_c_hat() {
    // sup over random deviations of ||tau * grad u_1 - c_hat|| shrinks
    // monotonically in tau and is tiny by tau = 1000.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 3;
    let m = 30;
    let n = 5;
    let points: Vec<DVector<f64>> = (0..m)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = v.norm();
            let radius: f64 = rng.random::<f64>().powf(1.0 / d as f64);
            v * (radius / norm)
        })
        .collect();
    let demand = DemandDistribution::uniform(points).unwrap();
    let stats = demand.consumer_stats(n).unwrap();
    let c_bar = stats.c_bar().clone();
    let c_hat = stats.c_hat().clone();

    let deviations: Vec<DVector<f64>> = (0..1000)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = v.norm();
            v / norm
        })
        .collect();

    let mut previous = f64::INFINITY;
    for tau in [1.0, 10.0, 100.0, 1000.0] {
        let config = GameConfig::new(d, n, tau).unwrap();
        let mut sup: f64 = 0.0;
        for s1 in &deviations {
            let mut strategies = vec![s1.clone()];
            strategies.extend(std::iter::repeat_n(c_bar.clone(), n - 1));
            let profile = StrategyProfile::new(strategies).unwrap();
            let g = game::utility_gradient(&config, &demand, &profile, 0).unwrap();
            sup = sup.max((g * tau - &c_hat).norm());
        }
        assert!(
            sup < previous,
            "sup did not decrease: {sup} at tau = {tau} (previous {previous})"
        );
        if tau == 1000.0 {
            assert!(sup < 1e-3, "sup = {sup} at tau = 1000");
        }
        previous = sup;
    }
}

#[test]
fn thread_count_does_not_affect_runs() {
    // Runs are single-threaded internally; spawning several identical runs
    // concurrently must produce bit-identical records.
    let demand = shifted_ball_demand(2, 12, 9);
    let config = GameConfig::new(2, 3, 0.5).unwrap();
    let opt = OptimizerConfig {
        max_iters: 2000,
        ..OptimizerConfig::new(0.1, 77)
    };
    let baseline = run_lne(&config, &demand, &opt, Initialization::Seeded).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let demand = demand.clone();
            let opt = opt.clone();
            std::thread::spawn(move || run_lne(&config, &demand, &opt, Initialization::Seeded))
        })
        .collect();
    for h in handles {
        let record = h.join().unwrap().unwrap();
        assert_eq!(record, baseline);
    }
}
