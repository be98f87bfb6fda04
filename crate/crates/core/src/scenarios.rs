//! Executable constructions of the analytic examples and theorem checks:
//! the no-PNE triangle, the two-consumer basis games, the four-player
//! protective-positioning equilibrium, the epsilon-PNE concentration table,
//! and the d = 3 orthant game.

use nalgebra::{DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audit;
use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::game::{self, GameConfig, StrategyProfile};
use crate::hardmax::{self, MixedStrategy};
use crate::solver::{self, Initialization, LneClassification, OptimizerConfig, SecondOrderReport};

/// A named game instance together with the machine-checkable properties it
/// is expected to satisfy.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config: GameConfig,
    pub demand: DemandDistribution,
    pub checks: Vec<ScenarioCheck>,
}

/// Declarative expected properties. Every variant runs through
/// [`run_check`] and reports pass/fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioCheck {
    /// Random profiles conserve attention: sum of utilities is 1.
    Conservation { samples: usize, seed: u64 },
    /// The all-c_bar profile has vanishing Riemannian gradients.
    CriticalPoint { tol: f64 },
    /// Two-player hardmax sweep (d = 2): every grid profile admits a better
    /// response with at least the given margin.
    HardmaxNoPneSweep { resolution: usize, min_margin: f64 },
    /// The uniform mixture on consumer directions earns `on_support` against
    /// its own support and `off_arc` at the opposite arc midpoints.
    MixedSupportValues {
        on_support: f64,
        off_arc: f64,
        tol: f64,
    },
    /// tau * Delta_max is non-increasing in tau and every improving
    /// deviation stays inside the theorem's ball around c_bar.
    EpsPneTable {
        taus: Vec<f64>,
        grid_resolution: usize,
    },
    /// The four-player symmetric construction: root of f in (0, pi/8), no
    /// improving defection, second-order test not violated.
    ProtectivePositioning {
        tau: f64,
        sweep_resolution: usize,
    },
    /// d = 3 hardmax basis game: every grid profile admits a 2/3 response.
    OrthantSweep {
        profile_resolution: usize,
        response_resolution: usize,
    },
    /// All ascent runs collapse onto c_bar.
    CollapseAtHighTau {
        tau: f64,
        step_size: f64,
        optimizer_seeds: Vec<u64>,
        max_distance: f64,
    },
    /// At least `min_clusters` clusters appear in some ascent run.
    LocalClustersAtLowTau {
        tau: f64,
        step_size: f64,
        optimizer_seeds: Vec<u64>,
        min_clusters: usize,
    },
}

/// Outcome of one scenario check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

/// Three unit consumers 2pi/3 apart (d = 2, uniform weights). E[c] = 0, so
/// the collapse direction is undefined and no concentration checks apply.
pub fn triangle_game() -> Scenario {
    let demand = triangle_demand();
    Scenario {
        name: "triangle".into(),
        config: GameConfig::new(2, 2, 0.0).unwrap(),
        demand,
        checks: vec![
            ScenarioCheck::HardmaxNoPneSweep {
                resolution: 2000,
                min_margin: 0.1,
            },
            ScenarioCheck::MixedSupportValues {
                on_support: 0.5,
                off_arc: 4.0 / 9.0,
                tol: 1e-12,
            },
            ScenarioCheck::Conservation {
                samples: 50,
                seed: 0,
            },
        ],
    }
}

pub fn triangle_demand() -> DemandDistribution {
    // Exact coordinates of unit vectors at 90, 210, 330 degrees, so the
    // coordinate sums (and hence E[c]) cancel exactly in floating point.
    let s = 3.0_f64.sqrt() / 2.0;
    DemandDistribution::uniform(vec![
        DVector::from_row_slice(&[0.0, 1.0]),
        DVector::from_row_slice(&[-s, -0.5]),
        DVector::from_row_slice(&[s, -0.5]),
    ])
    .unwrap()
}

/// Consumers at the two canonical basis vectors of R^2 with the given
/// weights; the non-negative workhorse behind the softmax counterexamples.
pub fn two_basis_game(w1: f64, w2: f64) -> Result<Scenario> {
    let demand = two_basis_demand(w1, w2)?;
    let mut checks = vec![conservation_check()];
    if demand.mean().norm() > 0.0 {
        checks.push(ScenarioCheck::CriticalPoint { tol: 1e-10 });
        checks.push(ScenarioCheck::EpsPneTable {
            taus: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            grid_resolution: 20_000,
        });
    }
    Ok(Scenario {
        name: "two-basis".into(),
        config: GameConfig::new(2, 2, 1.0)?.with_nonneg(true),
        demand,
        checks,
    })
}

fn conservation_check() -> ScenarioCheck {
    ScenarioCheck::Conservation {
        samples: 50,
        seed: 0,
    }
}

pub fn two_basis_demand(w1: f64, w2: f64) -> Result<DemandDistribution> {
    DemandDistribution::new(
        vec![
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 1.0]),
        ],
        vec![w1, w2],
    )
}

/// The four-player protective-positioning construction on the symmetric
/// two-basis game.
pub fn n4_protective_scenario(tau: f64) -> Result<Scenario> {
    Ok(Scenario {
        name: "n4-protective".into(),
        config: GameConfig::new(2, 4, tau)?.with_nonneg(true),
        demand: two_basis_demand(0.5, 0.5)?,
        checks: vec![
            ScenarioCheck::ProtectivePositioning {
                tau,
                sweep_resolution: 20_000,
            },
            ScenarioCheck::CriticalPoint { tol: 1e-10 },
            conservation_check(),
        ],
    })
}

/// Hardmax d = 3 game on the three canonical basis vectors, exhibiting PNE
/// non-existence beyond the plane.
pub fn orthant_basis_game() -> Scenario {
    let demand = DemandDistribution::uniform(vec![
        DVector::from_row_slice(&[1.0, 0.0, 0.0]),
        DVector::from_row_slice(&[0.0, 1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 0.0, 1.0]),
    ])
    .unwrap();
    Scenario {
        name: "orthant".into(),
        config: GameConfig::new(3, 2, 0.0).unwrap().with_nonneg(true),
        demand,
        checks: vec![
            ScenarioCheck::OrthantSweep {
                profile_resolution: 8,
                response_resolution: 40,
            },
            conservation_check(),
        ],
    }
}

/// Seeded Gaussian-mixture demand: each point is a randomly chosen center
/// plus isotropic noise. A qualitative analogue of clustered real demand.
pub fn gaussian_mixture_demand(
    centers: &[DVector<f64>],
    sigma: f64,
    m: usize,
    seed: u64,
) -> Result<DemandDistribution> {
    if centers.is_empty() || m == 0 {
        return Err(Error::InvalidConfig("need centers and m >= 1".into()));
    }
    let d = centers[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m)
        .map(|_| {
            let c = &centers[rng.random_range(0..centers.len())];
            DVector::from_fn(d, |r, _| c[r] + sigma * rng.sample::<f64, _>(StandardNormal))
        })
        .collect();
    DemandDistribution::uniform(points)
}

/// The clustered d = 3 demand used by the cluster-emergence scenario.
pub fn clustered_demand_3d(m: usize, sigma: f64, seed: u64) -> DemandDistribution {
    let centers: Vec<DVector<f64>> = [
        [1.0, 0.1, 0.1],
        [0.1, 1.0, 0.1],
        [0.1, 0.1, 1.0],
    ]
    .iter()
    .map(|c| {
        let v = DVector::from_row_slice(c);
        let n = v.norm();
        v / n
    })
    .collect();
    gaussian_mixture_demand(&centers, sigma, m, seed).expect("valid mixture parameters")
}

/// Cluster-emergence scenario: n = 10 producers on a 200-consumer clustered
/// demand; collapse at tau = 1, local clusters at tau = 0.01.
pub fn cluster_emergence_scenario() -> Scenario {
    let demand = clustered_demand_3d(200, 0.15, 7);
    Scenario {
        name: "cluster-emergence".into(),
        config: GameConfig::new(3, 10, 1.0).unwrap(),
        demand,
        checks: vec![
            ScenarioCheck::CollapseAtHighTau {
                tau: 1.0,
                step_size: 0.1,
                optimizer_seeds: vec![1, 2, 3],
                max_distance: 1e-3,
            },
            ScenarioCheck::LocalClustersAtLowTau {
                tau: 0.01,
                step_size: 0.01,
                optimizer_seeds: vec![1, 2, 3],
                min_clusters: 2,
            },
        ],
    }
}

/// Builds the scenario registered under `name`.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    match name {
        "triangle" => Ok(triangle_game()),
        "two-basis" => two_basis_game(2.0 / 3.0, 1.0 / 3.0),
        "eps-pne" => two_basis_game(2.0 / 3.0, 1.0 / 3.0).map(|mut s| {
            s.name = "eps-pne".into();
            s
        }),
        "n4-protective" => n4_protective_scenario(0.25),
        "orthant" => Ok(orthant_basis_game()),
        "cluster-emergence" => Ok(cluster_emergence_scenario()),
        other => Err(Error::InvalidConfig(format!("unknown scenario {other:?}"))),
    }
}

pub const BUILTIN_SCENARIOS: &[&str] = &[
    "triangle",
    "two-basis",
    "eps-pne",
    "n4-protective",
    "orthant",
    "cluster-emergence",
];

/// `f(theta) = <g_1, Q s_1>` for the symmetric four-player profile
/// `s_1 = s_2 = phi(theta)`, `s_3 = s_4 = phi(pi/2 - theta)`; `Q` rotates by
/// 90 degrees. Roots of `f` on `K = [0, pi/4]` are the symmetric
/// equilibrium candidates.
pub fn f_theta(demand: &DemandDistribution, tau: f64, theta: f64) -> Result<f64> {
    const K_TOL: f64 = 1e-12;
    if !((-K_TOL)..=(std::f64::consts::FRAC_PI_4 + K_TOL)).contains(&theta) {
        return Err(Error::InvalidConfig(format!(
            "theta = {theta} outside K = [0, pi/4]"
        )));
    }
    let config = GameConfig::new(2, 4, tau)?;
    let profile = symmetric_profile(theta)?;
    let g1 = game::utility_gradient(&config, demand, &profile, 0)?;
    let q = Matrix2::new(0.0, -1.0, 1.0, 0.0);
    let s1 = profile.strategy(0);
    let rotated = q * nalgebra::Vector2::new(s1[0], s1[1]);
    Ok(g1[0] * rotated[0] + g1[1] * rotated[1])
}

fn symmetric_profile(theta: f64) -> Result<StrategyProfile> {
    let phi = |t: f64| DVector::from_row_slice(&[t.cos(), t.sin()]);
    let mirrored = std::f64::consts::FRAC_PI_2 - theta;
    StrategyProfile::new(vec![
        phi(theta),
        phi(theta),
        phi(mirrored),
        phi(mirrored),
    ])
}

/// Bisection root of `f` on `(0, pi/8)` to 1e-12. Errors when `f` does not
/// change sign there, which happens once tau is too large.
pub fn solve_theta_star(demand: &DemandDistribution, tau: f64) -> Result<f64> {
    let mut lo = 0.0_f64;
    let mut hi = std::f64::consts::FRAC_PI_8;
    let f_lo = f_theta(demand, tau, lo)?;
    let f_hi = f_theta(demand, tau, hi)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange(format!(
            "f(0) = {f_lo}, f(pi/8) = {f_hi}; no root in (0, pi/8) at tau = {tau}"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f_theta(demand, tau, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full diagnostics of the protective-positioning construction at one tau.
#[derive(Debug, Clone, Serialize)]
pub struct ProtectiveReport {
    pub tau: f64,
    pub theta_star: f64,
    pub f_at_zero: f64,
    pub f_at_pi_8: f64,
    pub f_at_pi_4: f64,
    pub max_defection_improvement: f64,
    pub second_order: SecondOrderReport,
}

pub fn protective_positioning_report(
    demand: &DemandDistribution,
    tau: f64,
    sweep_resolution: usize,
) -> Result<ProtectiveReport> {
    let theta_star = solve_theta_star(demand, tau)?;
    let config = GameConfig::new(2, 4, tau)?;
    let profile = symmetric_profile(theta_star)?;
    let (_, delta) = solver::epsilon_improvement(&config, demand, &profile, 0, sweep_resolution)?;
    let second_order = solver::second_order_test(&config, demand, &profile)?;
    Ok(ProtectiveReport {
        tau,
        theta_star,
        f_at_zero: f_theta(demand, tau, 0.0)?,
        f_at_pi_8: f_theta(demand, tau, std::f64::consts::FRAC_PI_8)?,
        f_at_pi_4: f_theta(demand, tau, std::f64::consts::FRAC_PI_4)?,
        max_defection_improvement: delta,
        second_order,
    })
}

/// One row of the epsilon-PNE concentration table at the all-c_bar profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsPneRow {
    pub tau: f64,
    /// Best brute-force deviation gain over the grid (negative when no grid
    /// point improves on the collapsed profile).
    pub delta_max: f64,
    /// `tau * max(delta_max, 0)`: the epsilon for which the profile is an
    /// epsilon-PNE, as witnessed by the grid.
    pub tau_delta_max: f64,
    /// Largest distance from c_bar among strictly improving deviations.
    pub delta_observed: f64,
    /// `2 eps / (||c_hat|| - eps)` with `eps = max(tau delta_max, 0)`,
    /// defined when `eps < ||c_hat||`.
    pub delta_bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

/// Brute-force concentration table for deviations from the all-c_bar
/// profile (d = 2 angular grid or d = 3 spherical grid).
pub fn verify_eps_pne_bound(
    demand: &DemandDistribution,
    n: usize,
    taus: &[f64],
    grid_resolution: usize,
) -> Result<Vec<EpsPneRow>> {
    let d = demand.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            context: "deviation grid search",
        });
    }
    let stats = demand.consumer_stats(n)?;
    let c_bar = stats.c_bar().clone();
    let c_hat_norm = stats.c_hat_norm();
    let grid = hardmax::discretize_sphere(d, grid_resolution)?;

    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let config = GameConfig::new(d, n, tau)?;
        let baseline = StrategyProfile::new(vec![c_bar.clone(); n])?;
        let u_base = game::utility(&config, demand, &baseline)?[0];
        let mut delta_max = f64::NEG_INFINITY;
        let mut delta_observed = 0.0_f64;
        let mut candidate = baseline.clone();
        for v in &grid {
            candidate = candidate.with_strategy(0, v.clone())?;
            let delta = game::utility(&config, demand, &candidate)?[0] - u_base;
            if delta > delta_max {
                delta_max = delta;
            }
            if delta > 0.0 {
                delta_observed = delta_observed.max((v - &c_bar).norm());
            }
        }
        let eps = (tau * delta_max).max(0.0);
        let (delta_bound, bound_holds) = if eps < c_hat_norm {
            let bound = 2.0 * eps / (c_hat_norm - eps);
            (Some(bound), Some(delta_observed <= bound + 1e-12))
        } else {
            (None, None)
        };
        rows.push(EpsPneRow {
            tau,
            delta_max,
            tau_delta_max: eps,
            delta_observed,
            delta_bound,
            bound_holds,
        });
    }
    Ok(rows)
}

/// True when `tau * Delta_max` never increases along the rows (up to slack).
pub fn tau_delta_nonincreasing(rows: &[EpsPneRow], slack: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].tau_delta_max <= w[0].tau_delta_max + slack)
}

/// Certificate that no two-player hardmax PNE exists on an angular grid:
/// for every grid profile some player has a better response with at least
/// `min_margin` utility gain. Certification is up to grid resolution.
#[derive(Debug, Clone, Serialize)]
pub struct NoPneCertificate {
    pub resolution: usize,
    pub profiles_checked: usize,
    pub min_margin: f64,
    /// Profiles where the candidate responses were insufficient and the
    /// full response grid was swept.
    pub fallback_sweeps: usize,
}

/// Runs the better-response sweep for a d = 2 hardmax game. Candidate
/// responses are the consumer directions and the midpoints of consecutive
/// consumer arcs, which realize the at-least-2/3 capture argument; profiles
/// they fail on fall back to the full grid.
pub fn hardmax_no_pne_certificate(
    demand: &DemandDistribution,
    resolution: usize,
) -> Result<NoPneCertificate> {
    if demand.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            d: demand.dim(),
            context: "angular no-PNE sweep",
        });
    }
    let grid = hardmax::discretize_sphere(2, resolution)?;
    let consumers = demand.points();

    // Candidates: consumer directions plus midpoints of consecutive
    // consumer angles on the circle.
    let tau_circle = 2.0 * std::f64::consts::PI;
    let mut angles: Vec<f64> = consumers
        .iter()
        .filter(|c| c.norm() > 0.0)
        .map(|c| c[1].atan2(c[0]).rem_euclid(tau_circle))
        .collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let mut candidates: Vec<DVector<f64>> = angles
        .iter()
        .map(|a| DVector::from_row_slice(&[a.cos(), a.sin()]))
        .collect();
    for (idx, &a) in angles.iter().enumerate() {
        let b = if idx + 1 < angles.len() {
            angles[idx + 1]
        } else {
            angles[0] + tau_circle
        };
        let mid = 0.5 * (a + b);
        candidates.push(DVector::from_row_slice(&[mid.cos(), mid.sin()]));
    }

    // Best candidate-response value against each grid opponent.
    let best_response: Vec<f64> = grid
        .iter()
        .map(|opp| {
            candidates
                .iter()
                .map(|cand| hardmax::two_player_hardmax_utility(demand, cand, opp))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut min_margin = f64::INFINITY;
    let mut fallback_sweeps = 0usize;
    let mut profiles_checked = 0usize;
    for i1 in 0..grid.len() {
        for i2 in i1..grid.len() {
            profiles_checked += 1;
            let u1 = hardmax::two_player_hardmax_utility(demand, &grid[i1], &grid[i2]);
            let u2 = 1.0 - u1;
            let mut margin = (best_response[i2] - u1).max(best_response[i1] - u2);
            if margin < min_margin {
                // Rare near-boundary profiles: sweep every grid response.
                fallback_sweeps += 1;
                for g in &grid {
                    let r1 = hardmax::two_player_hardmax_utility(demand, g, &grid[i2]);
                    let r2 = 1.0 - hardmax::two_player_hardmax_utility(demand, &grid[i1], g);
                    margin = margin.max(r1 - u1).max(r2 - u2);
                }
                min_margin = min_margin.min(margin);
            }
        }
    }
    Ok(NoPneCertificate {
        resolution,
        profiles_checked,
        min_margin,
        fallback_sweeps,
    })
}

/// The d = 3 analogue on a spherical grid. For every profile the weaker
/// player must reach utility 2/3 (capturing two consumers outright), an
/// improvement of at least 1/6.
#[derive(Debug, Clone, Serialize)]
pub struct OrthantCertificate {
    pub profile_points: usize,
    pub min_response_utility: f64,
    pub min_margin: f64,
}

pub fn orthant_no_pne_certificate(
    demand: &DemandDistribution,
    profile_resolution: usize,
    response_resolution: usize,
) -> Result<OrthantCertificate> {
    if demand.dim() != 3 {
        return Err(Error::UnsupportedDimension {
            d: demand.dim(),
            context: "spherical no-PNE sweep",
        });
    }
    let profiles = hardmax::discretize_sphere(3, profile_resolution)?;
    let responses = hardmax::discretize_sphere(3, response_resolution)?;

    // Candidates realizing the great-circle argument: basis vectors plus
    // points on each coordinate great circle.
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    for i in 0..3 {
        let mut e = DVector::zeros(3);
        e[i] = 1.0;
        candidates.push(e);
    }
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            for t in [
                std::f64::consts::FRAC_PI_8,
                std::f64::consts::FRAC_PI_4,
                3.0 * std::f64::consts::FRAC_PI_8,
            ] {
                let mut v = DVector::zeros(3);
                v[i] = t.cos();
                v[j] = t.sin();
                candidates.push(v);
            }
        }
    }

    let best_cand: Vec<f64> = profiles
        .iter()
        .map(|opp| {
            candidates
                .iter()
                .map(|cand| hardmax::two_player_hardmax_utility(demand, cand, opp))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut min_response = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for i1 in 0..profiles.len() {
        for i2 in i1..profiles.len() {
            let u1 = hardmax::two_player_hardmax_utility(demand, &profiles[i1], &profiles[i2]);
            let u2 = 1.0 - u1;
            // the weaker player deviates
            let (u_weak, opp_idx) = if u1 <= u2 { (u1, i2) } else { (u2, i1) };
            let mut resp = best_cand[opp_idx];
            if resp < 2.0 / 3.0 - 1e-12 {
                for r in &responses {
                    resp = resp
                        .max(hardmax::two_player_hardmax_utility(demand, r, &profiles[opp_idx]));
                }
            }
            min_response = min_response.min(resp);
            min_margin = min_margin.min(resp - u_weak);
        }
    }
    Ok(OrthantCertificate {
        profile_points: profiles.len(),
        min_response_utility: min_response,
        min_margin,
    })
}

/// Executes one declarative check against the scenario.
pub fn run_check(scenario: &Scenario, check: &ScenarioCheck) -> Result<CheckOutcome> {
    match check {
        ScenarioCheck::Conservation { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let config = scenario.config;
            let mut worst: f64 = 0.0;
            for _ in 0..*samples {
                let profile = random_profile(config.d, config.n, &mut rng, config.nonneg);
                let u = game::utility(&config, &scenario.demand, &profile)?;
                worst = worst.max((u.iter().sum::<f64>() - 1.0).abs());
            }
            Ok(CheckOutcome {
                name: "conservation".into(),
                passed: worst <= 1e-12,
                details: format!("max |sum u - 1| = {worst:.3e} over {samples} profiles"),
            })
        }
        ScenarioCheck::CriticalPoint { tol } => {
            let config = scenario.config;
            let stats = scenario.demand.consumer_stats(config.n)?;
            let profile = StrategyProfile::new(vec![stats.c_bar().clone(); config.n])?;
            let mut worst: f64 = 0.0;
            for i in 0..config.n {
                let g = game::utility_gradient(&config, &scenario.demand, &profile, i)?;
                let rg = crate::manifold::riemannian_gradient(&profile, i, &g)?;
                worst = worst.max(rg.norm());
            }
            Ok(CheckOutcome {
                name: "critical-point".into(),
                passed: worst <= *tol,
                details: format!("max Riemannian gradient norm at all-c_bar = {worst:.3e}"),
            })
        }
        ScenarioCheck::HardmaxNoPneSweep {
            resolution,
            min_margin,
        } => {
            let cert = hardmax_no_pne_certificate(&scenario.demand, *resolution)?;
            Ok(CheckOutcome {
                name: "hardmax-no-pne-sweep".into(),
                passed: cert.min_margin >= *min_margin,
                details: format!(
                    "min better-response margin {:.6} over {} profiles at resolution {} ({} fallback sweeps)",
                    cert.min_margin, cert.profiles_checked, cert.resolution, cert.fallback_sweeps
                ),
            })
        }
        ScenarioCheck::MixedSupportValues {
            on_support,
            off_arc,
            tol,
        } => {
            let outcome = mixed_support_values(&scenario.demand, *on_support, *off_arc, *tol)?;
            Ok(outcome)
        }
        ScenarioCheck::EpsPneTable {
            taus,
            grid_resolution,
        } => {
            let rows =
                verify_eps_pne_bound(&scenario.demand, scenario.config.n, taus, *grid_resolution)?;
            let mono = tau_delta_nonincreasing(&rows, 1e-12);
            let bounds_ok = rows.iter().all(|r| r.bound_holds.unwrap_or(true));
            let detail: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "tau={} tau*dmax={:.3e} d_obs={:.4} bound={}",
                        r.tau,
                        r.tau_delta_max,
                        r.delta_observed,
                        r.delta_bound
                            .map_or("n/a".into(), |b| format!("{b:.4}"))
                    )
                })
                .collect();
            Ok(CheckOutcome {
                name: "eps-pne-table".into(),
                passed: mono && bounds_ok,
                details: detail.join("; "),
            })
        }
        ScenarioCheck::ProtectivePositioning {
            tau,
            sweep_resolution,
        } => {
            let report = protective_positioning_report(&scenario.demand, *tau, *sweep_resolution)?;
            let passed = report.f_at_pi_4.abs() <= 1e-12
                && report.f_at_zero > 0.0
                && report.f_at_pi_8 < 0.0
                && report.theta_star > 0.0
                && report.theta_star < std::f64::consts::FRAC_PI_8
                && report.max_defection_improvement <= 1e-9
                && report.second_order.classification != LneClassification::Violated;
            Ok(CheckOutcome {
                name: "protective-positioning".into(),
                passed,
                details: format!(
                    "theta* = {:.12}, f(0) = {:.4e}, f(pi/8) = {:.4e}, f(pi/4) = {:.2e}, max defection gain = {:.2e}, second-order: {:?}",
                    report.theta_star,
                    report.f_at_zero,
                    report.f_at_pi_8,
                    report.f_at_pi_4,
                    report.max_defection_improvement,
                    report.second_order.classification
                ),
            })
        }
        ScenarioCheck::OrthantSweep {
            profile_resolution,
            response_resolution,
        } => {
            let cert = orthant_no_pne_certificate(
                &scenario.demand,
                *profile_resolution,
                *response_resolution,
            )?;
            let passed =
                cert.min_response_utility >= 2.0 / 3.0 - 1e-12 && cert.min_margin >= 1.0 / 6.0 - 1e-12;
            Ok(CheckOutcome {
                name: "orthant-sweep".into(),
                passed,
                details: format!(
                    "min response utility {:.6}, min margin {:.6} over {} profile points",
                    cert.min_response_utility, cert.min_margin, cert.profile_points
                ),
            })
        }
        ScenarioCheck::CollapseAtHighTau {
            tau,
            step_size,
            optimizer_seeds,
            max_distance,
        } => {
            let config = GameConfig::new(scenario.config.d, scenario.config.n, *tau)?
                .with_nonneg(scenario.config.nonneg);
            let c_bar = scenario
                .demand
                .consumer_stats(config.n)?
                .c_bar()
                .clone();
            let mut worst_dist: f64 = 0.0;
            let mut all_single = true;
            for &seed in optimizer_seeds {
                let opt = OptimizerConfig::new(*step_size, seed);
                let record = solver::run_lne(&config, &scenario.demand, &opt, Initialization::Seeded)?;
                all_single &= audit::cluster_count(&record.final_profile) == 1;
                for s in record.final_profile.strategies() {
                    worst_dist = worst_dist.max((s - &c_bar).norm());
                }
            }
            Ok(CheckOutcome {
                name: "collapse-at-high-tau".into(),
                passed: all_single && worst_dist <= *max_distance,
                details: format!(
                    "single cluster: {all_single}, max distance to c_bar = {worst_dist:.3e}"
                ),
            })
        }
        ScenarioCheck::LocalClustersAtLowTau {
            tau,
            step_size,
            optimizer_seeds,
            min_clusters,
        } => {
            let config = GameConfig::new(scenario.config.d, scenario.config.n, *tau)?
                .with_nonneg(scenario.config.nonneg);
            let mut best = 0usize;
            for &seed in optimizer_seeds {
                let opt = OptimizerConfig::new(*step_size, seed);
                let record = solver::run_lne(&config, &scenario.demand, &opt, Initialization::Seeded)?;
                best = best.max(audit::cluster_count(&record.final_profile));
            }
            Ok(CheckOutcome {
                name: "local-clusters-at-low-tau".into(),
                passed: best >= *min_clusters,
                details: format!("max cluster count over runs = {best}"),
            })
        }
    }
}

fn mixed_support_values(
    demand: &DemandDistribution,
    on_support: f64,
    off_arc: f64,
    tol: f64,
) -> Result<CheckOutcome> {
    let m = demand.len();
    let support: Vec<DVector<f64>> = demand
        .points()
        .iter()
        .map(|c| {
            let n = c.norm();
            if n == 0.0 {
                Err(Error::InvalidConfig("zero consumer embedding".into()))
            } else {
                Ok(c / n)
            }
        })
        .collect::<Result<_>>()?;
    let mixture = MixedStrategy::new(support.clone(), vec![1.0 / m as f64; m])?;

    let mut worst_on: f64 = 0.0;
    for s in &support {
        // the deviator sits on a support point: expected utility of the
        // deviation against the mixture
        let value: f64 = support
            .iter()
            .zip(mixture.probs())
            .map(|(p, &w)| w * hardmax::two_player_hardmax_utility(demand, s, p))
            .sum();
        worst_on = worst_on.max((value - on_support).abs());
    }

    // opposite-arc midpoints between consecutive support angles
    let tau_circle = 2.0 * std::f64::consts::PI;
    let mut angles: Vec<f64> = support
        .iter()
        .map(|s| s[1].atan2(s[0]).rem_euclid(tau_circle))
        .collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    let mut worst_off: f64 = 0.0;
    for (idx, &a) in angles.iter().enumerate() {
        let b = if idx + 1 < angles.len() {
            angles[idx + 1]
        } else {
            angles[0] + tau_circle
        };
        let mid = 0.5 * (a + b);
        let dev = DVector::from_row_slice(&[mid.cos(), mid.sin()]);
        let value: f64 = support
            .iter()
            .zip(mixture.probs())
            .map(|(p, &w)| w * hardmax::two_player_hardmax_utility(demand, &dev, p))
            .sum();
        worst_off = worst_off.max((value - off_arc).abs());
    }
    Ok(CheckOutcome {
        name: "mixed-support-values".into(),
        passed: worst_on <= tol && worst_off <= tol,
        details: format!(
            "max |on-support - {on_support}| = {worst_on:.2e}, max |off-arc - {off_arc}| = {worst_off:.2e}"
        ),
    })
}

fn random_profile(
    d: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    nonneg: bool,
) -> StrategyProfile {
    let raw: Vec<DVector<f64>> = (0..n)
        .map(|_| {
            let mut v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            if nonneg {
                v.apply(|x| *x = x.abs());
            }
            if v.norm() == 0.0 {
                v[0] = 1.0;
            }
            v
        })
        .collect();
    StrategyProfile::from_unnormalized(raw).expect("non-zero raw vectors")
}
