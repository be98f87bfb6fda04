//! Simultaneous projected-gradient-ascent search for local-equilibrium
//! candidates, convergence detection, and the second-order Riemannian
//! classification of the result.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::game::{self, GameConfig, StrategyProfile};
use crate::hardmax;
use crate::manifold;

/// Iteration cap used when none is specified.
pub const DEFAULT_MAX_ITERS: usize = 50_000;
/// Convergence threshold factor: the run stops when the l2 change of the
/// full parameter block drops below `1e-8 * sqrt(d)`.
pub const CONVERGENCE_TOL_FACTOR: f64 = 1e-8;
/// A candidate violates the second-order test when some Riemannian gradient
/// norm exceeds `1e-5 * sqrt(d)`.
pub const GRADIENT_NORM_FACTOR: f64 = 1e-5;
/// Tangent eigenvalues within this band of zero are classified as zero,
/// making the test inconclusive rather than confirmed.
pub const EIGENVALUE_ZERO_TOL: f64 = 1e-10;

const MIN_PARAM_NORM: f64 = 1e-280;

/// Settings for the simultaneous ascent loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Shared step size alpha > 0.
    pub step_size: f64,
    pub max_iters: usize,
    /// Absolute convergence tolerance; `None` selects `1e-8 * sqrt(d)`.
    pub convergence_tol: Option<f64>,
    pub seed: u64,
    /// Multiplies the step size by tau before use. Off by default.
    pub scale_step_by_tau: bool,
}

impl OptimizerConfig {
    pub fn new(step_size: f64, seed: u64) -> Self {
        Self {
            step_size,
            max_iters: DEFAULT_MAX_ITERS,
            convergence_tol: None,
            seed,
            scale_step_by_tau: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step size must be > 0, got {}",
                self.step_size
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self, d: usize) -> f64 {
        self.convergence_tol
            .unwrap_or(CONVERGENCE_TOL_FACTOR * (d as f64).sqrt())
    }

    fn effective_step(&self, tau: f64) -> f64 {
        if self.scale_step_by_tau {
            self.step_size * tau
        } else {
            self.step_size
        }
    }
}

/// Outcome of the second-derivative test at a strategy profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LneClassification {
    /// A gradient norm above threshold or a strictly positive tangent
    /// eigenvalue rules the point out.
    Violated,
    /// Gradients below threshold and all tangent curvature strictly negative.
    ConfirmedLne,
    /// Not ruled out, but some tangent eigenvalue sits at zero.
    Inconclusive,
}

/// Per-producer first- and second-order diagnostics at a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderReport {
    /// l2 norm of each producer's Riemannian gradient.
    pub gradient_norms: Vec<f64>,
    /// Largest eigenvalue of each producer's Riemannian Hessian restricted
    /// to the tangent subspace. `None` when d = 1 (empty tangent space).
    pub max_tangent_eigenvalues: Vec<Option<f64>>,
    pub classification: LneClassification,
}

/// Result of one ascent run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub final_profile: StrategyProfile,
    pub iterations: usize,
    pub converged: bool,
    pub second_order: SecondOrderReport,
    pub utilities: Vec<f64>,
}

/// Initial parameters for `run_lne`.
#[derive(Debug, Clone)]
pub enum Initialization {
    /// theta_i drawn i.i.d. standard normal from the optimizer seed,
    /// coordinates made non-negative for non-negative games.
    Seeded,
    /// Start from a given profile (parameters start at unit norm).
    Profile(StrategyProfile),
}

/// One synchronous ascent step on the unnormalized parameters:
/// `theta_i += alpha * (1/||theta_i||) (I - s_i s_i^T) grad_{s_i} u_i`
/// with every gradient evaluated at the previous iterate.
pub fn ascent_step(
    config: &GameConfig,
    dist: &DemandDistribution,
    params: &[DVector<f64>],
    optimizer: &OptimizerConfig,
) -> Result<Vec<DVector<f64>>> {
    if config.is_hardmax() {
        return Err(Error::HardmaxUnsupported);
    }
    optimizer.validate()?;
    let (gradients, norms) = euclidean_gradients(config, dist, params)?;
    let alpha = optimizer.effective_step(config.tau);
    let mut out = Vec::with_capacity(params.len());
    for (i, theta) in params.iter().enumerate() {
        let s = theta / norms[i];
        let tangent = manifold::project_tangent(&s, &gradients[i]);
        out.push(theta + tangent * (alpha / norms[i]));
    }
    Ok(out)
}

/// Euclidean utility gradients for all producers at `s_i = theta_i/||theta_i||`,
/// sharing one softmax per consumer. Also returns the parameter norms.
fn euclidean_gradients(
    config: &GameConfig,
    dist: &DemandDistribution,
    params: &[DVector<f64>],
) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    if params.len() != config.n {
        return Err(Error::DimensionMismatch {
            expected: config.n,
            got: params.len(),
        });
    }
    let mut norms = Vec::with_capacity(params.len());
    let mut units = Vec::with_capacity(params.len());
    for (i, theta) in params.iter().enumerate() {
        if theta.len() != config.d {
            return Err(Error::DimensionMismatch {
                expected: config.d,
                got: theta.len(),
            });
        }
        let norm = theta.norm();
        if !(norm > MIN_PARAM_NORM) || !norm.is_finite() {
            return Err(Error::ParameterUnderflow { index: i });
        }
        norms.push(norm);
        units.push(theta / norm);
    }
    let mut grads = vec![DVector::zeros(config.d); config.n];
    let mut scores = vec![0.0; config.n];
    for (c, w) in dist.iter() {
        for (i, s) in units.iter().enumerate() {
            scores[i] = c.dot(s);
        }
        let p = game::exposure_from_scores(&scores, config.tau)?;
        for i in 0..config.n {
            grads[i].axpy(w * p[i] * (1.0 - p[i]), c, 1.0);
        }
    }
    for g in grads.iter_mut() {
        *g /= config.tau;
    }
    Ok((grads, norms))
}

/// Runs the simultaneous ascent until the parameter change drops below the
/// tolerance or the iteration cap is reached, then classifies the endpoint
/// with the second-order test. Deterministic given (seed, inputs).
pub fn run_lne(
    config: &GameConfig,
    dist: &DemandDistribution,
    optimizer: &OptimizerConfig,
    init: Initialization,
) -> Result<RunRecord> {
    if config.is_hardmax() {
        return Err(Error::HardmaxUnsupported);
    }
    optimizer.validate()?;
    config.validate_distribution(dist)?;

    let mut params = match init {
        Initialization::Seeded => seeded_params(config, optimizer.seed),
        Initialization::Profile(p) => {
            if p.n() != config.n || p.dim() != config.d {
                return Err(Error::DimensionMismatch {
                    expected: config.n,
                    got: p.n(),
                });
            }
            p.strategies().to_vec()
        }
    };

    let tol = optimizer.tolerance(config.d);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < optimizer.max_iters {
        let next = ascent_step(config, dist, &params, optimizer)?;
        let change: f64 = next
            .iter()
            .zip(params.iter())
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt();
        params = next;
        iterations += 1;
        if change <= tol {
            converged = true;
            break;
        }
    }

    let final_profile = StrategyProfile::from_unnormalized(params)?;
    let second_order = second_order_test(config, dist, &final_profile)?;
    let utilities = game::utility(config, dist, &final_profile)?;
    Ok(RunRecord {
        final_profile,
        iterations,
        converged,
        second_order,
        utilities,
    })
}

fn seeded_params(config: &GameConfig, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..config.n)
        .map(|_| {
            let mut theta =
                DVector::from_fn(config.d, |_, _| rng.sample::<f64, _>(StandardNormal));
            if config.nonneg {
                theta.apply(|x| *x = x.abs());
            }
            theta
        })
        .collect()
}

/// Classifies a profile with the Riemannian second-derivative test.
pub fn second_order_test(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
) -> Result<SecondOrderReport> {
    if config.is_hardmax() {
        return Err(Error::HardmaxUnsupported);
    }
    let grad_tol = GRADIENT_NORM_FACTOR * (config.d as f64).sqrt();
    let mut gradient_norms = Vec::with_capacity(config.n);
    let mut max_eigs = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let g = game::utility_gradient(config, dist, profile, i)?;
        let rg = manifold::riemannian_gradient(profile, i, &g)?;
        gradient_norms.push(rg.norm());
        let h = game::utility_hessian(config, dist, profile, i)?;
        let rh = manifold::riemannian_hessian(profile, i, &g, &h)?;
        let eigs = manifold::tangent_eigenvalues(profile.strategy(i), &rh);
        max_eigs.push(eigs.last().copied());
    }

    let gradient_violated = gradient_norms.iter().any(|&n| n > grad_tol);
    // Strictly positive curvature rules the point out, with no tolerance.
    let curvature_violated = max_eigs.iter().flatten().any(|&e| e > 0.0);
    let classification = if gradient_violated || curvature_violated {
        LneClassification::Violated
    } else if max_eigs.iter().flatten().any(|&e| e >= -EIGENVALUE_ZERO_TOL) {
        LneClassification::Inconclusive
    } else {
        LneClassification::ConfirmedLne
    };
    Ok(SecondOrderReport {
        gradient_norms,
        max_tangent_eigenvalues: max_eigs,
        classification,
    })
}

/// Brute-force best unilateral deviation for producer `i` over a sphere grid,
/// holding the rest of the profile fixed. Returns the best deviation and its
/// utility improvement over the current strategy.
///
/// Supports d = 2 (angular grid of `grid_resolution` points) and d = 3
/// (spherical grid with `grid_resolution` points per coordinate).
pub fn epsilon_improvement(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
    i: usize,
    grid_resolution: usize,
) -> Result<(DVector<f64>, f64)> {
    if i >= config.n {
        return Err(Error::InvalidConfig(format!(
            "producer index {i} out of range for n = {}",
            config.n
        )));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidConfig("grid resolution must be > 0".into()));
    }
    if config.d > 3 || config.d < 2 {
        return Err(Error::UnsupportedDimension {
            d: config.d,
            context: "deviation grid search",
        });
    }
    let grid = hardmax::discretize_sphere(config.d, grid_resolution)?;
    let current = game::utility(config, dist, profile)?[i];
    let mut best_point = profile.strategy(i).clone();
    let mut best_delta = f64::NEG_INFINITY;
    let mut candidate = profile.clone();
    for v in grid {
        candidate = candidate.with_strategy(i, v.clone())?;
        let u = game::utility(config, dist, &candidate)?[i];
        if u - current > best_delta {
            best_delta = u - current;
            best_point = v;
        }
    }
    Ok((best_point, best_delta))
}
