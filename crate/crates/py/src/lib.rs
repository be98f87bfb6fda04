//! Python bindings: the main exposure-game types and operations, with plain
//! lists of floats at the boundary.

use nalgebra::DVector;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use exposure_games::audit;
use exposure_games::demand;
use exposure_games::game;
use exposure_games::hardmax;
use exposure_games::scenarios;
use exposure_games::solver;

fn err(e: exposure_games::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_vectors(rows: Vec<Vec<f64>>) -> Vec<DVector<f64>> {
    rows.into_iter().map(DVector::from_vec).collect()
}

fn to_rows(vectors: &[DVector<f64>]) -> Vec<Vec<f64>> {
    vectors.iter().map(|v| v.as_slice().to_vec()).collect()
}

/// A finitely supported demand distribution over consumer embeddings.
#[pyclass(name = "DemandDistribution", skip_from_py_object)]
#[derive(Clone)]
struct PyDemand {
    inner: demand::DemandDistribution,
}

#[pymethods]
impl PyDemand {
    #[new]
    #[pyo3(signature = (points, weights=None))]
    fn new(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let points = to_vectors(points);
        let inner = match weights {
            Some(w) => demand::DemandDistribution::new(points, w).map_err(err)?,
            None => demand::DemandDistribution::uniform(points).map_err(err)?,
        };
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.points())
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn mean(&self) -> Vec<f64> {
        self.inner.mean().as_slice().to_vec()
    }

    fn is_nonnegative(&self) -> bool {
        self.inner.is_nonnegative()
    }

    /// The unit collapse direction c_bar for an n-producer game.
    fn c_bar(&self, n: usize) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .consumer_stats(n)
            .map_err(err)?
            .c_bar()
            .as_slice()
            .to_vec())
    }
}

#[pyclass(name = "GameConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyGameConfig {
    inner: game::GameConfig,
}

#[pymethods]
impl PyGameConfig {
    #[new]
    #[pyo3(signature = (d, n, tau, nonneg=false))]
    fn new(d: usize, n: usize, tau: f64, nonneg: bool) -> PyResult<Self> {
        Ok(Self {
            inner: game::GameConfig::new(d, n, tau).map_err(err)?.with_nonneg(nonneg),
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn nonneg(&self) -> bool {
        self.inner.nonneg
    }
}

#[pyclass(name = "StrategyProfile", skip_from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: game::StrategyProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    #[pyo3(signature = (strategies, normalize=false))]
    fn new(strategies: Vec<Vec<f64>>, normalize: bool) -> PyResult<Self> {
        let vectors = to_vectors(strategies);
        let inner = if normalize {
            game::StrategyProfile::from_unnormalized(vectors).map_err(err)?
        } else {
            game::StrategyProfile::new(vectors).map_err(err)?
        };
        Ok(Self { inner })
    }

    fn strategies(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.strategies())
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
}

#[pyclass(name = "SecondOrderReport", skip_from_py_object)]
#[derive(Clone)]
struct PySecondOrder {
    inner: solver::SecondOrderReport,
}

#[pymethods]
impl PySecondOrder {
    #[getter]
    fn gradient_norms(&self) -> Vec<f64> {
        self.inner.gradient_norms.clone()
    }

    #[getter]
    fn max_tangent_eigenvalues(&self) -> Vec<Option<f64>> {
        self.inner.max_tangent_eigenvalues.clone()
    }

    #[getter]
    fn classification(&self) -> &'static str {
        match self.inner.classification {
            solver::LneClassification::Violated => "violated",
            solver::LneClassification::ConfirmedLne => "confirmed-lne",
            solver::LneClassification::Inconclusive => "inconclusive",
        }
    }
}

#[pyclass(name = "RunRecord")]
struct PyRunRecord {
    inner: solver::RunRecord,
}

#[pymethods]
impl PyRunRecord {
    #[getter]
    fn final_profile(&self) -> PyProfile {
        PyProfile {
            inner: self.inner.final_profile.clone(),
        }
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn utilities(&self) -> Vec<f64> {
        self.inner.utilities.clone()
    }

    #[getter]
    fn second_order(&self) -> PySecondOrder {
        PySecondOrder {
            inner: self.inner.second_order.clone(),
        }
    }
}

#[pyfunction]
fn exposure_probabilities(
    config: &PyGameConfig,
    profile: &PyProfile,
    consumer: Vec<f64>,
) -> PyResult<Vec<f64>> {
    game::exposure_probabilities(&config.inner, &profile.inner, &DVector::from_vec(consumer))
        .map_err(err)
}

#[pyfunction]
fn utility(config: &PyGameConfig, demand: &PyDemand, profile: &PyProfile) -> PyResult<Vec<f64>> {
    game::utility(&config.inner, &demand.inner, &profile.inner).map_err(err)
}

#[pyfunction]
fn utility_gradient(
    config: &PyGameConfig,
    demand: &PyDemand,
    profile: &PyProfile,
    i: usize,
) -> PyResult<Vec<f64>> {
    Ok(game::utility_gradient(&config.inner, &demand.inner, &profile.inner, i)
        .map_err(err)?
        .as_slice()
        .to_vec())
}

#[pyfunction]
fn utility_hessian(
    config: &PyGameConfig,
    demand: &PyDemand,
    profile: &PyProfile,
    i: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let h = game::utility_hessian(&config.inner, &demand.inner, &profile.inner, i).map_err(err)?;
    Ok((0..h.nrows())
        .map(|r| h.row(r).iter().copied().collect())
        .collect())
}

#[pyfunction]
#[pyo3(signature = (config, demand, step_size, seed, max_iters=50_000, init=None))]
fn run_lne(
    config: &PyGameConfig,
    demand: &PyDemand,
    step_size: f64,
    seed: u64,
    max_iters: usize,
    init: Option<&PyProfile>,
) -> PyResult<PyRunRecord> {
    let optimizer = solver::OptimizerConfig {
        max_iters,
        ..solver::OptimizerConfig::new(step_size, seed)
    };
    let initialization = match init {
        Some(profile) => solver::Initialization::Profile(profile.inner.clone()),
        None => solver::Initialization::Seeded,
    };
    let inner = solver::run_lne(&config.inner, &demand.inner, &optimizer, initialization)
        .map_err(err)?;
    Ok(PyRunRecord { inner })
}

#[pyfunction]
fn second_order_test(
    config: &PyGameConfig,
    demand: &PyDemand,
    profile: &PyProfile,
) -> PyResult<PySecondOrder> {
    Ok(PySecondOrder {
        inner: solver::second_order_test(&config.inner, &demand.inner, &profile.inner)
            .map_err(err)?,
    })
}

#[pyfunction]
fn epsilon_improvement(
    config: &PyGameConfig,
    demand: &PyDemand,
    profile: &PyProfile,
    i: usize,
    grid_resolution: usize,
) -> PyResult<(Vec<f64>, f64)> {
    let (point, delta) = solver::epsilon_improvement(
        &config.inner,
        &demand.inner,
        &profile.inner,
        i,
        grid_resolution,
    )
    .map_err(err)?;
    Ok((point.as_slice().to_vec(), delta))
}

#[pyfunction]
fn discretize_sphere(d: usize, k: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_rows(&hardmax::discretize_sphere(d, k).map_err(err)?))
}

/// Solve the discretized hardmax game; returns (support, probs, value).
#[pyfunction]
fn lp_mixed_ne(
    demand: &PyDemand,
    grid: Vec<Vec<f64>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, f64)> {
    let config = game::GameConfig::new(demand.inner.dim(), 2, 0.0).map_err(err)?;
    let (strategy, value) =
        hardmax::lp_mixed_ne(&config, &demand.inner, &to_vectors(grid)).map_err(err)?;
    Ok((
        to_rows(&strategy.support()),
        strategy.probs().to_vec(),
        value,
    ))
}

/// Finite-support hitting-set search; returns (support, probs) or None.
#[pyfunction]
fn hitting_set_mixed_ne(
    demand: &PyDemand,
    max_support: usize,
) -> PyResult<Option<(Vec<Vec<f64>>, Vec<f64>)>> {
    Ok(hardmax::hitting_set_mixed_ne(&demand.inner, max_support)
        .map_err(err)?
        .map(|p| (to_rows(&p.support()), p.probs().to_vec())))
}

#[pyfunction]
fn cluster_count(profile: &PyProfile) -> usize {
    audit::cluster_count(&profile.inner)
}

#[pyfunction]
fn normalized_rating(consumer: Vec<f64>, item: Vec<f64>) -> PyResult<f64> {
    audit::normalized_rating(&DVector::from_vec(consumer), &DVector::from_vec(item)).map_err(err)
}

#[pyfunction]
fn triangle_demand() -> PyDemand {
    PyDemand {
        inner: scenarios::triangle_demand(),
    }
}

#[pyfunction]
fn two_basis_demand(w1: f64, w2: f64) -> PyResult<PyDemand> {
    Ok(PyDemand {
        inner: scenarios::two_basis_demand(w1, w2).map_err(err)?,
    })
}

#[pyfunction]
fn f_theta(demand: &PyDemand, tau: f64, theta: f64) -> PyResult<f64> {
    scenarios::f_theta(&demand.inner, tau, theta).map_err(err)
}

#[pyfunction]
fn solve_theta_star(demand: &PyDemand, tau: f64) -> PyResult<f64> {
    scenarios::solve_theta_star(&demand.inner, tau).map_err(err)
}

#[pymodule]
fn exposure_games_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDemand>()?;
    m.add_class::<PyGameConfig>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_class::<PySecondOrder>()?;
    m.add_function(wrap_pyfunction!(exposure_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(utility_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(utility_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(run_lne, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_test, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(discretize_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(lp_mixed_ne, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_set_mixed_ne, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_count, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_rating, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_demand, m)?)?;
    m.add_function(wrap_pyfunction!(two_basis_demand, m)?)?;
    m.add_function(wrap_pyfunction!(f_theta, m)?)?;
    m.add_function(wrap_pyfunction!(solve_theta_star, m)?)?;
    Ok(())
}
