//! Python bindings for `lifelong-irl`.
//!
//! Matrices cross the boundary as nested lists (row-major) and vectors as
//! flat lists; seeds are plain integers.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lifelong_irl::elirl::{self, BasisInit, HyperParams, SharedBasis, TaskKnowledge};
use lifelong_irl::envs::{self, HighwayConfig, ObjectworldConfig, TaskInstance};
use lifelong_irl::experiment::{run_experiment as run_experiment_rs, ExperimentConfig};
use lifelong_irl::maxent::{self, DemoSet, FitOptions, HessianEstimate};
use lifelong_irl::mdp::{self, RewardParams, TabularMdp};
use lifelong_irl::{eval, Error, Seed};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Divergence { .. } | Error::Convergence { .. } | Error::Numerical(_) | Error::Trial { .. } => {
            PyRuntimeError::new_err(err.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn params(theta: Vec<f64>) -> PyResult<RewardParams> {
    RewardParams::new(theta).map_err(to_py)
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    lifelong_irl::linalg::to_rows(m)
}

/// A finite MDP with state features.
#[pyclass(name = "TabularMdp", module = "lifelong_irl_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMdp {
    inner: TabularMdp,
}

#[pymethods]
impl PyMdp {
    /// `transition` is flat, indexed `(s * num_actions + a) * num_states + s'`;
    /// `features` is row-major `num_states x feature_dim`.
    #[new]
    #[pyo3(signature = (num_states, num_actions, transition, features, feature_dim, discount, start))]
    fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        features: Vec<f64>,
        feature_dim: usize,
        discount: f64,
        start: Vec<f64>,
    ) -> PyResult<Self> {
        let inner = TabularMdp::new(num_states, num_actions, transition, features, feature_dim, discount, start).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn num_actions(&self) -> usize {
        self.inner.num_actions()
    }

    #[getter]
    fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }

    #[getter]
    fn discount(&self) -> f64 {
        self.inner.discount()
    }

    fn transition(&self, state: usize, action: usize, next: usize) -> f64 {
        self.inner.transition(state, action, next)
    }

    fn features_of(&self, state: usize) -> Vec<f64> {
        self.inner.features_of(state).to_vec()
    }

    /// Per-state reward `features . theta`.
    fn state_rewards(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.state_rewards(&params(theta)?).map_err(to_py)
    }

    /// `(values, greedy action per state)`.
    #[pyo3(signature = (rewards, tolerance = 1e-10))]
    fn value_iteration(&self, rewards: Vec<f64>, tolerance: f64) -> PyResult<(Vec<f64>, Vec<usize>)> {
        let (v, pi) = mdp::value_iteration(&self.inner, &rewards, tolerance).map_err(to_py)?;
        Ok((v, pi.argmax_actions()))
    }

    /// MaxEnt discounted state visitation frequencies.
    fn state_visitations(&self, theta: Vec<f64>, horizon: usize) -> PyResult<Vec<f64>> {
        maxent::state_visitations(&self.inner, &params(theta)?, horizon).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "TabularMdp(num_states={}, num_actions={}, feature_dim={}, discount={})",
            self.inner.num_states(),
            self.inner.num_actions(),
            self.inner.feature_dim(),
            self.inner.discount()
        )
    }
}

/// A generated benchmark task.
#[pyclass(name = "Task", module = "lifelong_irl_py", frozen)]
struct PyTask {
    inner: TaskInstance,
}

#[pymethods]
impl PyTask {
    #[getter]
    fn mdp(&self) -> PyMdp {
        PyMdp { inner: self.inner.mdp.clone() }
    }

    #[getter]
    fn true_reward(&self) -> Vec<f64> {
        self.inner.true_reward.clone()
    }

    /// Present on Highway, where the truth is linear in the features.
    #[getter]
    fn true_theta(&self) -> Option<Vec<f64>> {
        self.inner.true_theta.as_ref().map(|t| t.as_slice().to_vec())
    }

    /// JSON record from which the task can be rebuilt exactly.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.record()).map_err(|e| to_py(e.into()))
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        let record = serde_json::from_str(json).map_err(|e| to_py(e.into()))?;
        Ok(Self { inner: TaskInstance::from_record(&record).map_err(to_py)? })
    }

    /// Same reward semantics on a fresh layout.
    fn respawn(&self, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: envs::respawn_instance(&self.inner, Seed(seed)).map_err(to_py)? })
    }

    /// Expert demonstrations from the optimal policy for the true reward.
    fn demonstrations(&self, count: usize, horizon: usize, seed: u64) -> PyResult<PyDemos> {
        Ok(PyDemos { inner: envs::generate_demonstrations(&self.inner, count, horizon, Seed(seed)).map_err(to_py)? })
    }

    /// Return gap of the policy optimal for `theta`, under the true reward.
    #[pyo3(signature = (theta, horizon = 16))]
    fn value_difference(&self, theta: Vec<f64>, horizon: usize) -> PyResult<f64> {
        eval::value_difference(&self.inner, &params(theta)?, horizon).map_err(to_py)
    }
}

#[pyfunction]
#[pyo3(signature = (seed, grid_size = 32, outer_colors = 5, inner_colors = 2))]
fn objectworld_task(seed: u64, grid_size: usize, outer_colors: usize, inner_colors: usize) -> PyResult<PyTask> {
    let defaults = ObjectworldConfig::default();
    let config = ObjectworldConfig {
        grid_size,
        num_outer_colors: outer_colors,
        num_inner_colors: inner_colors,
        max_active_colors: defaults.max_active_colors.min(outer_colors),
        min_active_colors: defaults.min_active_colors.min(outer_colors),
        ..defaults
    };
    Ok(PyTask { inner: envs::generate_objectworld_task(&config, Seed(seed)).map_err(to_py)? })
}

#[pyfunction]
#[pyo3(signature = (seed, lanes = 3, speeds = 4, road_length = 64))]
fn highway_task(seed: u64, lanes: usize, speeds: usize, road_length: usize) -> PyResult<PyTask> {
    let config = HighwayConfig { lanes, speeds, road_length, ..HighwayConfig::default() };
    Ok(PyTask { inner: envs::generate_highway_task(&config, Seed(seed)).map_err(to_py)? })
}

/// Demonstration trajectories of equal horizon.
#[pyclass(name = "DemoSet", module = "lifelong_irl_py", frozen)]
struct PyDemos {
    inner: DemoSet,
}

#[pymethods]
impl PyDemos {
    /// Each trajectory is a list of `(state, action)` pairs.
    #[new]
    fn new(mdp: &PyMdp, trajectories: Vec<Vec<(usize, usize)>>) -> PyResult<Self> {
        let trajs = trajectories
            .into_iter()
            .map(mdp::Trajectory::new)
            .collect::<lifelong_irl::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(Self { inner: DemoSet::new(&mdp.inner, trajs).map_err(to_py)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter]
    fn feature_expectation(&self) -> Vec<f64> {
        self.inner.feature_expectation().to_vec()
    }

    fn trajectories(&self) -> Vec<Vec<(usize, usize)>> {
        self.inner.trajectories().iter().map(|t| t.steps().to_vec()).collect()
    }
}

/// Gradient-ascent MaxEnt fit. Returns a dict with `alpha`, `iterations`,
/// `converged`, `log_likelihood` and `grad_norm`.
#[pyfunction]
#[pyo3(signature = (mdp, demos, step_size = 0.1, max_iterations = 300, grad_tolerance = 1e-4))]
fn fit_maxent(
    py: Python<'_>,
    mdp: &PyMdp,
    demos: &PyDemos,
    step_size: f64,
    max_iterations: usize,
    grad_tolerance: f64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let opts = FitOptions { step_size, max_iterations, grad_norm_tolerance: grad_tolerance, step_halving: true };
    let report = py.detach(|| maxent::fit_maxent(&mdp.inner, &demos.inner, &opts)).map_err(to_py)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("alpha", report.alpha.as_slice().to_vec())?;
    out.set_item("iterations", report.iterations)?;
    out.set_item("converged", report.converged)?;
    out.set_item("log_likelihood", report.final_log_likelihood)?;
    out.set_item("grad_norm", report.final_grad_norm)?;
    Ok(out.unbind())
}

/// Mean log-likelihood gradient at `theta`.
#[pyfunction]
fn maxent_gradient(mdp: &PyMdp, theta: Vec<f64>, demos: &PyDemos) -> PyResult<Vec<f64>> {
    maxent::maxent_gradient(&mdp.inner, &params(theta)?, &demos.inner, demos.inner.horizon()).map_err(to_py)
}

/// Sample covariance of model feature counts, as a nested list.
#[pyfunction]
#[pyo3(signature = (mdp, alpha, samples = 1000, horizon = 16, seed = 0))]
fn estimate_hessian(py: Python<'_>, mdp: &PyMdp, alpha: Vec<f64>, samples: usize, horizon: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let alpha = params(alpha)?;
    let h = py
        .detach(|| maxent::estimate_hessian(&mdp.inner, &alpha, samples, horizon, Seed(seed)))
        .map_err(to_py)?;
    Ok(rows(h.matrix()))
}

/// Standardized reward difference.
#[pyfunction]
fn reward_difference(learned: Vec<f64>, truth: Vec<f64>) -> PyResult<f64> {
    eval::reward_difference(&learned, &truth).map_err(to_py)
}

/// Shared latent basis plus the knowledge stored for each learned task.
#[pyclass(name = "SharedBasis", module = "lifelong_irl_py")]
struct PyBasis {
    inner: SharedBasis,
    tasks: BTreeMap<usize, TaskKnowledge>,
}

fn hessian_from_rows(m: Vec<Vec<f64>>, d: usize) -> PyResult<HessianEstimate> {
    let matrix = lifelong_irl::linalg::from_rows(&m, d, d).map_err(to_py)?;
    HessianEstimate::from_matrix(matrix, 0, 0).map_err(to_py)
}

#[pymethods]
impl PyBasis {
    #[new]
    #[pyo3(signature = (d, k, lam = 1e-2, mu = 1e-2, seed = 0, column_overwrite = true))]
    fn new(d: usize, k: usize, lam: f64, mu: f64, seed: u64, column_overwrite: bool) -> PyResult<Self> {
        let init = if column_overwrite { BasisInit::ColumnOverwrite } else { BasisInit::Random };
        let inner = elirl::init_basis(d, HyperParams { k, lambda: lam, mu }, Seed(seed), init).map_err(to_py)?;
        Ok(Self { inner, tasks: BTreeMap::new() })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn tasks_seen(&self) -> usize {
        self.inner.tasks_seen()
    }

    /// The basis `L` as a `d x k` nested list.
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(self.inner.matrix())
    }

    /// Encode a task and update the basis; returns `(s, theta)`.
    fn learn(&mut self, task_id: usize, alpha: Vec<f64>, hessian: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let h = hessian_from_rows(hessian, self.inner.d())?;
        let (knowledge, theta) = elirl::learn_from_estimates(&mut self.inner, task_id, params(alpha)?, h).map_err(to_py)?;
        let s = knowledge.s.clone();
        self.tasks.insert(task_id, knowledge);
        Ok((s, theta.into_vec()))
    }

    /// Sparse code against the current basis, without updating it.
    fn encode(&self, alpha: Vec<f64>, hessian: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let h = hessian_from_rows(hessian, self.inner.d())?;
        elirl::encode_task(&self.inner, &params(alpha)?, &h).map_err(to_py)
    }

    /// `L s` for a learned task. With `reoptimize`, `s` is first re-solved
    /// against the current basis and the stored coefficients replaced.
    #[pyo3(signature = (task_id, reoptimize = false))]
    fn reward_for_task(&mut self, task_id: usize, reoptimize: bool) -> PyResult<Vec<f64>> {
        let knowledge = self
            .tasks
            .get(&task_id)
            .ok_or_else(|| PyValueError::new_err(format!("task {task_id} has not been learned")))?;
        let knowledge = if reoptimize {
            let fresh = elirl::reoptimize_coefficients(&self.inner, knowledge).map_err(to_py)?;
            self.tasks.insert(task_id, fresh.clone());
            fresh
        } else {
            knowledge.clone()
        };
        Ok(elirl::reward_for_task(&self.inner, &knowledge).map_err(to_py)?.into_vec())
    }

    #[pyo3(signature = (include_accumulators = false))]
    fn to_json(&self, include_accumulators: bool) -> PyResult<String> {
        self.inner.to_json(include_accumulators).map_err(to_py)
    }
}

/// Run a full experiment from `key = value` config text. Returns the
/// number of trials that completed.
#[pyfunction]
#[pyo3(signature = (config_text, out_dir))]
fn run_experiment(py: Python<'_>, config_text: &str, out_dir: PathBuf) -> PyResult<usize> {
    let mut config = ExperimentConfig::default();
    config.apply_text(config_text).map_err(to_py)?;
    config.output_dir = out_dir;
    let outcome = py.detach(|| run_experiment_rs(&config)).map_err(to_py)?;
    if let Some((trial, err)) = outcome.failures.first() {
        return Err(PyRuntimeError::new_err(format!("trial {trial} failed: {err}")));
    }
    Ok(outcome.trials.len())
}

#[pymodule]
pub fn lifelong_irl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMdp>()?;
    m.add_class::<PyTask>()?;
    m.add_class::<PyDemos>()?;
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(objectworld_task, m)?)?;
    m.add_function(wrap_pyfunction!(highway_task, m)?)?;
    m.add_function(wrap_pyfunction!(fit_maxent, m)?)?;
    m.add_function(wrap_pyfunction!(maxent_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(reward_difference, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
