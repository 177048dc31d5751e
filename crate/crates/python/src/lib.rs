use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use anneal_noise_core as core;
use anneal_noise_core::experiments::{Scenario, TableConfig, DEFAULT_GRID_SIZE};
use anneal_noise_core::output::{table_to_csv, trace_to_csv};
use anneal_noise_core::{
    AnnealingSchedule, Error, Network, NoiseSpec, Prng, RandomSource, TargetFunction, TrainingSet,
    WeightBounds,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn bounds(min: f64, max: f64) -> PyResult<WeightBounds> {
    WeightBounds::new(min, max).map_err(py_err)
}

fn function(name: &str) -> PyResult<TargetFunction> {
    name.parse().map_err(py_err)
}

/// MT19937 generator.
#[pyclass(name = "Prng", module = "anneal_noise", skip_from_py_object)]
#[derive(Clone)]
struct PyPrng {
    inner: Prng,
}

#[pymethods]
impl PyPrng {
    #[new]
    fn new(seed: u32) -> Self {
        PyPrng {
            inner: Prng::new(seed),
        }
    }

    #[getter]
    fn seed(&self) -> u32 {
        self.inner.seed()
    }

    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_unit(&mut self) -> f64 {
        self.inner.next_unit()
    }

    fn next_symmetric(&mut self) -> f64 {
        self.inner.next_symmetric()
    }

    fn __repr__(&self) -> String {
        format!("Prng(seed={})", self.inner.seed())
    }
}

/// Feedforward tanh network.
#[pyclass(name = "Network", module = "anneal_noise", skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: Network,
}

#[pymethods]
impl PyNetwork {
    /// All-zero network with the given layer sizes.
    #[new]
    #[pyo3(signature = (sizes = vec![1, 4, 1]))]
    fn new(sizes: Vec<usize>) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: Network::zeros(&sizes).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_params(sizes: Vec<usize>, params: Vec<f64>) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: Network::from_params(&sizes, &params).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn init_random(sizes: Vec<usize>, min: f64, max: f64, rng: &mut PyPrng) -> PyResult<Self> {
        let b = bounds(min, max)?;
        Ok(PyNetwork {
            inner: Network::init_random(&sizes, &b, &mut rng.inner).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: Network::from_text(text).map_err(py_err)?,
        })
    }

    #[getter]
    fn layer_sizes(&self) -> Vec<usize> {
        self.inner.layer_sizes().to_vec()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params()
    }

    fn forward(&self, x: f64) -> PyResult<f64> {
        self.inner.forward(x).map_err(py_err)
    }

    fn rms_error(&self, points: Vec<(f64, f64)>) -> PyResult<f64> {
        let data = TrainingSet::new(points).map_err(py_err)?;
        core::rms_error(&self.inner, &data).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __eq__(&self, other: &PyNetwork) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Network(sizes={:?})", self.inner.layer_sizes())
    }
}

/// Metropolis acceptance test; consumes one draw from `rng`.
#[pyfunction]
fn accept_move(delta_e: f64, temperature: f64, rng: &mut PyPrng) -> PyResult<bool> {
    core::accept_move(delta_e, temperature, &mut rng.inner).map_err(py_err)
}

/// Anneals `net` on `points`; returns `(best_network, best_energy)`.
#[pyfunction]
#[pyo3(signature = (
    net, points, min, max, rng,
    t_initial = None, cooling_factor = None, steps_per_temperature = None,
    t_final = None, move_step = None,
))]
#[allow(clippy::too_many_arguments)]
fn anneal(
    net: &PyNetwork,
    points: Vec<(f64, f64)>,
    min: f64,
    max: f64,
    rng: &mut PyPrng,
    t_initial: Option<f64>,
    cooling_factor: Option<f64>,
    steps_per_temperature: Option<usize>,
    t_final: Option<f64>,
    move_step: Option<f64>,
) -> PyResult<(PyNetwork, f64)> {
    let d = AnnealingSchedule::default();
    let schedule = AnnealingSchedule {
        t_initial: t_initial.unwrap_or(d.t_initial),
        cooling_factor: cooling_factor.unwrap_or(d.cooling_factor),
        steps_per_temperature: steps_per_temperature.unwrap_or(d.steps_per_temperature),
        t_final: t_final.unwrap_or(d.t_final),
        move_step: move_step.unwrap_or(d.move_step),
    };
    let data = TrainingSet::new(points).map_err(py_err)?;
    let res = core::anneal(
        &net.inner,
        &data,
        &schedule,
        &bounds(min, max)?,
        &mut rng.inner,
    )
    .map_err(py_err)?;
    Ok((
        PyNetwork {
            inner: res.best_network,
        },
        res.best_energy,
    ))
}

/// Adds symmetric uniform noise to every hidden weight and bias.
#[pyfunction]
fn add_hidden_noise(
    net: &PyNetwork,
    noise_percent: f64,
    min: f64,
    max: f64,
    rng: &mut PyPrng,
) -> PyResult<PyNetwork> {
    let spec = NoiseSpec::new(noise_percent, 1, bounds(min, max)?).map_err(py_err)?;
    Ok(PyNetwork {
        inner: core::add_hidden_noise(&net.inner, &spec, &mut rng.inner).map_err(py_err)?,
    })
}

#[pyfunction]
fn training_set(name: &str) -> PyResult<Vec<(f64, f64)>> {
    Ok(core::training_set(name).map_err(py_err)?.points().to_vec())
}

#[pyfunction]
fn evaluation_grid(n: usize) -> PyResult<Vec<f64>> {
    core::evaluation_grid(n).map_err(py_err)
}

/// Grid RMS error of `net` against the named function.
#[pyfunction]
#[pyo3(signature = (net, name, grid_size = DEFAULT_GRID_SIZE))]
fn objective(net: &PyNetwork, name: &str, grid_size: usize) -> PyResult<f64> {
    let grid = core::evaluation_grid(grid_size).map_err(py_err)?;
    core::objective(&net.inner, function(name)?, &grid).map_err(py_err)
}

/// Outcome of one train-then-refine run.
#[pyclass(
    name = "ExperimentResult",
    module = "anneal_noise",
    frozen,
    skip_from_py_object
)]
struct PyExperimentResult {
    inner: core::ExperimentResult,
}

#[pymethods]
impl PyExperimentResult {
    #[getter]
    fn initial_error(&self) -> f64 {
        self.inner.initial_error
    }

    #[getter]
    fn final_error(&self) -> f64 {
        self.inner.final_error
    }

    #[getter]
    fn baseline(&self) -> PyNetwork {
        PyNetwork {
            inner: self.inner.baseline.clone(),
        }
    }

    #[getter]
    fn refined(&self) -> PyNetwork {
        PyNetwork {
            inner: self.inner.refined.clone(),
        }
    }

    #[getter]
    fn baseline_outputs(&self) -> Vec<f64> {
        self.inner.baseline_outputs.clone()
    }

    #[getter]
    fn refined_outputs(&self) -> Vec<f64> {
        self.inner.refined_outputs.clone()
    }

    /// Per iteration: `(iteration, eval_x, target, classical_output,
    /// quantum_output, classical_error, quantum_error, accepted)`.
    #[getter]
    #[allow(clippy::type_complexity)]
    fn trace(&self) -> Vec<(usize, f64, f64, f64, f64, f64, f64, bool)> {
        self.inner
            .trace
            .rows
            .iter()
            .map(|r| {
                (
                    r.iteration,
                    r.eval_x,
                    r.target,
                    r.classical_output,
                    r.quantum_output,
                    r.classical_error,
                    r.quantum_error,
                    r.accepted,
                )
            })
            .collect()
    }

    fn trace_csv(&self) -> String {
        trace_to_csv(&self.inner.trace)
    }

    fn __repr__(&self) -> String {
        format!(
            "ExperimentResult(function={}, noise_percent={}, seed={}, initial_error={}, final_error={})",
            self.inner.scenario.function,
            self.inner.scenario.noise_percent,
            self.inner.scenario.seed,
            self.inner.initial_error,
            self.inner.final_error
        )
    }
}

/// Runs one scenario with the default early-stop schedule and the function's
/// default bounds unless overridden.
#[pyfunction]
#[pyo3(signature = (function_name, noise_percent, seed, grid_size = DEFAULT_GRID_SIZE, min = None, max = None))]
fn run_scenario(
    function_name: &str,
    noise_percent: f64,
    seed: u32,
    grid_size: usize,
    min: Option<f64>,
    max: Option<f64>,
) -> PyResult<PyExperimentResult> {
    let f = function(function_name)?;
    let mut s = Scenario::new(f, noise_percent, seed);
    s.grid_size = grid_size;
    let d = f.default_bounds();
    s.bounds = bounds(min.unwrap_or(d.min()), max.unwrap_or(d.max()))?;
    Ok(PyExperimentResult {
        inner: core::run_scenario(&s).map_err(py_err)?,
    })
}

type PyTableRow = (String, f64, Option<u32>, f64, f64);

/// Error table rows `(function, noise_percent, seed or None for the mean,
/// initial_error, final_error)`.
#[pyfunction]
#[pyo3(signature = (seeds, noise_levels = None))]
fn run_table(seeds: Vec<u32>, noise_levels: Option<Vec<f64>>) -> PyResult<Vec<PyTableRow>> {
    let mut cfg = TableConfig::default();
    if let Some(levels) = noise_levels {
        cfg.noise_levels = levels;
    }
    let rows = core::run_table(&seeds, &cfg).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.function.to_string(),
                r.noise_percent,
                r.seed,
                r.initial_error,
                r.final_error,
            )
        })
        .collect())
}

/// Same as `run_table`, formatted as the CLI's table.csv.
#[pyfunction]
fn table_csv(seeds: Vec<u32>) -> PyResult<String> {
    let rows = core::run_table(&seeds, &TableConfig::default()).map_err(py_err)?;
    Ok(table_to_csv(&rows))
}

#[pymodule]
fn anneal_noise(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrng>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyExperimentResult>()?;
    m.add_function(wrap_pyfunction!(accept_move, m)?)?;
    m.add_function(wrap_pyfunction!(anneal, m)?)?;
    m.add_function(wrap_pyfunction!(add_hidden_noise, m)?)?;
    m.add_function(wrap_pyfunction!(training_set, m)?)?;
    m.add_function(wrap_pyfunction!(evaluation_grid, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    m.add_function(wrap_pyfunction!(table_csv, m)?)?;
    Ok(())
}
