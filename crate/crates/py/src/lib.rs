//! Python bindings: special functions, Lévy noise sampling, single-path
//! solves and the experiment runner. Structured results come back as plain
//! Python dicts and lists.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use vofsde::analysis::{self, Problem};
use vofsde::experiment::{self, ExperimentConfig};
use vofsde::noise::{self as vnoise, LevyMeasureSpec};
use vofsde::specfun::{self, SeriesControl};
use vofsde::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config { .. } | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).map_err(err)
}

#[pyfunction]
fn ln_gamma(x: f64) -> PyResult<f64> {
    specfun::ln_gamma(x).map_err(err)
}

#[pyfunction]
fn beta(x: f64, y: f64) -> PyResult<f64> {
    specfun::beta(x, y).map_err(err)
}

#[pyfunction]
fn mittag_leffler(p: f64, q: f64, z: f64) -> PyResult<f64> {
    specfun::mittag_leffler(p, q, z, SeriesControl::default()).map_err(err)
}

#[pyfunction]
fn gronwall_envelope(phi0: f64, c6: f64, beta: f64, t_minus_a: f64) -> PyResult<f64> {
    specfun::gronwall_envelope(phi0, c6, beta, t_minus_a, SeriesControl::default()).map_err(err)
}

#[pyfunction]
fn jensen_discrete_check(values: Vec<f64>, p: f64) -> PyResult<bool> {
    if p.is_nan() || p <= 0.0 {
        return Err(PyValueError::new_err("p must be positive"));
    }
    Ok(analysis::jensen_discrete_check(&values, p))
}

#[pyfunction]
fn list_presets() -> String {
    experiment::list_presets()
}

/// Lévy measure split into small (ε ≤ |z| < 1) and large (|z| ≥ 1) parts.
#[pyclass(name = "LevyMeasure", frozen)]
struct PyLevyMeasure {
    inner: Arc<LevyMeasureSpec>,
}

#[pymethods]
impl PyLevyMeasure {
    /// Parses the JSON form used in experiment configs.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec: LevyMeasureSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        spec.validate().map_err(err)?;
        Ok(Self { inner: Arc::new(spec) })
    }

    /// Stable-like small jumps c|z|^{-1-β} in one dimension, optionally
    /// with Pareto large jumps of total rate `large_mass`.
    #[staticmethod]
    #[pyo3(signature = (c, beta, epsilon = 0.01, large_mass = 0.0, tail_index = 1.5))]
    fn stable_like(c: f64, beta: f64, epsilon: f64, large_mass: f64, tail_index: f64) -> PyResult<Self> {
        let large = if large_mass > 0.0 {
            vnoise::LargeJumpLaw::Pareto {
                mass: large_mass,
                tail_index,
            }
        } else {
            vnoise::LargeJumpLaw::None
        };
        let spec =
            LevyMeasureSpec::new(1, epsilon, vnoise::SmallJumpFamily::StableLike { c, beta }, large).map_err(err)?;
        Ok(Self { inner: Arc::new(spec) })
    }

    fn small_mass(&self) -> f64 {
        self.inner.small_mass()
    }

    fn large_mass(&self) -> f64 {
        self.inner.large_mass()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&*self.inner).expect("spec serializes")
    }

    /// Jump events (time, mark, class) of stream `stream` for `seed`.
    #[pyo3(signature = (horizon, seed, stream = 0))]
    fn sample(&self, horizon: f64, seed: u64, stream: u64) -> PyResult<Vec<(f64, Vec<f64>, &'static str)>> {
        let r = vnoise::sample_realization_stream(Arc::clone(&self.inner), horizon, seed, stream).map_err(err)?;
        Ok(r.events()
            .iter()
            .map(|e| (e.time, e.mark.clone(), e.class.as_str()))
            .collect())
    }
}

/// A solved trajectory on the grid nodes.
#[pyclass(name = "Path", frozen)]
struct PyPath {
    inner: vofsde::Path,
}

#[pymethods]
impl PyPath {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn left_limits(&self) -> Vec<f64> {
        self.inner.left_limits().to_vec()
    }

    fn jump_indices(&self) -> Vec<usize> {
        self.inner.jump_indices().collect()
    }

    fn value_at(&self, t: f64) -> f64 {
        self.inner.value_at(t)
    }

    fn sup_abs(&self) -> f64 {
        self.inner.sup_abs()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Kernel, coefficients, noise and discretization of an experiment config.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: Problem,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn from_config_json(text: &str) -> PyResult<Self> {
        let cfg = ExperimentConfig::from_json_str(text).map_err(err)?;
        Ok(Self {
            inner: experiment::build_problem(&cfg).map_err(err)?,
        })
    }

    /// Path `index` of the run keyed by `seed`, with its Picard report.
    #[pyo3(signature = (seed, index = 0))]
    fn solve<'py>(&self, py: Python<'py>, seed: u64, index: u64) -> PyResult<(PyPath, Bound<'py, PyAny>)> {
        let (path, report) = py.detach(|| self.inner.solve(seed, index)).map_err(err)?;
        Ok((PyPath { inner: path }, to_py(py, &report)?))
    }

    fn mc_sup_moment<'py>(&self, py: Python<'py>, p: f64, paths: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = py
            .detach(|| analysis::mc_sup_moment_with_envelope(&self.inner, p, paths, seed))
            .map_err(err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (p, paths, seed, lags = None))]
    fn holder_exponent<'py>(
        &self,
        py: Python<'py>,
        p: f64,
        paths: usize,
        seed: u64,
        lags: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let lags = lags.unwrap_or_else(|| analysis::dyadic_lags(self.inner.horizon, 5));
        let r = py
            .detach(|| analysis::holder_exponent_estimate(&self.inner, p, paths, &lags, seed))
            .map_err(err)?;
        to_py(py, &r)
    }
}

/// Runs a JSON experiment config, writing outputs into `out_dir`; returns
/// the run report.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_json: &str, out_dir: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(err)?;
    let report = py
        .detach(|| experiment::run_experiment(&cfg, std::path::Path::new(out_dir)))
        .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn gronwall_validate<'py>(
    py: Python<'py>,
    beta: f64,
    c6: f64,
    phi0: f64,
    a: f64,
    b: f64,
    points: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let c = analysis::gronwall_validate(beta, c6, |_| phi0, &format!("constant {phi0}"), a, b, points).map_err(err)?;
    to_py(py, &c)
}

#[pymodule]
fn pyvofsde(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(gronwall_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_discrete_check, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(gronwall_validate, m)?)?;
    m.add_class::<PyLevyMeasure>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyProblem>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
