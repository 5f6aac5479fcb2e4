//! Python bindings for the backup-window scheduler.
//!
//! Structured results (outcomes, intent parameters) cross the boundary as
//! plain dicts and lists via JSON, so they match the CLI's output documents.

use bwsched_core as core;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    bwsched,
    IllPosedError,
    PyValueError,
    "The request cannot be satisfied as stated."
);
create_exception!(
    bwsched,
    SupportExhaustedError,
    PyRuntimeError,
    "Unable to proceed: no admissible time left before all windows were placed."
);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?
        .call_method1("loads", (value.to_string(),))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj
        .py()
        .import("json")?
        .call_method1("dumps", (obj,))?
        .extract()?;
    serde_json::from_str(&text).map_err(value_err)
}

fn table(name: &str) -> PyResult<core::AlphaTable> {
    name.parse().map_err(value_err)
}

/// A set of periodic job windows.
#[pyclass(name = "Schedule", frozen)]
pub struct PySchedule {
    inner: core::Schedule,
}

#[pymethods]
impl PySchedule {
    /// Parses a JSON schedule document.
    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        core::Schedule::from_json(document)
            .map(|inner| PySchedule { inner })
            .map_err(value_err)
    }

    /// Parses CSV with header `client,start,end[,label]`.
    #[staticmethod]
    #[pyo3(signature = (document, period_hours=core::period::HOURS_PER_WEEK, origin=core::period::DEFAULT_ORIGIN))]
    fn from_csv(document: &str, period_hours: f64, origin: &str) -> PyResult<Self> {
        let period = core::PeriodConfig::new(period_hours, origin).map_err(value_err)?;
        core::Schedule::from_csv(document, period)
            .map(|inner| PySchedule { inner })
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn period_hours(&self) -> f64 {
        self.inner.period_hours()
    }

    #[getter]
    fn concurrency_limit(&self) -> Option<u32> {
        self.inner.concurrency_limit
    }

    fn centers(&self) -> Vec<f64> {
        self.inner.centers()
    }

    /// Windows as dicts with client, center, width, start, end and label.
    fn windows<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let p = &self.inner.period;
        self.inner
            .windows()
            .iter()
            .map(|w| {
                let d = PyDict::new(py);
                d.set_item("client", &w.client)?;
                d.set_item("center", w.center)?;
                d.set_item("width", w.width)?;
                d.set_item("start", p.format_time(w.start(p)))?;
                d.set_item("end", p.format_time(w.end(p)))?;
                d.set_item("label", w.label.clone())?;
                Ok(d)
            })
            .collect()
    }

    /// Number of windows active at `t` (open intervals, periodic).
    fn count_active(&self, t: f64) -> usize {
        self.inner.count_active(t)
    }

    /// `(count, witness_time)` of the busiest instant.
    fn max_concurrency(&self) -> (usize, f64) {
        self.inner.max_concurrency()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule(n={}, period_hours={})",
            self.inner.len(),
            self.inner.period_hours()
        )
    }
}

/// Grid values of a boundary-corrected periodic KDE.
#[pyclass(name = "DensityEstimate", frozen)]
pub struct PyDensity {
    inner: core::DensityEstimate,
}

#[pymethods]
impl PyDensity {
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid()
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.inner.bandwidth()
    }

    #[getter]
    fn expansion(&self) -> f64 {
        self.inner.expansion()
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    fn evaluate(&self, t: f64) -> f64 {
        self.inner.evaluate(t)
    }

    fn __len__(&self) -> usize {
        self.inner.grid_size()
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityEstimate(grid_size={}, bandwidth={:.4})",
            self.inner.grid_size(),
            self.inner.bandwidth()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (points, period_hours=core::period::HOURS_PER_WEEK))]
fn silverman_bandwidth(points: Vec<f64>, period_hours: f64) -> PyResult<f64> {
    core::silverman_bandwidth(&points, period_hours).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (points, period_hours=core::period::HOURS_PER_WEEK))]
fn scott_bandwidth(points: Vec<f64>, period_hours: f64) -> PyResult<f64> {
    core::scott_bandwidth(&points, period_hours).map_err(value_err)
}

fn build_density(
    schedule: &core::Schedule,
    bandwidth: &str,
    expansion_fraction: f64,
    grid_size: usize,
) -> PyResult<core::DensityEstimate> {
    let rule: core::BandwidthRule = bandwidth.parse().map_err(value_err)?;
    let h = rule
        .resolve(&schedule.centers(), schedule.period_hours())
        .map_err(value_err)?;
    core::periodic_kde(schedule, h, expansion_fraction, grid_size).map_err(value_err)
}

/// Periodic KDE of the schedule's window centers.
///
/// `bandwidth` is "silverman", "scott" or "fixed:<hours>".
#[pyfunction]
#[pyo3(signature = (schedule, bandwidth="silverman", expansion_fraction=core::DEFAULT_EXPANSION_FRACTION, grid_size=core::DEFAULT_GRID_SIZE))]
fn periodic_kde(
    schedule: &PySchedule,
    bandwidth: &str,
    expansion_fraction: f64,
    grid_size: usize,
) -> PyResult<PyDensity> {
    build_density(&schedule.inner, bandwidth, expansion_fraction, grid_size)
        .map(|inner| PyDensity { inner })
}

/// Pairs of centers closer than `spacing`, as `(first, second, gap)` tuples.
#[pyfunction]
#[pyo3(signature = (centers, spacing, period_hours=core::period::HOURS_PER_WEEK))]
fn validate_spacing(
    centers: Vec<f64>,
    spacing: f64,
    period_hours: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let period =
        core::PeriodConfig::new(period_hours, core::period::DEFAULT_ORIGIN).map_err(value_err)?;
    Ok(core::validate_spacing(&centers, spacing, &period)
        .into_iter()
        .map(|v| (v.first, v.second, v.gap))
        .collect())
}

/// Checks a request dict against a schedule; returns the well-posedness
/// summary or raises `IllPosedError`.
#[pyfunction]
fn validate_request(schedule: &PySchedule, intent: &Bound<'_, PyAny>) -> PyResult<String> {
    let params: core::IntentParams = from_py(intent)?;
    core::validate_request(&schedule.inner, &params)
        .map(|ok| ok.to_string())
        .map_err(|e| IllPosedError::new_err(e.to_string()))
}

/// Parses an intent sentence into `{"params", "warnings", "recognized", "unrecognized"}`.
///
/// `alpha_table` is "default" or "paper".
#[pyfunction]
#[pyo3(signature = (text, alpha_table="default"))]
fn parse_intent<'py>(
    py: Python<'py>,
    text: &str,
    alpha_table: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let parsed = core::parse_intent(text, &core::IntentParams::default(), &table(alpha_table)?)
        .map_err(value_err)?;
    let recognized: Vec<serde_json::Value> = parsed
        .phrase
        .recognized_clauses
        .iter()
        .map(|c| serde_json::json!({ "kind": format!("{:?}", c.kind), "value": c.value }))
        .collect();
    to_py(
        py,
        &serde_json::json!({
            "params": parsed.params,
            "warnings": parsed.warnings,
            "recognized": recognized,
            "unrecognized": parsed.phrase.unrecognized,
        }),
    )
}

/// Canonical sentence for a request dict; parses back to the same request.
#[pyfunction]
fn render_intent(intent: &Bound<'_, PyAny>) -> PyResult<String> {
    let params: core::IntentParams = from_py(intent)?;
    Ok(core::render_intent(&params))
}

/// Places `intent["k"]` new windows into `schedule`.
///
/// Returns the outcome dict (centers, windows, trace, rng, seed, mode).
/// Raises `IllPosedError` for impossible requests and
/// `SupportExhaustedError` when the placement runs out of room.
#[pyfunction]
#[pyo3(signature = (schedule, intent, seed=0, mode="argmax", bandwidth="silverman", expansion_fraction=core::DEFAULT_EXPANSION_FRACTION, grid_size=core::DEFAULT_GRID_SIZE))]
#[allow(clippy::too_many_arguments)]
fn greedy_sample<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    intent: &Bound<'py, PyAny>,
    seed: u64,
    mode: &str,
    bandwidth: &str,
    expansion_fraction: f64,
    grid_size: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let params: core::IntentParams = from_py(intent)?;
    let mode: core::SamplingMode = mode.parse().map_err(value_err)?;
    let s = &schedule.inner;
    let density = if s.is_empty() {
        None
    } else {
        Some(build_density(s, bandwidth, expansion_fraction, grid_size)?)
    };
    let options = core::SamplerOptions { mode, grid_size };
    match core::greedy_sample(density.as_ref(), s, &params, seed, &options) {
        Ok(outcome) => to_py(py, &outcome.to_json_value(&s.period)),
        Err(e @ core::SampleError::SupportExhausted { .. }) => {
            Err(SupportExhaustedError::new_err(e.to_string()))
        }
        Err(e @ core::SampleError::IllPosed(_)) => Err(IllPosedError::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

#[pymodule]
fn bwsched(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchedule>()?;
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(silverman_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(scott_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_kde, m)?)?;
    m.add_function(wrap_pyfunction!(validate_spacing, m)?)?;
    m.add_function(wrap_pyfunction!(validate_request, m)?)?;
    m.add_function(wrap_pyfunction!(parse_intent, m)?)?;
    m.add_function(wrap_pyfunction!(render_intent, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_sample, m)?)?;
    m.add("IllPosedError", m.py().get_type::<IllPosedError>())?;
    m.add(
        "SupportExhaustedError",
        m.py().get_type::<SupportExhaustedError>(),
    )?;
    m.add("RNG", core::RNG_NAME)?;
    Ok(())
}
