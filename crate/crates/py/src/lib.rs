//! Python bindings for the fishtail simulator.
//!
//! Results come back as plain dicts and lists (built from the same JSON the
//! command-line tool writes), so they can be handed straight to pandas or
//! `json.dump`.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use wirefish_core::config::SpringSpec;
use wirefish_core::optimizer::{OptMode, OptOptions, PesSetting, Variant};
use wirefish_core::output::summarize;
use wirefish_core::{optimizer, tail_dynamics, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::ConfigLine { .. } | Error::MissingKey { .. } | Error::InvalidConfig(_) | Error::Io { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Converts any serializable value into Python objects via JSON.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn positive(name: &str, v: f64) -> PyResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(PyValueError::new_err(format!("{name} must be positive, got {v}")))
    }
}

fn options(mode: &str, var_cap: Option<f64>) -> PyResult<OptOptions> {
    let mode = match mode {
        "grid" => OptMode::Grid,
        "continuous" => OptMode::Continuous,
        other => return Err(PyValueError::new_err(format!("mode must be 'grid' or 'continuous', got {other:?}"))),
    };
    Ok(OptOptions { mode, variance_cap: var_cap })
}

/// Model parameters and simulation settings.
#[pyclass(name = "Config", module = "wirefish", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: wirefish_core::Config,
}

#[pymethods]
impl PyConfig {
    /// Reads a parameter file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyConfig { inner: wirefish_core::Config::load(path).map_err(to_py_err)? })
    }

    /// The parameter set bundled with the library.
    #[staticmethod]
    fn shipped() -> Self {
        PyConfig { inner: wirefish_core::Config::shipped() }
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyConfig { inner: wirefish_core::Config::parse(text).map_err(to_py_err)? })
    }

    /// A parameter by its config-file key, in SI units.
    fn value(&self, key: &str) -> PyResult<f64> {
        self.inner
            .value(key)
            .ok_or_else(|| PyValueError::new_err(format!("unknown key {key:?}")))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn frequency(&self) -> f64 {
        self.inner.sim.frequency
    }

    #[getter]
    fn pes_stiffness(&self) -> f64 {
        self.inner.model.pes_stiffness()
    }

    #[getter]
    fn aes_stiffness(&self) -> f64 {
        self.inner.model.aes.stiffness()
    }

    /// A copy driven at `hz`.
    fn with_frequency(&self, hz: f64) -> PyResult<Self> {
        let mut c = self.clone();
        c.inner.sim.frequency = positive("frequency", hz)?;
        c.inner.mark_user("sim.frequency");
        Ok(c)
    }

    /// A copy whose PES has stiffness `k2` (N*m).
    fn with_pes_stiffness(&self, k2: f64) -> PyResult<Self> {
        let mut c = self.clone();
        c.inner.model = c.inner.model.with_pes_stiffness(positive("k2", k2)?);
        c.inner.mark_user("pes.thickness");
        Ok(c)
    }

    /// A copy whose PES is `mm` millimetres thick.
    fn with_pes_thickness(&self, mm: f64) -> PyResult<Self> {
        let mut c = self.clone();
        c.inner.model = c.inner.model.with_pes_thickness(positive("thickness", mm)? * 1e-3);
        c.inner.mark_user("pes.thickness");
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(frequency={} Hz, pes_stiffness={:.4} N*m, aes_stiffness={:.4} N*m)",
            self.inner.sim.frequency,
            self.inner.model.pes_stiffness(),
            self.inner.model.aes.stiffness()
        )
    }
}

/// Bending stiffness E*w*t^3/(12*l) of a strip, in N*m.
#[pyfunction]
fn strip_stiffness(length: f64, width: f64, thickness: f64, modulus: f64) -> PyResult<f64> {
    Ok(SpringSpec::new(length, width, thickness, modulus).map_err(to_py_err)?.stiffness())
}

/// Simulates the tail with AES stiffness `k1` (the configured AES when
/// omitted). Returns `{"summary": {...}, "trace": {channel: [...]}}` with
/// the same channels, in SI units, as the command-line `trace.csv`.
#[pyfunction]
#[pyo3(signature = (config, k1=None))]
fn simulate<'py>(py: Python<'py>, config: &PyConfig, k1: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let k1 = match k1 {
        Some(k) => positive("k1", k)?,
        None => cfg.model.aes.stiffness(),
    };
    let trace = py
        .detach(|| tail_dynamics::simulate(&cfg.model, &cfg.sim, k1))
        .map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("summary", to_py(py, &summarize(&trace))?)?;
    let tail = &trace.tail;
    let drive = &trace.drivetrain;
    let columns = PyDict::new(py);
    let put = |name: &str, values: Vec<f64>| columns.set_item(name, values);
    put("t", tail.channel(|s| s.time))?;
    put("theta1", tail.channel(|s| s.theta1))?;
    put("theta2", tail.channel(|s| s.theta2))?;
    put("theta_s", tail.channel(|s| s.theta_s))?;
    put("tau_j1", tail.channel(|s| s.joint_torque))?;
    put("t_e1", drive.iter().map(|d| d.aes_moment).collect())?;
    put("e_aes", drive.iter().map(|d| d.aes_energy).collect())?;
    put("f_wire", drive.iter().map(|d| d.wire_force).collect())?;
    put("t_m", drive.iter().map(|d| d.motor_torque).collect())?;
    put("p_m", drive.iter().map(|d| d.motor_power).collect())?;
    put("thrust", tail.channel(|s| s.thrust))?;
    put("f_cr", tail.channel(|s| s.fin_axial_force))?;
    out.set_item("trace", columns)?;
    Ok(out)
}

/// Admissible AES stiffness interval at the configured operating point.
#[pyfunction]
fn stiffness_bounds<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let b = py
        .detach(|| optimizer::stiffness_bounds(&cfg.model, &cfg.sim))
        .map_err(to_py_err)?;
    to_py(py, &b)
}

/// AES stiffness that minimizes the motor power variance.
#[pyfunction]
#[pyo3(signature = (config, mode="continuous", var_cap=None))]
fn optimize<'py>(py: Python<'py>, config: &PyConfig, mode: &str, var_cap: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let opts = options(mode, var_cap)?;
    let r = py
        .detach(|| optimizer::optimize_k1(&cfg.model, &cfg.sim, &opts))
        .map_err(to_py_err)?;
    to_py(py, &r)
}

/// Optimizes every (frequency, PES) cell. Give exactly one of
/// `pes_thickness_mm` and `pes_stiffness`. Failed cells carry an `error`.
#[pyfunction]
#[pyo3(signature = (config, frequencies, pes_thickness_mm=None, pes_stiffness=None, mode="continuous", var_cap=None, jobs=0))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    config: &PyConfig,
    frequencies: Vec<f64>,
    pes_thickness_mm: Option<Vec<f64>>,
    pes_stiffness: Option<Vec<f64>>,
    mode: &str,
    var_cap: Option<f64>,
    jobs: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let pes: Vec<PesSetting> = match (pes_thickness_mm, pes_stiffness) {
        (Some(d), None) => d.into_iter().map(|mm| PesSetting::Thickness(mm * 1e-3)).collect(),
        (None, Some(k)) => k.into_iter().map(PesSetting::Stiffness).collect(),
        _ => return Err(PyValueError::new_err("give exactly one of pes_thickness_mm and pes_stiffness")),
    };
    for &f in &frequencies {
        positive("frequency", f)?;
    }
    let cfg = config.inner.clone();
    let opts = options(mode, var_cap)?;
    let rows = py
        .detach(|| optimizer::sweep(&cfg.model, &cfg.sim, &frequencies, &pes, &opts, jobs))
        .map_err(to_py_err)?;
    rows.iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("frequency", row.frequency)?;
            d.set_item("pes_stiffness", row.pes_stiffness)?;
            d.set_item("pes_thickness", row.pes_thickness)?;
            match &row.result {
                Ok(r) => d.set_item("result", to_py(py, r)?)?,
                Err(e) => d.set_item("error", e)?,
            }
            Ok(d)
        })
        .collect()
}

/// Highest swing frequency whose peak motor power stays within the cap.
/// `variant` is "aes" (optimized AES) or "rigid".
#[pyfunction]
#[pyo3(signature = (config, variant="aes", mode="continuous"))]
fn max_frequency<'py>(py: Python<'py>, config: &PyConfig, variant: &str, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let variant = match variant {
        "aes" => Variant::Aes,
        "rigid" => Variant::Rigid,
        other => return Err(PyValueError::new_err(format!("variant must be 'aes' or 'rigid', got {other:?}"))),
    };
    let cfg = config.inner.clone();
    let opts = options(mode, None)?;
    let r = py
        .detach(|| optimizer::max_frequency(&cfg.model, &cfg.sim, variant, &opts))
        .map_err(to_py_err)?;
    to_py(py, &r)
}

#[pymodule]
fn wirefish(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(strip_stiffness, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(stiffness_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(max_frequency, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
