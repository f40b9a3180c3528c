//! Python bindings for `nbody-core`.
//!
//! Build the importable module with
//!
//! ```sh
//! cargo build --release -p nbody-py --features extension-module
//! cp target/release/libnbody.so python/nbody.so
//! python3 python/smoke_test.py
//! ```

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nbody_core::physics::{DynSystem, Precision, SimulationConfig, Threads, DEFAULT_DT, DEFAULT_G, DEFAULT_SOFTENING};
use nbody_core::sloc::CommentProfile;
use nbody_core::{ladder, verify, Error, VariantId};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A set of bodies in single or double precision.
#[pyclass(name = "ParticleSystem", module = "nbody", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: DynSystem,
}

#[pymethods]
impl PySystem {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn precision(&self) -> &'static str {
        self.inner.precision().as_str()
    }

    fn masses(&self) -> Vec<f64> {
        let s = self.inner.to_f64();
        s.masses().to_vec()
    }

    fn positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .to_f64()
            .positions()
            .into_iter()
            .map(|p| (p.x, p.y, p.z))
            .collect()
    }

    fn velocities(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .to_f64()
            .velocities()
            .into_iter()
            .map(|v| (v.x, v.y, v.z))
            .collect()
    }

    fn checksum(&self) -> u64 {
        self.inner.checksum()
    }

    fn to_precision(&self, precision: &str) -> PyResult<PySystem> {
        let precision: Precision = precision.parse().map_err(to_py_err)?;
        Ok(PySystem {
            inner: self.inner.to_precision(precision),
        })
    }

    fn write_snapshot(&self, path: PathBuf) -> PyResult<()> {
        nbody_core::write_snapshot(&self.inner, path).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ParticleSystem(n={}, precision={})",
            self.inner.len(),
            self.inner.precision()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (n, seed, precision = "double"))]
fn generate(n: usize, seed: u64, precision: &str) -> PyResult<PySystem> {
    let precision: Precision = precision.parse().map_err(to_py_err)?;
    let system = nbody_core::generate(n, seed).map_err(to_py_err)?;
    Ok(PySystem {
        inner: DynSystem::Double(system).to_precision(precision),
    })
}

#[pyfunction]
fn read_snapshot(path: PathBuf) -> PyResult<PySystem> {
    let inner = nbody_core::read_snapshot(path).map_err(to_py_err)?;
    Ok(PySystem { inner })
}

#[pyfunction]
fn list_variants(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    ladder::list_variants()
        .into_iter()
        .map(|v| {
            let d = PyDict::new(py);
            d.set_item("id", v.id.as_str())?;
            d.set_item("strict_math", v.strict_math)?;
            d.set_item("requires_threads", v.requires_threads)?;
            d.set_item("requires_block_size", v.requires_block_size)?;
            d.set_item("build_gated", v.build_gated)?;
            d.set_item("available", v.available)?;
            Ok(d)
        })
        .collect()
}

fn config(
    precision: Precision,
    steps: usize,
    dt: f64,
    g: f64,
    softening: f64,
    threads: Option<usize>,
    block_size: Option<usize>,
) -> SimulationConfig {
    SimulationConfig {
        dt,
        steps,
        g,
        softening,
        precision,
        threads: threads.map_or(Threads::Auto, Threads::Count),
        block_size,
    }
}

/// Runs a ladder variant; `threads=None` means one worker per logical processor.
#[pyfunction]
#[pyo3(signature = (variant, system, steps = 10, dt = DEFAULT_DT, g = DEFAULT_G, softening = DEFAULT_SOFTENING, threads = None, block_size = None))]
#[allow(clippy::too_many_arguments)]
fn run_simulation(
    py: Python<'_>,
    variant: &str,
    system: &PySystem,
    steps: usize,
    dt: f64,
    g: f64,
    softening: f64,
    threads: Option<usize>,
    block_size: Option<usize>,
) -> PyResult<PySystem> {
    let variant: VariantId = variant.parse().map_err(to_py_err)?;
    let cfg = config(system.inner.precision(), steps, dt, g, softening, threads, block_size);
    let input = system.inner.clone();
    let inner = py
        .detach(|| ladder::run_simulation_dyn(variant, &input, &cfg))
        .map_err(to_py_err)?;
    Ok(PySystem { inner })
}

/// The double-precision oracle. Single-precision input is widened first.
#[pyfunction]
#[pyo3(signature = (system, steps = 10, dt = DEFAULT_DT, g = DEFAULT_G, softening = DEFAULT_SOFTENING))]
fn reference_simulate(
    py: Python<'_>,
    system: &PySystem,
    steps: usize,
    dt: f64,
    g: f64,
    softening: f64,
) -> PyResult<PySystem> {
    let cfg = config(Precision::Double, steps, dt, g, softening, None, None);
    let input = system.inner.to_f64();
    let out = py
        .detach(|| verify::reference_simulate(&input, &cfg))
        .map_err(to_py_err)?;
    Ok(PySystem {
        inner: DynSystem::Double(out),
    })
}

#[pyfunction]
#[pyo3(signature = (candidate, reference, guard = verify::DEFAULT_GUARD))]
fn compare_states<'py>(
    py: Python<'py>,
    candidate: &PySystem,
    reference: &PySystem,
    guard: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = match (&candidate.inner, &reference.inner) {
        (DynSystem::Single(a), DynSystem::Single(b)) => verify::compare_states(a, b, guard),
        (DynSystem::Single(a), DynSystem::Double(b)) => verify::compare_states(a, b, guard),
        (DynSystem::Double(a), DynSystem::Single(b)) => verify::compare_states(a, b, guard),
        (DynSystem::Double(a), DynSystem::Double(b)) => verify::compare_states(a, b, guard),
    }
    .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("max_rel_pos_error", report.max_rel_pos_error)?;
    d.set_item("max_rel_vel_error", report.max_rel_vel_error)?;
    d.set_item("argmax_body", report.argmax_body)?;
    d.set_item("bitwise_equal", report.bitwise_equal)?;
    Ok(d)
}

#[pyfunction]
fn gflops(n: usize, steps: usize, seconds: f64) -> PyResult<f64> {
    nbody_core::gflops(n, steps, seconds).map_err(to_py_err)
}

/// Line counts as a JSON document (same schema as `nbody sloc --json`).
#[pyfunction]
fn count_sloc(paths: Vec<PathBuf>, profile: &str) -> PyResult<String> {
    let profile = CommentProfile::by_name(profile)
        .ok_or_else(|| PyValueError::new_err(format!("unknown comment profile `{profile}`")))?;
    let report = nbody_core::sloc::count_sloc(&paths, profile);
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
pub fn nbody(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(list_variants, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(reference_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare_states, m)?)?;
    m.add_function(wrap_pyfunction!(gflops, m)?)?;
    m.add_function(wrap_pyfunction!(count_sloc, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
