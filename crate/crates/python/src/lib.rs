//! Python bindings. Reports cross the boundary as JSON strings, in the same
//! shape the command line prints with `--json`.

pub mod ops;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use sigmatree_core::corpus;
use sigmatree_core::ptp::Ptp;

/// A validated periodic tree-pair.
#[pyclass(name = "Ptp", module = "sigmatree", frozen)]
struct PyPtp {
    inner: Ptp,
}

#[pymethods]
impl PyPtp {
    /// Parses and validates a JSON document; raises ValueError listing every
    /// violated invariant.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ptp::parse(text).map(|inner| PyPtp { inner }).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        corpus::load_example(name).map(|e| PyPtp { inner: e.ptp() }).map_err(|e| PyKeyError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[pyo3(signature = (assume_fn_stabilizers = false))]
    fn analyze(&self, assume_fn_stabilizers: bool) -> String {
        ops::analyze(&self.inner, assume_fn_stabilizers)
    }

    /// `"all_faced"`, `"unique_candidate"` or `"inconclusive"`.
    fn classification(&self) -> &'static str {
        ops::classification_kind(&self.inner)
    }

    /// The unfaced candidate end as `prefix;cycle`, if there is one.
    fn candidate(&self) -> Option<String> {
        ops::candidate(&self.inner)
    }

    fn faces(&self, end: &str) -> PyResult<String> {
        ops::faces(&self.inner, end).map_err(PyValueError::new_err)
    }

    #[pyo3(signature = (end, lag = 1, depth = 12, omega_cap = 4))]
    fn witness(&self, py: Python<'_>, end: &str, lag: u32, depth: usize, omega_cap: u32) -> PyResult<String> {
        py.detach(|| ops::witness(&self.inner, end, lag, depth, omega_cap)).map_err(PyValueError::new_err)
    }

    #[pyo3(signature = (ray, depth = 4, omega_cap = 4))]
    fn lift(&self, ray: &str, depth: usize, omega_cap: u32) -> PyResult<String> {
        ops::lift(&self.inner, ray, depth, omega_cap).map_err(PyValueError::new_err)
    }

    #[pyo3(signature = (depth = 3, omega_cap = 4))]
    fn expand(&self, depth: u32, omega_cap: u32) -> PyResult<String> {
        ops::expand(&self.inner, depth, omega_cap).map_err(PyValueError::new_err)
    }

    #[pyo3(signature = (depth = 6, omega_cap = 4))]
    fn oracle(&self, py: Python<'_>, depth: u32, omega_cap: u32) -> PyResult<String> {
        py.detach(|| ops::oracle(&self.inner, depth, omega_cap)).map_err(PyValueError::new_err)
    }

    fn __repr__(&self) -> String {
        format!("Ptp({:?})", self.inner.name())
    }
}

/// Names of the built-in examples.
#[pyfunction]
fn examples() -> Vec<&'static str> {
    corpus::names()
}

/// The document of a built-in example.
#[pyfunction]
fn example_document(name: &str) -> PyResult<&'static str> {
    corpus::load_example(name).map(|e| e.document).map_err(|e| PyKeyError::new_err(e.to_string()))
}

/// Runs the command line in-process; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    py.detach(|| sigmatree_cli::run_captured(std::iter::once("sigmatree".to_string()).chain(args)))
}

#[pymodule]
fn sigmatree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPtp>()?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add_function(wrap_pyfunction!(example_document, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
