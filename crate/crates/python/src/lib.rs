//! Python bindings. Structured results cross the boundary as JSON strings
//! or plain tuples.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dilute_core::attack::{compress, distinguish as run_distinguish, make_compressible, AttackOptions, CompressibleSource};
use dilute_core::commutant::{commutant_dimension as dimension, vandermonde_bound_check, weingarten_table, TableArchive};
use dilute_core::ensembles::{frame_potential as fp, EnsembleSpec};
use dilute_core::moments::{decay_experiment_with, BootstrapOptions, DecayOptions};
use dilute_core::stabilizer::stabilizer_group_of;
use dilute_core::{Error, PauliString};

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Signed Pauli string such as `"-XZI"` or `"+iYY"`.
#[pyclass(name = "PauliString", frozen)]
struct PyPauli(PauliString);

#[pymethods]
impl PyPauli {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyPauli).map_err(py_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PauliString('{}')", self.0)
    }

    fn __mul__(&self, other: PyRef<'_, PyPauli>) -> PyResult<PyPauli> {
        self.0.mul(&other.0).map(PyPauli).map_err(py_err)
    }

    fn __eq__(&self, other: PyRef<'_, PyPauli>) -> bool {
        self.0 == other.0
    }

    fn commutes_with(&self, other: PyRef<'_, PyPauli>) -> bool {
        self.0.commutes_with(&other.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn weight(&self) -> usize {
        self.0.weight()
    }
}

/// Number of Pauli monomials for `k` copies.
#[pyfunction]
fn commutant_dimension(k: usize) -> u64 {
    dimension(k)
}

/// The Gram/Weingarten archive for `(k, n)` as a JSON string.
#[pyfunction]
fn commutant_table(k: usize, n: usize) -> PyResult<String> {
    let t = weingarten_table(k, n).map_err(py_err)?;
    serde_json::to_string(&TableArchive::from_table(&t)).map_err(json_err)
}

/// `(value, stderr)` of the frame potential of an ensemble shorthand.
#[pyfunction]
fn frame_potential(spec: &str, k: usize, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let spec: EnsembleSpec = spec.parse().map_err(py_err)?;
    let e = fp(&spec, k, samples, &mut rng(seed)).map_err(py_err)?;
    Ok((e.value, e.stderr))
}

/// Decay table as a JSON string.
#[pyfunction]
#[pyo3(signature = (n, k, ts, samples, seed, batches = 16, replicates = 24))]
fn decay_experiment(
    n: usize,
    k: usize,
    ts: Vec<usize>,
    samples: usize,
    seed: u64,
    batches: usize,
    replicates: usize,
) -> PyResult<String> {
    let opts = DecayOptions {
        bootstrap: BootstrapOptions { batches, replicates },
    };
    let t = decay_experiment_with(n, k, &ts, samples, opts, &mut rng(seed)).map_err(py_err)?;
    serde_json::to_string(&t).map_err(json_err)
}

/// Distinguisher report (JSON) for a `t`-compressible source, or Haar
/// states when `haar` is set.
#[pyfunction]
#[pyo3(signature = (n, t, trials, seed, l = None, haar = false))]
fn distinguish(n: usize, t: usize, trials: usize, seed: u64, l: Option<usize>, haar: bool) -> PyResult<String> {
    let src = if haar {
        CompressibleSource::haar(n)
    } else {
        CompressibleSource::injected(n, t)
    }
    .map_err(py_err)?;
    let opts = AttackOptions::new(l.unwrap_or(3 * t + 2));
    let rep = run_distinguish(&src, opts, trials, &mut rng(seed)).map_err(py_err)?;
    serde_json::to_string(&rep).map_err(json_err)
}

/// Builds a `t`-compressible state, compresses it and returns the
/// probability that the trailing qubits read 0.
#[pyfunction]
fn compression_check(n: usize, t: usize, seed: u64) -> PyResult<f64> {
    let psi = make_compressible(n, t, &mut rng(seed)).map_err(py_err)?;
    let group = stabilizer_group_of(&psi).map_err(py_err)?;
    let c = compress(&psi, &group).map_err(py_err)?;
    let out = psi.apply(&c.to_matrix().map_err(py_err)?).map_err(py_err)?;
    let kept = n - group.size_exponent();
    Ok(out.prob_zero_on(&(kept..n).collect::<Vec<_>>()))
}

/// `(all_satisfied, max_ratio)` for the row-sum bound at `k`.
#[pyfunction]
fn vandermonde(k: usize) -> PyResult<(bool, f64)> {
    let r = vandermonde_bound_check(k).map_err(py_err)?;
    Ok((r.all_satisfied, r.max_ratio))
}

#[pymodule]
fn dilute(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPauli>()?;
    m.add_function(wrap_pyfunction!(commutant_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(commutant_table, m)?)?;
    m.add_function(wrap_pyfunction!(frame_potential, m)?)?;
    m.add_function(wrap_pyfunction!(decay_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(distinguish, m)?)?;
    m.add_function(wrap_pyfunction!(compression_check, m)?)?;
    m.add_function(wrap_pyfunction!(vandermonde, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
