//! Python bindings: matrices are nested lists, complex entries are Python `complex`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use micprob_core::channels;
use micprob_core::circuits;
use micprob_core::classicality::{self, ClassicalityConfig, DecoherenceKind, DecoherenceModel, PovmFamily};
use micprob_core::dynamics;
use micprob_core::frames;
use micprob_core::io::CircuitFile;
use micprob_core::linalg::{CMat, RMat, RVec};
use micprob_core::states::{self, ProbVector};

fn err(e: micprob_core::Error) -> PyErr {
    let msg = format!("{}: {e}", e.name());
    if e.is_computational() {
        PyRuntimeError::new_err(msg)
    } else {
        PyValueError::new_err(msg)
    }
}

fn cmat(rows: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows are empty or ragged"));
    }
    Ok(CMat::from_fn(n, m, |i, j| rows[i][j]))
}

fn rmat(rows: Vec<Vec<f64>>) -> PyResult<RMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows are empty or ragged"));
    }
    Ok(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

fn cmat_out(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn rmat_out(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A MIC-POVM frame.
#[pyclass(frozen, name = "Frame")]
struct PyFrame {
    inner: frames::Frame,
}

#[pymethods]
impl PyFrame {
    /// Frame from a list of d×d effects summing to the identity.
    #[new]
    #[pyo3(signature = (effects, tol = 1e-9))]
    fn new(effects: Vec<Vec<Vec<Complex64>>>, tol: f64) -> PyResult<Self> {
        let e = effects.into_iter().map(cmat).collect::<PyResult<Vec<_>>>()?;
        Ok(PyFrame { inner: frames::build_mic_from_effects_tol(e, tol).map_err(err)? })
    }

    /// SIC frame for d = 2 or 3.
    #[staticmethod]
    #[pyo3(signature = (dim = 2))]
    fn sic(dim: usize) -> PyResult<Self> {
        Ok(PyFrame { inner: frames::build_sic(dim).map_err(err)? })
    }

    fn tensor(&self, other: &PyFrame) -> PyFrame {
        PyFrame { inner: frames::tensor(&self.inner, &other.inner) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn effects(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.effects().iter().map(cmat_out).collect()
    }

    #[getter]
    fn duals(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.duals().iter().map(cmat_out).collect()
    }

    #[getter]
    fn gram(&self) -> Vec<Vec<f64>> {
        rmat_out(self.inner.gram())
    }

    #[getter]
    fn gram_inverse(&self) -> Vec<Vec<f64>> {
        rmat_out(self.inner.gram_inverse())
    }

    #[getter]
    fn condition_number(&self) -> f64 {
        self.inner.condition_number()
    }

    /// Born probabilities of a density matrix.
    fn to_prob(&self, rho: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
        let p = states::to_prob(&cmat(rho)?, &self.inner).map_err(err)?;
        Ok(p.as_vector().iter().copied().collect())
    }

    /// Density matrix Σ p_k e_k.
    #[pyo3(name = "from_prob")]
    fn density(&self, p: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        let pv = self.prob(p)?;
        Ok(cmat_out(&states::from_prob(&pv)))
    }

    /// Verdict of the power-trace positivity test.
    #[pyo3(signature = (p, tol = 1e-9))]
    fn is_physical<'py>(&self, py: Python<'py>, p: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let v = states::is_physical(&self.prob(p)?, tol).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("is_physical", v.is_physical)?;
        d.set_item("boundary", v.boundary)?;
        d.set_item("effective_degree", v.effective_degree)?;
        d.set_item("poly_coeffs", v.poly_coeffs)?;
        d.set_item("minors", v.minors)?;
        d.set_item("failure_reason", v.failure_reason)?;
        Ok(d)
    }

    /// Tr(ρ²) computed in probability space.
    fn purity(&self, p: Vec<f64>) -> PyResult<f64> {
        let pv = self.prob(p)?;
        states::hs_inner(&pv, &pv).map_err(err)
    }

    /// Pseudostochastic matrix of a Kraus channel into `out` (default: this frame).
    #[pyo3(signature = (kraus, out = None))]
    fn kraus_to_map(&self, kraus: Vec<Vec<Vec<Complex64>>>, out: Option<&PyFrame>) -> PyResult<Vec<Vec<f64>>> {
        let k = kraus.into_iter().map(cmat).collect::<PyResult<Vec<_>>>()?;
        let target = out.map_or(&self.inner, |f| &f.inner);
        Ok(rmat_out(channels::kraus_to_map(&k, &self.inner, target).map_err(err)?.matrix()))
    }

    /// Complete positivity of a square pseudostochastic matrix on this frame.
    #[pyo3(signature = (matrix, tol = 1e-9))]
    fn is_cptp(&self, matrix: Vec<Vec<f64>>, tol: f64) -> PyResult<bool> {
        let s = channels::PseudoStochasticMap::new(self.inner.clone(), self.inner.clone(), rmat(matrix)?).map_err(err)?;
        Ok(channels::is_cptp(&s, tol).map_err(err)?.is_physical)
    }

    /// GKSL generator matrix of H and Lindblad operators.
    #[pyo3(signature = (hamiltonian, noise_ops = Vec::new()))]
    fn generator(&self, hamiltonian: Vec<Vec<Complex64>>, noise_ops: Vec<Vec<Vec<Complex64>>>) -> PyResult<Vec<Vec<f64>>> {
        let ops = noise_ops.into_iter().map(cmat).collect::<PyResult<Vec<_>>>()?;
        let l = dynamics::gksl_generator(&cmat(hamiltonian)?, &ops, &self.inner).map_err(err)?;
        Ok(rmat_out(l.matrix()))
    }

    /// p(t) = exp(Lt) p for a generator matrix L.
    fn evolve(&self, generator: Vec<Vec<f64>>, p: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        let l = dynamics::GeneratorMatrix::new(self.inner.clone(), rmat(generator)?, dynamics::GeneratorKind::Gksl).map_err(err)?;
        let q = dynamics::evolve(&l, &self.prob(p)?, t).map_err(err)?;
        Ok(q.as_vector().iter().copied().collect())
    }

    /// Whether a generator matrix is of GKSL form.
    #[pyo3(signature = (generator, tol = 1e-9))]
    fn is_gksl(&self, generator: Vec<Vec<f64>>, tol: f64) -> PyResult<bool> {
        Ok(dynamics::is_gksl_matrix(&rmat(generator)?, &self.inner, tol).map_err(err)?.is_physical)
    }

    fn __repr__(&self) -> String {
        format!("Frame(dim={}, effects={})", self.inner.dim(), self.inner.len())
    }
}

impl PyFrame {
    fn prob(&self, p: Vec<f64>) -> PyResult<ProbVector> {
        ProbVector::new(self.inner.clone(), RVec::from_vec(p)).map_err(err)
    }
}

/// Σ_{i≠j} max(0, −L_ij).
#[pyfunction]
fn negativity(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(classicality::negativity(&rmat(matrix)?))
}

fn search_config(restarts: usize, max_iter: usize) -> ClassicalityConfig {
    ClassicalityConfig { restarts, max_iter, ..Default::default() }
}

/// Critical decoherence time of a spin model; `kind` is depol, deph or damp, `family` sic, pmic or mic.
#[pyfunction]
#[pyo3(signature = (kind, theta, family = "mic", seed = 7, restarts = 32, max_iter = 500))]
fn tau_crit(py: Python<'_>, kind: &str, theta: f64, family: &str, seed: u64, restarts: usize, max_iter: usize) -> PyResult<f64> {
    let kind: DecoherenceKind = kind.parse().map_err(err)?;
    let family: PovmFamily = family.parse().map_err(err)?;
    let cfg = search_config(restarts, max_iter);
    let rep = py.detach(|| classicality::tau_crit(kind, theta, family, &cfg, seed)).map_err(err)?;
    Ok(rep.tau_crit)
}

/// Smallest negativity found over a POVM family at fixed τ.
#[pyfunction]
#[pyo3(signature = (kind, theta, tau, family = "mic", seed = 7, restarts = 32, max_iter = 500))]
fn min_negativity(py: Python<'_>, kind: &str, theta: f64, tau: f64, family: &str, seed: u64, restarts: usize, max_iter: usize) -> PyResult<f64> {
    let model = DecoherenceModel::new(kind.parse().map_err(err)?, theta, tau).map_err(err)?;
    let family: PovmFamily = family.parse().map_err(err)?;
    let cfg = search_config(restarts, max_iter);
    let rep = py.detach(|| classicality::min_negativity(&model, family, &cfg, seed)).map_err(err)?;
    Ok(rep.negativity)
}

/// Probability-space matrix of a library gate.
#[pyfunction]
fn gate_map(name: &str) -> PyResult<Vec<Vec<f64>>> {
    let u = circuits::standard_unitary(name).ok_or_else(|| PyValueError::new_err(format!("unknown gate '{name}'")))?;
    Ok(rmat_out(&circuits::gate_map(&u).map_err(err)?))
}

fn record_dict<'py>(py: Python<'py>, rec: &circuits::MeasurementRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (i, p) in rec.probs.iter().enumerate() {
        d.set_item(rec.label(i), *p)?;
    }
    Ok(d)
}

/// Runs a circuit given as JSON text; returns read-out probabilities keyed by bitstring.
#[pyfunction]
fn run_circuit<'py>(py: Python<'py>, program: &str) -> PyResult<Bound<'py, PyDict>> {
    let file: CircuitFile = micprob_core::io::circuit_from_str(program).map_err(err)?;
    let res = circuits::run(&file.program().map_err(err)?).map_err(err)?;
    record_dict(py, &res.record)
}

/// Two-qubit Grover search for `secret`.
#[pyfunction]
fn grover<'py>(py: Python<'py>, secret: &str) -> PyResult<Bound<'py, PyDict>> {
    let res = circuits::run(&circuits::grover_program(secret).map_err(err)?).map_err(err)?;
    record_dict(py, &res.record)
}

#[pymodule]
fn micprob(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(tau_crit, m)?)?;
    m.add_function(wrap_pyfunction!(min_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(gate_map, m)?)?;
    m.add_function(wrap_pyfunction!(run_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(grover, m)?)?;
    Ok(())
}
