//! Python bindings: a thin layer over the kentmix crate exposing model
//! fitting, order selection, MAP classification, sampling, the normalizing
//! constants, and the adjusted Rand index.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kentmix::simulate::generate_mixture_sample;
use kentmix::{FitConfig, KentError, Labeling, MixtureModel, UnitVector3};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn py_err(e: KentError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_points(raw: Vec<[f64; 3]>) -> PyResult<Vec<UnitVector3>> {
    raw.into_iter()
        .map(|p| {
            UnitVector3::from_unnormalized(Vector3::new(p[0], p[1], p[2])).map_err(py_err)
        })
        .collect()
}

fn from_points(points: &[UnitVector3]) -> Vec<[f64; 3]> {
    points.iter().map(|p| p.coords()).collect()
}

/// A fitted mixture of Kent distributions.
#[pyclass(name = "Model", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: MixtureModel,
}

#[pymethods]
impl PyModel {
    /// Parse and validate the canonical model JSON.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: MixtureModel::from_json(text).map_err(py_err)?,
        })
    }

    /// Canonical JSON (fixed field order, 17-significant-digit floats).
    fn to_json(&self) -> String {
        self.inner.to_canonical_json()
    }

    #[getter]
    fn g(&self) -> usize {
        self.inner.g()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    /// Per-component (beta, kappa, frame) with the frame as 3 row-major rows;
    /// frame columns are xi1, xi2, xi3.
    fn components(&self) -> Vec<(f64, f64, [[f64; 3]; 3])> {
        self.inner
            .components()
            .iter()
            .map(|c| {
                let m = c.frame().matrix();
                let rows = [
                    [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                    [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                    [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
                ];
                (c.beta(), c.kappa(), rows)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Model(g={})", self.inner.g())
    }
}

/// Outcome of a fit: the model plus its likelihood trace and diagnostics.
#[pyclass(name = "FitResult")]
struct PyFitResult {
    #[pyo3(get)]
    model: PyModel,
    #[pyo3(get)]
    loglik_trace: Vec<f64>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    monotonicity_violations: usize,
    #[pyo3(get)]
    restart_index_of_best: usize,
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    g: usize,
    seed: u64,
    max_iterations: usize,
    restarts: usize,
    rel_tol: f64,
    bbar: f64,
    kbar: f64,
    init: &str,
) -> PyResult<FitConfig> {
    Ok(FitConfig {
        g,
        max_iterations,
        rel_tol,
        restarts,
        seed,
        bbar,
        kbar,
        init_method: init.parse().map_err(py_err)?,
    })
}

/// Fit a g-component mixture to points on (or near) the unit sphere;
/// points are projected onto the sphere first.
#[pyfunction]
#[pyo3(signature = (points, g, *, seed = 0, max_iterations = 100, restarts = 10,
                    rel_tol = 1e-8, bbar = 1e-5, kbar = 1e-5, init = "spherical_kmeans"))]
#[allow(clippy::too_many_arguments)]
fn fit(
    points: Vec<[f64; 3]>,
    g: usize,
    seed: u64,
    max_iterations: usize,
    restarts: usize,
    rel_tol: f64,
    bbar: f64,
    kbar: f64,
    init: &str,
) -> PyResult<PyFitResult> {
    let data = to_points(points)?;
    let cfg = build_config(g, seed, max_iterations, restarts, rel_tol, bbar, kbar, init)?;
    let report = kentmix::fit(&data, &cfg).map_err(py_err)?;
    Ok(PyFitResult {
        model: PyModel {
            inner: report.model,
        },
        loglik_trace: report.loglik_trace,
        iterations: report.iterations_run,
        converged: report.converged,
        monotonicity_violations: report.monotonicity_violations,
        restart_index_of_best: report.restart_index_of_best,
    })
}

/// (g, loglik, penalty, criterion) rows of the selection table.
type SelectionRows = Vec<(usize, f64, f64, f64)>;

/// Fit every g in [g_min, g_max] and pick the penalized-criterion argmin.
/// Returns (selected_g, rows) with rows of (g, loglik, penalty, criterion).
#[pyfunction]
#[pyo3(signature = (points, g_min, g_max, *, seed = 0, max_iterations = 100, restarts = 10,
                    rel_tol = 1e-8, bbar = 1e-5, kbar = 1e-5, init = "spherical_kmeans"))]
#[allow(clippy::too_many_arguments)]
fn select(
    points: Vec<[f64; 3]>,
    g_min: usize,
    g_max: usize,
    seed: u64,
    max_iterations: usize,
    restarts: usize,
    rel_tol: f64,
    bbar: f64,
    kbar: f64,
    init: &str,
) -> PyResult<(usize, SelectionRows)> {
    let data = to_points(points)?;
    let cfg = build_config(g_min, seed, max_iterations, restarts, rel_tol, bbar, kbar, init)?;
    let table = kentmix::select_g(&data, g_min, g_max, &cfg).map_err(py_err)?;
    let rows = table
        .rows
        .iter()
        .map(|r| (r.g, r.loglik, r.penalty, r.criterion))
        .collect();
    Ok((table.selected_g, rows))
}

/// Plug-in MAP labels (1-based) for each point under the model.
#[pyfunction]
fn classify(model: &PyModel, points: Vec<[f64; 3]>) -> PyResult<Vec<usize>> {
    let data = to_points(points)?;
    Ok(kentmix::map_classify(&data, &model.inner).labels().to_vec())
}

/// Approximate log-likelihood of the points under the model.
#[pyfunction]
fn log_likelihood(model: &PyModel, points: Vec<[f64; 3]>) -> PyResult<f64> {
    let data = to_points(points)?;
    kentmix::approx_log_likelihood(&data, &model.inner).map_err(py_err)
}

/// Adjusted Rand index between two labelings (labels must be >= 1).
#[pyfunction]
fn adjusted_rand_index(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    let la = Labeling::new(a).map_err(py_err)?;
    let lb = Labeling::new(b).map_err(py_err)?;
    kentmix::adjusted_rand_index(&la, &lb).map_err(py_err)
}

/// Seeded draws from the von Mises-Fisher distribution vMF(mu, kappa).
#[pyfunction]
fn sample_vmf(mu: [f64; 3], kappa: f64, n: usize, seed: u64) -> PyResult<Vec<[f64; 3]>> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(PyValueError::new_err("kappa must be positive"));
    }
    let mu = UnitVector3::from_unnormalized(Vector3::new(mu[0], mu[1], mu[2])).map_err(py_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(from_points(&kentmix::sample_vmf(&mu, kappa, n, &mut rng)))
}

/// Seeded draws (points, labels) from a mixture whose components are all at
/// the vMF floor (beta <= 1e-5).
#[pyfunction]
fn sample_mixture(model: &PyModel, n: usize, seed: u64) -> PyResult<(Vec<[f64; 3]>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (points, labels) = generate_mixture_sample(&model.inner, n, &mut rng).map_err(py_err)?;
    Ok((from_points(&points), labels.labels().to_vec()))
}

/// log of the exact Kent normalizer C(beta, kappa).
#[pyfunction]
#[pyo3(signature = (beta, kappa, rel_tol = 1e-12))]
fn log_kent_normalizer_exact(beta: f64, kappa: f64, rel_tol: f64) -> PyResult<f64> {
    Ok(kentmix::log_kent_normalizer_exact(beta, kappa, rel_tol)
        .map_err(py_err)?
        .value)
}

/// log of the large-kappa approximate normalizer 2π e^κ / sqrt(κ² − 4β²).
#[pyfunction]
fn log_kent_normalizer_approx(beta: f64, kappa: f64) -> PyResult<f64> {
    Ok(kentmix::log_kent_normalizer_approx(beta, kappa)
        .map_err(py_err)?
        .value)
}

/// log I_{2i + 1/2}(kappa).
#[pyfunction]
fn log_bessel_i_half(i: u64, kappa: f64) -> PyResult<f64> {
    Ok(kentmix::log_bessel_i_half(i, kappa).map_err(py_err)?.value)
}

#[pymodule]
fn kentmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(sample_vmf, m)?)?;
    m.add_function(wrap_pyfunction!(sample_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(log_kent_normalizer_exact, m)?)?;
    m.add_function(wrap_pyfunction!(log_kent_normalizer_approx, m)?)?;
    m.add_function(wrap_pyfunction!(log_bessel_i_half, m)?)?;
    Ok(())
}
