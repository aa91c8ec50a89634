//! Python bindings. Invalid input raises `ValueError`; failed numerical
//! diagnostics raise `ArithmeticError`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use wrmt_core::kernels::{self, Grid};
use wrmt_core::microscopic::{self, MicroDensity};
use wrmt_core::montecarlo::{self, Ensemble, Histogram, RngConfig, Window};
use wrmt_core::{sop, MicroParams, ModelParams};

fn py_err(e: wrmt_core::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn params(n: usize, nu: usize, a: f64, m: f64) -> PyResult<ModelParams> {
    ModelParams::new(n, nu, a, m).map_err(py_err)
}

/// Finite-n one-point density.
#[pyfunction]
#[pyo3(signature = (x, n, nu, a, m))]
fn rho1(x: f64, n: usize, nu: usize, a: f64, m: f64) -> PyResult<f64> {
    kernels::rho1(x, &params(n, nu, a, m)?).map_err(py_err)
}

/// Finite-n two-point correlation function.
#[pyfunction]
#[pyo3(signature = (x, y, n, nu, a, m))]
fn rho2(x: f64, y: f64, n: usize, nu: usize, a: f64, m: f64) -> PyResult<f64> {
    kernels::rho2(x, y, &params(n, nu, a, m)?).map_err(py_err)
}

/// k-point correlation function at the given points.
#[pyfunction]
#[pyo3(signature = (points, n, nu, a, m))]
fn rho_k(points: Vec<f64>, n: usize, nu: usize, a: f64, m: f64) -> PyResult<f64> {
    kernels::rho_k(&points, &params(n, nu, a, m)?).map_err(py_err)
}

/// `(x, rho1)` on `points` equally spaced abscissae of `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (n, nu, a, m, lo, hi, points))]
fn density_curve(n: usize, nu: usize, a: f64, m: f64, lo: f64, hi: f64, points: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = Grid::new(lo, hi, points).map_err(py_err)?;
    let c = kernels::density_curve(&params(n, nu, a, m)?, &grid).map_err(py_err)?;
    Ok((c.grid, c.values))
}

/// Average characteristic polynomial `<det(z + D5)>`.
#[pyfunction]
#[pyo3(signature = (z, n, nu, a, m))]
fn char_poly_avg(z: f64, n: usize, nu: usize, a: f64, m: f64) -> PyResult<f64> {
    sop::char_poly_avg(z, &params(n, nu, a, m)?).map_err(py_err)
}

/// Microscopic density for index 0 or 1, zero mode included.
#[pyfunction]
#[pyo3(signature = (x_hat, m_hat, a_hat, nu=0))]
fn rho_micro(x_hat: f64, m_hat: f64, a_hat: f64, nu: usize) -> PyResult<f64> {
    let mp = MicroParams::new(m_hat, a_hat, nu).map_err(py_err)?;
    MicroDensity::new(mp).and_then(|d| d.density(x_hat)).map_err(py_err)
}

/// One-flavour microscopic partition function as `(angular, gaussian)`.
#[pyfunction]
#[pyo3(signature = (m_hat, a_hat, z_hat=0.0, nu=0))]
fn partition_nf1(m_hat: f64, a_hat: f64, z_hat: f64, nu: usize) -> PyResult<(f64, f64)> {
    let mp = MicroParams::new(m_hat, a_hat, nu).map_err(py_err)?.with_z(z_hat);
    let v = microscopic::partition_nf1_micro(&mp).map_err(py_err)?;
    Ok((v.angular, v.gaussian))
}

/// Sampled spectra, one ascending list per draw.
#[pyfunction]
#[pyo3(signature = (n, nu, a, m, draws, seed=0, streams=16))]
fn sample_spectra(n: usize, nu: usize, a: f64, m: f64, draws: u64, seed: u64, streams: u64) -> PyResult<Vec<Vec<f64>>> {
    let cfg = RngConfig::new(seed, streams).map_err(py_err)?;
    let run = montecarlo::sample_spectra(&Ensemble::Model1(params(n, nu, a, m)?), &cfg, draws).map_err(py_err)?;
    Ok(run.samples.into_iter().map(|s| s.eigenvalues).collect())
}

/// Eigenvalue histogram as `(centres, density, standard_errors)`.
#[pyfunction]
#[pyo3(signature = (n, nu, a, m, draws, lo, hi, bins, seed=0, streams=16))]
#[allow(clippy::too_many_arguments)]
fn histogram(n: usize, nu: usize, a: f64, m: f64, draws: u64, lo: f64, hi: f64, bins: usize, seed: u64, streams: u64) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let cfg = RngConfig::new(seed, streams).map_err(py_err)?;
    let window = Window::new(lo, hi).map_err(py_err)?;
    let (h, _) = Histogram::sample(&Ensemble::Model1(params(n, nu, a, m)?), &cfg, draws, window, bins, None).map_err(py_err)?;
    Ok((h.centres(), h.density(), h.standard_errors()))
}

/// GUE eigenvalue density with entry variance `variance`.
#[pyfunction]
fn gue_density(x: f64, dim: usize, variance: f64) -> f64 {
    montecarlo::gue_density(x, dim, variance)
}

#[pymodule]
fn wrmt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(rho1, m)?)?;
    m.add_function(wrap_pyfunction!(rho2, m)?)?;
    m.add_function(wrap_pyfunction!(rho_k, m)?)?;
    m.add_function(wrap_pyfunction!(density_curve, m)?)?;
    m.add_function(wrap_pyfunction!(char_poly_avg, m)?)?;
    m.add_function(wrap_pyfunction!(rho_micro, m)?)?;
    m.add_function(wrap_pyfunction!(partition_nf1, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spectra, m)?)?;
    m.add_function(wrap_pyfunction!(histogram, m)?)?;
    m.add_function(wrap_pyfunction!(gue_density, m)?)?;
    Ok(())
}
