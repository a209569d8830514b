//! Python bindings. Reports cross the boundary as JSON text; the `skago`
//! Python package decodes them into dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use skago::bounds::exact::{exact_protocol_eval, ExactOptions};
use skago::bounds::mixed::mixed_source_rates;
use skago::bounds::np::beta_epsilon;
use skago::bounds::second_order::{BerryEsseen, BoundPoint};
use skago::prob::{density_stats, JointPmf, Pmf};
use skago::protocol::{monte_carlo, Protocol, SessionConfig, Variant};
use skago::reconciliation::SliceSpec;
use skago::source::SourceModel;
use skago::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Resource { .. } | Error::Infeasible { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn joint(nx: usize, ny: usize, nz: usize, p: Vec<f64>) -> PyResult<JointPmf> {
    JointPmf::new(nx, ny, nz, p).map_err(py_err)
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "p1" => Ok(Variant::P1),
        "p2-secrecy" => Ok(Variant::P2Secrecy),
        "p2-reliability" => Ok(Variant::P2Reliability),
        other => Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    }
}

/// Density statistics of a pmf over `(X, Y, Z)` given row-major.
#[pyfunction]
#[pyo3(signature = (nx, ny, nz, p))]
fn stats_json(nx: usize, ny: usize, nz: usize, p: Vec<f64>) -> PyResult<String> {
    to_json(&density_stats(&joint(nx, ny, nz, p)?))
}

/// `β_ε(P, Q)`.
#[pyfunction]
fn beta(p: Vec<f64>, q: Vec<f64>, eps: f64) -> PyResult<f64> {
    let (b, _) = beta_epsilon(&Pmf::new(p).map_err(py_err)?, &Pmf::new(q).map_err(py_err)?, eps).map_err(py_err)?;
    Ok(b)
}

#[pyfunction]
fn mixed_json(p1: f64, p2: f64, q: f64) -> PyResult<String> {
    to_json(&mixed_source_rates(p1, p2, q).map_err(py_err)?)
}

/// One point of the second-order curves; `width` is the slice width.
#[pyfunction]
#[pyo3(signature = (nx, ny, nz, p, n, eps_plus_delta, width=1.0))]
fn bound_point_json(nx: usize, ny: usize, nz: usize, p: Vec<f64>, n: u64, eps_plus_delta: f64, width: f64) -> PyResult<String> {
    let stats = density_stats(&joint(nx, ny, nz, p)?);
    to_json(&BoundPoint::compute(&stats, n, eps_plus_delta, width, BerryEsseen::Printed).map_err(py_err)?)
}

#[allow(clippy::too_many_arguments)]
fn protocol(
    nx: usize,
    ny: usize,
    nz: usize,
    p: Vec<f64>,
    n: usize,
    slices: (f64, f64, f64),
    gamma: f64,
    lambda: f64,
    key_bits: usize,
    variant_name: &str,
) -> PyResult<Protocol> {
    let source = SourceModel::iid(joint(nx, ny, nz, p)?, n).map_err(py_err)?;
    let spec = SliceSpec::new(slices.0, slices.1, slices.2).map_err(py_err)?;
    let config = SessionConfig::new(spec, gamma, lambda, key_bits, variant(variant_name)?).map_err(py_err)?;
    Protocol::new(source, config).map_err(py_err)
}

/// Monte Carlo report; `slices` is `(λ_min, λ_max, Δ)`.
#[pyfunction]
#[pyo3(signature = (nx, ny, nz, p, n, slices, gamma, lambda_=0.0, key_bits=1, variant="p1", trials=1000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_json(
    nx: usize,
    ny: usize,
    nz: usize,
    p: Vec<f64>,
    n: usize,
    slices: (f64, f64, f64),
    gamma: f64,
    lambda_: f64,
    key_bits: usize,
    variant: &str,
    trials: u64,
    seed: u64,
) -> PyResult<String> {
    let proto = protocol(nx, ny, nz, p, n, slices, gamma, lambda_, key_bits, variant)?;
    to_json(&monte_carlo(&proto, trials, seed).map_err(py_err)?)
}

/// Exact reliability and secrecy.
#[pyfunction]
#[pyo3(signature = (nx, ny, nz, p, n, slices, gamma, lambda_=0.0, key_bits=1, variant="p1", seed=0))]
#[allow(clippy::too_many_arguments)]
fn exact_json(
    nx: usize,
    ny: usize,
    nz: usize,
    p: Vec<f64>,
    n: usize,
    slices: (f64, f64, f64),
    gamma: f64,
    lambda_: f64,
    key_bits: usize,
    variant: &str,
    seed: u64,
) -> PyResult<String> {
    let proto = protocol(nx, ny, nz, p, n, slices, gamma, lambda_, key_bits, variant)?;
    let opts = ExactOptions {
        master: seed,
        ..ExactOptions::default()
    };
    to_json(&exact_protocol_eval(&proto, &opts).map_err(py_err)?)
}

#[pymodule]
fn _skago(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(stats_json, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_json, m)?)?;
    m.add_function(wrap_pyfunction!(bound_point_json, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_json, m)?)?;
    m.add_function(wrap_pyfunction!(exact_json, m)?)?;
    Ok(())
}
