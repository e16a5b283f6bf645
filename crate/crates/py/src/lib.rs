//! Python bindings. Every function returns a JSON string with sorted keys.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::json;

use cuspsym::bgtable::bg_build;
use cuspsym::cusp::sturm_bound;
use cuspsym::eisenstein::{eis_series, TorsionIndex};
use cuspsym::identities::{verify_divisor_sums, verify_master_convolution};
use cuspsym::mu::{manin1_check, manin2_check, mu_eval, mu_eval_at};
use cuspsym::opens::CompactOpenM2;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> PyResult<String> {
    let v = serde_json::to_value(v).map_err(err)?;
    serde_json::to_string(&v).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, k, c1 = 0, c2 = 0, prec = 20))]
fn eisenstein(n: u32, k: u32, c1: i64, c2: i64, prec: usize) -> PyResult<String> {
    to_json(&eis_series(k, &TorsionIndex::new(n, c1, c2), prec).map_err(err)?)
}

/// `open` uses the CLI syntax, e.g. `"1/5,0,1/5,0 mod 1"`.
#[pyfunction]
#[pyo3(signature = (open, degree = 2, prec = 10, level = None))]
fn mu(open: &str, degree: u32, prec: usize, level: Option<u32>) -> PyResult<String> {
    let u: CompactOpenM2 = open.parse().map_err(err)?;
    let v = match level {
        Some(l) => mu_eval_at(&u, l, prec, degree),
        None => mu_eval(&u, prec, degree),
    }
    .map_err(err)?;
    to_json(&v)
}

#[pyfunction]
#[pyo3(signature = (open, level, degree = 3, prec = None))]
fn verify_manin(open: &str, level: u32, degree: u32, prec: Option<usize>) -> PyResult<String> {
    let u: CompactOpenM2 = open.parse().map_err(err)?;
    let prec = prec.unwrap_or_else(|| sturm_bound(level, degree + 2));
    let m1 = manin1_check(&u, Some(level), prec, degree).map_err(err)?;
    let m2 = manin2_check(&u, Some(level), prec, degree).map_err(err)?;
    to_json(&json!({ "man1": m1, "man2": m2, "pass": m1.pass && m2.pass }))
}

#[pyfunction]
#[pyo3(signature = (nmax = 200, series_nmax = 10, prec = 30))]
fn verify_identities(nmax: usize, series_nmax: u32, prec: usize) -> PyResult<String> {
    let conv = verify_master_convolution(series_nmax, prec).map_err(err)?;
    to_json(&json!({ "master_convolution": conv, "divisor_sums": verify_divisor_sums(nmax) }))
}

#[pyfunction]
#[pyo3(signature = (n, k, prec = None))]
fn bg_table(n: u32, k: u32, prec: Option<usize>) -> PyResult<String> {
    let t = bg_build(n, k, prec).map_err(err)?;
    let v: serde_json::Value = serde_json::from_str(&t.to_json().map_err(err)?).map_err(err)?;
    serde_json::to_string(&json!({ "cusp_rank": t.cusp_rank(), "table": v })).map_err(err)
}

#[pymodule]
fn cuspsym_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(eisenstein, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(verify_manin, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identities, m)?)?;
    m.add_function(wrap_pyfunction!(bg_table, m)?)?;
    Ok(())
}
