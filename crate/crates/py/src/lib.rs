//! Python bindings. Descriptor arguments are JSON strings in the same formats
//! the command-line tool reads.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hypercone_core::acceptance::{run_suite, FaultInjection, Suite};
use hypercone_core::growth::{find_threshold_k, Branch, GridSpec};
use hypercone_core::io::{
    parse_cone, parse_cone_metric, parse_dag, parse_models, parse_tree_file, TreeFile,
};
use hypercone_core::spectrum::cross_section_spectrum;
use hypercone_core::trees::{
    gamma_close, gamma_close_large_scale, validate_tree, ConeMetric, ModelRegistry,
};
use hypercone_core::Error;

/// `(mu, multiplicity, gamma_plus, gamma_minus, resonant)`.
type SpectrumRow = (f64, u64, f64, f64, bool);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Invalid(_) | Error::InvalidModel(_) | Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn models(json: Option<&str>) -> PyResult<ModelRegistry> {
    json.map_or(Ok(ModelRegistry::new()), |s| {
        parse_models(s).map_err(py_err)
    })
}

/// Rows `(mu, multiplicity, gamma_plus, gamma_minus, resonant)` up to `mu_max`.
#[pyfunction]
fn spectrum(cone_json: &str, mu_max: f64) -> PyResult<Vec<SpectrumRow>> {
    let cone = parse_cone(cone_json).map_err(py_err)?;
    let ladder = cross_section_spectrum(&cone, mu_max).map_err(py_err)?;
    Ok(ladder
        .entries
        .iter()
        .map(|e| {
            (
                e.mu,
                e.multiplicity,
                e.gamma_plus,
                e.gamma_minus,
                e.resonant,
            )
        })
        .collect())
}

/// `(K_star, witness_alpha, witness_beta, max_discriminant)` on the standard grid.
#[pyfunction]
fn threshold_k(sigma: f64, branch: &str) -> PyResult<(f64, f64, f64, f64)> {
    let branch = match branch {
        "power" => Branch::Power,
        "log" => Branch::Log,
        other => {
            return Err(PyValueError::new_err(format!(
                "branch must be 'power' or 'log', got '{other}'"
            )))
        }
    };
    let r = find_threshold_k(sigma, branch, &GridSpec::standard()).map_err(py_err)?;
    Ok((
        r.k_star,
        r.witness_alpha,
        r.witness_beta,
        r.max_discriminant,
    ))
}

/// `(path, rule)` for every structural violation; empty when valid.
#[pyfunction]
#[pyo3(signature = (tree_json, beta = 0.01, models_json = None))]
fn validate(
    tree_json: &str,
    beta: f64,
    models_json: Option<&str>,
) -> PyResult<Vec<(String, String)>> {
    let models = models(models_json)?;
    let tree = match parse_tree_file(tree_json).map_err(py_err)? {
        TreeFile::Single(t) => t,
        TreeFile::LargeScale(_) => return Err(PyValueError::new_err("expected a single tree")),
    };
    Ok(validate_tree(&tree, beta, &models)
        .into_iter()
        .map(|v| (v.path, v.rule))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (a_json, b_json, gamma, models_json = None, metric_json = None))]
fn close(
    a_json: &str,
    b_json: &str,
    gamma: f64,
    models_json: Option<&str>,
    metric_json: Option<&str>,
) -> PyResult<bool> {
    let models = models(models_json)?;
    let metric = metric_json.map_or(Ok(ConeMetric::default()), |s| {
        parse_cone_metric(s).map_err(py_err)
    })?;
    let verdict = match (
        parse_tree_file(a_json).map_err(py_err)?,
        parse_tree_file(b_json).map_err(py_err)?,
    ) {
        (TreeFile::Single(a), TreeFile::Single(b)) => gamma_close(&a, &b, gamma, &models, &metric),
        (TreeFile::LargeScale(a), TreeFile::LargeScale(b)) => {
            gamma_close_large_scale(&a, &b, gamma, &models, &metric)
        }
        _ => {
            return Err(PyValueError::new_err(
                "cannot compare a single tree with a large-scale tree",
            ))
        }
    }
    .map_err(py_err)?;
    Ok(verdict.close)
}

/// SCAP of every cone in the DAG, ordered by id.
#[pyfunction]
fn scap(dag_json: &str) -> PyResult<Vec<(String, u64)>> {
    let dag = parse_dag(dag_json).map_err(py_err)?;
    Ok(dag.scap_table().map_err(py_err)?.into_iter().collect())
}

/// `(id, passed, measured, tolerance)` per acceptance criterion.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 7))]
fn accept(py: Python<'_>, suite: &str, seed: u64) -> PyResult<Vec<(String, bool, String, String)>> {
    let suite: Suite = suite.parse().map_err(py_err)?;
    let rows = py.detach(|| run_suite(suite, seed, FaultInjection::default()));
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.id.to_string(),
                r.passed,
                r.measured,
                r.tolerance.to_string(),
            )
        })
        .collect())
}

#[pymodule]
fn hypercone_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_k, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(close, m)?)?;
    m.add_function(wrap_pyfunction!(scap, m)?)?;
    m.add_function(wrap_pyfunction!(accept, m)?)?;
    Ok(())
}
