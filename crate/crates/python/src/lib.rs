//! Python bindings. Matrices cross the boundary as lists of rows; missing
//! cells are `None` or NaN.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mipcr::data::{ColumnRole, IncompleteData, Matrix};
use mipcr::engine::{run_impute, ComponentCount, ImputationSpec, Strategy};
use mipcr::imputers::ImputerKind;
use mipcr::pca::EnumerationRule;
use mipcr::pooling::{ParameterId, ParameterKind, PooledEstimate};
use mipcr::rng::seeded;
use mipcr::sim::generate::{Categories, SimulationCondition};
use mipcr::sim::study::replication_data;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &[Vec<Option<f64>>]) -> PyResult<Matrix> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        return Err(err("empty matrix"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != p) {
        return Err(err(format!("row {i} has {} cells, expected {p}", rows[i].len())));
    }
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j].unwrap_or(f64::NAN)))
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn to_incomplete(rows: &[Vec<Option<f64>>]) -> PyResult<IncompleteData> {
    let values = to_matrix(rows)?;
    let mask = values.map(|v| !v.is_nan());
    let p = values.ncols();
    IncompleteData::new(
        values,
        mask,
        mipcr::data::default_names(p),
        vec![ColumnRole::Auxiliary; p],
    )
    .map_err(err)
}

/// Principal components of the columns of `data`.
#[pyclass(name = "PcaResult", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyPca {
    scores: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    spectrum: Vec<f64>,
}

#[pyfunction]
fn pca(data: Vec<Vec<Option<f64>>>, q: usize) -> PyResult<PyPca> {
    let m = to_matrix(&data)?;
    let r = mipcr::pca::pca(&m, q).map_err(err)?;
    Ok(PyPca {
        scores: to_rows(&r.scores),
        weights: to_rows(&r.weights),
        eigenvalues: r.eigenvalues.clone(),
        spectrum: r.spectrum.clone(),
    })
}

#[pyfunction]
fn scree(data: Vec<Vec<Option<f64>>>) -> PyResult<Vec<f64>> {
    mipcr::pca::scree(&to_matrix(&data)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, rule = "kaiser", seed = 1))]
fn enumerate_components(data: Vec<Vec<Option<f64>>>, rule: &str, seed: u64) -> PyResult<usize> {
    let rule = EnumerationRule::parse(rule).map_err(err)?;
    mipcr::pca::enumerate_components(&to_matrix(&data)?, rule, &mut seeded(seed)).map_err(err)
}

/// Multiply imputes `data` and returns the completions.
#[pyfunction]
#[pyo3(signature = (
    data, method = "pcr-vbv", npc = "max", m = 5, maxit = 20, seed = 1,
    imputer = "bayesian-normal", donors = 5, analysis_cols = vec![], mar_cols = vec![]
))]
#[allow(clippy::too_many_arguments)]
fn impute(
    data: Vec<Vec<Option<f64>>>,
    method: &str,
    npc: &str,
    m: usize,
    maxit: usize,
    seed: u64,
    imputer: &str,
    donors: usize,
    analysis_cols: Vec<usize>,
    mar_cols: Vec<usize>,
) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let data = to_incomplete(&data)?;
    let mut roles = vec![ColumnRole::Auxiliary; data.ncols()];
    for (cols, role) in [
        (&analysis_cols, ColumnRole::AnalysisTarget),
        (&mar_cols, ColumnRole::MarPredictor),
    ] {
        for &c in cols {
            *roles.get_mut(c).ok_or_else(|| err(format!("column {c} out of range")))? = role;
        }
    }
    let data = data.with_roles(roles).map_err(err)?;
    let imputer = match imputer {
        "pmm" => ImputerKind::Pmm { donors },
        "bayesian-normal" | "norm" => ImputerKind::BayesianNormal,
        other => return Err(err(format!("unknown imputer {other:?}"))),
    };
    let spec = ImputationSpec {
        strategy: method.parse::<Strategy>().map_err(err)?,
        components: npc.parse::<ComponentCount>().map_err(err)?,
        imputer,
        chains: m,
        iterations: maxit,
        seed,
        ..Default::default()
    };
    let set = run_impute(&spec, &data).map_err(err)?;
    Ok(set.completions.iter().map(to_rows).collect())
}

#[pyclass(name = "PooledEstimate", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyPooled {
    estimate: f64,
    within_var: f64,
    between_var: f64,
    total_var: f64,
    df: f64,
    ci_lower: f64,
    ci_upper: f64,
    m: usize,
}

#[pymethods]
impl PyPooled {
    fn __repr__(&self) -> String {
        format!(
            "PooledEstimate(estimate={}, total_var={}, df={}, ci=({}, {}))",
            self.estimate, self.total_var, self.df, self.ci_lower, self.ci_upper
        )
    }
}

impl From<PooledEstimate> for PyPooled {
    fn from(p: PooledEstimate) -> Self {
        PyPooled {
            estimate: p.estimate,
            within_var: p.within_var,
            between_var: p.between_var,
            total_var: p.total_var,
            df: p.df,
            ci_lower: p.ci_lower,
            ci_upper: p.ci_upper,
            m: p.m,
        }
    }
}

/// Rubin's rules over `(estimate, variance)` pairs. `kind` is mean, var, cov
/// or cor; correlation pairs are on the Fisher z scale.
#[pyfunction]
fn rubin_pool(pairs: Vec<(f64, f64)>, kind: &str, n_rows: usize) -> PyResult<PyPooled> {
    let kind = match kind {
        "mean" => ParameterKind::Mean,
        "var" => ParameterKind::Variance,
        "cov" => ParameterKind::Covariance,
        "cor" => ParameterKind::Correlation,
        other => return Err(err(format!("unknown parameter kind {other:?}"))),
    };
    mipcr::pooling::rubin_pool(&pairs, kind, n_rows)
        .map(Into::into)
        .map_err(err)
}

/// Pools parameters such as `cor:x1:x2` over completed datasets whose
/// columns are named x1..xp.
#[pyfunction]
fn analyze(completions: Vec<Vec<Vec<Option<f64>>>>, params: Vec<String>) -> PyResult<Vec<PyPooled>> {
    let mats = completions
        .iter()
        .map(|c| to_matrix(c))
        .collect::<PyResult<Vec<_>>>()?;
    let p = mats.first().map_or(0, |m| m.ncols());
    let names = mipcr::data::default_names(p);
    let pids = params
        .iter()
        .map(|s| ParameterId::parse(s, &names))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let pooled = mipcr::pooling::analyze_completions(&mats, &pids).map_err(err)?;
    Ok(pooled.into_iter().map(Into::into).collect())
}

/// One simulated replication: the complete data and its amputed copy with
/// missing cells as NaN.
#[pyfunction]
#[pyo3(signature = (pn = 0.0, ncat = "inf", seed = 1, rep = 0, wide = false))]
fn simulate_replication(
    pn: f64,
    ncat: &str,
    seed: u64,
    rep: usize,
    wide: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let categories: Categories = ncat.parse().map_err(err)?;
    let cond = if wide {
        SimulationCondition::study2(pn, categories)
    } else {
        SimulationCondition::study1(pn, categories)
    };
    let d = replication_data(&cond, seed, 0, rep).map_err(err)?;
    Ok((to_rows(&d.complete), to_rows(d.incomplete.values())))
}

#[pyfunction]
fn calibrate_intercept(scores: Vec<f64>, target: f64) -> PyResult<f64> {
    mipcr::sim::amputation::calibrate_intercept(&scores, target).map_err(err)
}

#[pymodule]
fn mipcr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPca>()?;
    m.add_class::<PyPooled>()?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(scree, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_components, m)?)?;
    m.add_function(wrap_pyfunction!(impute, m)?)?;
    m.add_function(wrap_pyfunction!(rubin_pool, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_replication, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_intercept, m)?)?;
    Ok(())
}
