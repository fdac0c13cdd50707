//! Replicated simulation runs over a grid of conditions and methods.
//!
//! Every replication draws its own data from a stream derived from the root
//! seed, the condition index and the replication index, so results do not
//! depend on the number of workers or on the order in which jobs finish.
//!
//! `metrics.csv` columns: condition, n, p, pn, ncat, method, q, parameter,
//! prb, cic, ciw, runtime_s, s, failures.
//!
//! `estimates.csv` columns: condition, rep, method, q, parameter, estimate,
//! ci_lower, ci_upper, full_estimate.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::data::{default_names, ColumnRole, IncompleteData, Matrix};
use crate::engine::{run_impute, ComponentCount, ImputationSpec, Strategy};
use crate::error::{Error, Result};
use crate::pooling::{analyze_set, point_estimate, ParameterId};
use crate::rng::{derive_rng, derive_seed};
use crate::sim::amputation::ampute;
use crate::sim::generate::{coarsen, generate_complete, SimulationCondition};
use crate::sim::metrics::{compute_cic, compute_ciw, compute_prb, true_value};

pub const METRICS_HEADER: [&str; 14] = [
    "condition", "n", "p", "pn", "ncat", "method", "q", "parameter", "prb", "cic", "ciw",
    "runtime_s", "s", "failures",
];

pub const ESTIMATES_HEADER: [&str; 9] = [
    "condition", "rep", "method", "q", "parameter", "estimate", "ci_lower", "ci_upper",
    "full_estimate",
];

/// An imputation strategy with its component count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodSpec {
    pub strategy: Strategy,
    pub components: ComponentCount,
}

impl MethodSpec {
    pub fn new(strategy: Strategy, components: ComponentCount) -> Self {
        MethodSpec {
            strategy,
            components,
        }
    }

    pub fn raw(strategy: Strategy) -> Self {
        MethodSpec::new(strategy, ComponentCount::Max)
    }

    pub fn pcr(strategy: Strategy, q: usize) -> Self {
        MethodSpec::new(strategy, ComponentCount::Fixed(q))
    }

    /// Component count label, or `NA` for strategies without components.
    pub fn q_label(&self) -> String {
        if self.strategy.uses_components() {
            self.components.to_string()
        } else {
            "NA".into()
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strategy.uses_components() {
            write!(f, "{}(q={})", self.strategy, self.components)
        } else {
            write!(f, "{}", self.strategy)
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyGrid {
    pub conditions: Vec<SimulationCondition>,
    pub methods: Vec<MethodSpec>,
    pub replications: usize,
    pub seed: u64,
    /// Chains, iterations, imputer and thresholds shared by every method.
    /// Strategy, component count and seed are overwritten per run.
    pub template: ImputationSpec,
    pub record_timing: bool,
}

impl StudyGrid {
    pub fn new(conditions: Vec<SimulationCondition>, methods: Vec<MethodSpec>, replications: usize) -> Self {
        StudyGrid {
            conditions,
            methods,
            replications,
            seed: 1,
            template: ImputationSpec::default(),
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::invalid("study grid has no conditions"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("study grid has no methods"));
        }
        if self.replications < 1 {
            return Err(Error::invalid("need at least one replication"));
        }
        for c in &self.conditions {
            c.validate()?;
        }
        self.template.validate()
    }

    /// Means, variances, covariances and correlations of the analysis targets.
    pub fn parameters(cond: &SimulationCondition) -> Vec<ParameterId> {
        ParameterId::moment_set(&(0..cond.targets).collect::<Vec<_>>())
    }

    pub fn method_spec(&self, cond: usize, rep: usize, method: usize) -> ImputationSpec {
        let m = self.methods[method];
        ImputationSpec {
            strategy: m.strategy,
            components: m.components,
            seed: derive_seed(self.seed, &[cond as u64, rep as u64, 1, method as u64]),
            ..self.template.clone()
        }
    }
}

/// Data of one replication: the complete (possibly coarsened) matrix and its
/// amputed copy.
#[derive(Debug, Clone)]
pub struct ReplicationData {
    pub complete: Matrix,
    pub continuous: Matrix,
    pub incomplete: IncompleteData,
    pub roles: Vec<ColumnRole>,
}

/// Generates, amputes and coarsens the data of replication `rep` of `cond`.
pub fn replication_data(
    cond: &SimulationCondition,
    seed: u64,
    cond_index: usize,
    rep: usize,
) -> Result<ReplicationData> {
    let mut rng = derive_rng(seed, &[cond_index as u64, rep as u64, 0]);
    let (continuous, roles) = generate_complete(cond, &mut rng)?;
    let amputed = ampute(&continuous, &roles, cond.miss_prop, &mut rng)?;
    let complete = coarsen(&continuous, &roles, cond.categories);
    let incomplete = amputed.with_values(complete.clone())?;
    Ok(ReplicationData {
        complete,
        continuous,
        incomplete,
        roles,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub condition: usize,
    pub rep: usize,
    pub method: MethodSpec,
    pub parameter: ParameterId,
    pub estimate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub full_estimate: f64,
}

/// Outcome of one method on one replication.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: usize,
    pub seconds: f64,
    pub result: std::result::Result<Vec<EstimateRow>, String>,
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub condition: usize,
    pub rep: usize,
    pub outcomes: Vec<MethodOutcome>,
}

/// Runs every method of the grid on one replication.
pub fn run_replication(grid: &StudyGrid, cond_index: usize, rep: usize) -> ReplicationResult {
    let cond = &grid.conditions[cond_index];
    let fail_all = |msg: String| ReplicationResult {
        condition: cond_index,
        rep,
        outcomes: (0..grid.methods.len())
            .map(|method| MethodOutcome {
                method,
                seconds: 0.0,
                result: Err(msg.clone()),
            })
            .collect(),
    };
    let data = match replication_data(cond, grid.seed, cond_index, rep) {
        Ok(d) => d,
        Err(e) => return fail_all(e.to_string()),
    };
    let pids = StudyGrid::parameters(cond);
    let full: Vec<f64> = match pids
        .iter()
        .map(|&pid| point_estimate(&data.complete, pid))
        .collect::<Result<_>>()
    {
        Ok(f) => f,
        Err(e) => return fail_all(e.to_string()),
    };
    let outcomes = (0..grid.methods.len())
        .map(|mi| {
            let spec = grid.method_spec(cond_index, rep, mi);
            let start = Instant::now();
            let pooled = run_impute(&spec, &data.incomplete).and_then(|set| analyze_set(&set, &pids));
            let seconds = start.elapsed().as_secs_f64();
            let result = match pooled {
                Ok(est) => Ok(pids
                    .iter()
                    .zip(est)
                    .zip(&full)
                    .map(|((&parameter, e), &f)| EstimateRow {
                        condition: cond_index,
                        rep,
                        method: grid.methods[mi],
                        parameter,
                        estimate: e.estimate,
                        ci_lower: e.ci_lower,
                        ci_upper: e.ci_upper,
                        full_estimate: f,
                    })
                    .collect()),
                Err(e) => {
                    warn!(
                        "condition {cond_index}, replication {rep}, {}: {e}",
                        grid.methods[mi]
                    );
                    Err(e.to_string())
                }
            };
            MethodOutcome {
                method: mi,
                seconds,
                result,
            }
        })
        .collect();
    ReplicationResult {
        condition: cond_index,
        rep,
        outcomes,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub condition: usize,
    pub n: usize,
    pub p: usize,
    pub pn: f64,
    pub ncat: String,
    pub method: MethodSpec,
    pub parameter: ParameterId,
    /// `None` when the true value is zero.
    pub prb: Option<f64>,
    pub cic: f64,
    pub ciw: f64,
    /// `None` when timing is not recorded.
    pub runtime_s: Option<f64>,
    /// Successful replications.
    pub s: usize,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub metrics: Vec<MetricRecord>,
    pub estimates: Vec<EstimateRow>,
    pub names: Vec<String>,
}

impl StudyResult {
    pub fn metric(&self, condition: usize, method: MethodSpec, parameter: ParameterId) -> Option<&MetricRecord> {
        self.metrics
            .iter()
            .find(|m| m.condition == condition && m.method == method && m.parameter == parameter)
    }

    pub fn write_metrics<W: Write>(&self, writer: W) -> Result<()> {
        write_metrics_csv(writer, &self.metrics, &self.names)
    }

    pub fn write_estimates<W: Write>(&self, writer: W) -> Result<()> {
        write_estimates_csv(writer, &self.estimates, &self.names)
    }

    /// Writes `metrics.csv` and `estimates.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (file, estimates) in [("metrics.csv", false), ("estimates.csv", true)] {
            let path = dir.join(file);
            let f = File::create(&path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(f);
            if estimates {
                self.write_estimates(&mut w)?;
            } else {
                self.write_metrics(&mut w)?;
            }
            w.flush().map_err(|source| Error::Io { path, source })?;
        }
        Ok(())
    }
}

/// Aggregates replication results into metric records.
pub fn summarize(grid: &StudyGrid, results: &[ReplicationResult]) -> Result<Vec<MetricRecord>> {
    let mut records = Vec::new();
    for (ci, cond) in grid.conditions.iter().enumerate() {
        let pids = StudyGrid::parameters(cond);
        for (mi, &method) in grid.methods.iter().enumerate() {
            let outcomes: Vec<&MethodOutcome> = results
                .iter()
                .filter(|r| r.condition == ci)
                .flat_map(|r| r.outcomes.iter().filter(|o| o.method == mi))
                .collect();
            let ok: Vec<&Vec<EstimateRow>> = outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect();
            let failures = outcomes.len() - ok.len();
            let runtime = if grid.record_timing && !outcomes.is_empty() {
                Some(outcomes.iter().map(|o| o.seconds).sum::<f64>() / outcomes.len() as f64)
            } else {
                None
            };
            for (k, &pid) in pids.iter().enumerate() {
                let rows: Vec<&EstimateRow> = ok.iter().map(|rows| &rows[k]).collect();
                let (prb, cic, ciw) = if rows.is_empty() {
                    (None, f64::NAN, f64::NAN)
                } else {
                    let est: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
                    let full: Vec<f64> = rows.iter().map(|r| r.full_estimate).collect();
                    let ci: Vec<(f64, f64)> = rows.iter().map(|r| (r.ci_lower, r.ci_upper)).collect();
                    let truth = true_value(&full)?;
                    (
                        compute_prb(&est, &full).ok(),
                        compute_cic(&ci, truth)?,
                        compute_ciw(&ci)?,
                    )
                };
                records.push(MetricRecord {
                    condition: ci,
                    n: cond.n,
                    p: cond.n_columns(),
                    pn: cond.noise_proportion,
                    ncat: cond.categories.to_string(),
                    method,
                    parameter: pid,
                    prb,
                    cic,
                    ciw,
                    runtime_s: runtime,
                    s: rows.len(),
                    failures,
                });
            }
        }
    }
    Ok(records)
}

/// Runs the whole grid on `workers` threads.
pub fn run_study(grid: &StudyGrid, workers: usize) -> Result<StudyResult> {
    grid.validate()?;
    let jobs: Vec<(usize, usize)> = (0..grid.conditions.len())
        .flat_map(|c| (0..grid.replications).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
    let total = jobs.len();
    let mut results: Vec<ReplicationResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let res = run_replication(grid, c, r);
                info!("finished condition {c} replication {r} of {total} jobs");
                res
            })
            .collect()
    });
    results.sort_by_key(|r| (r.condition, r.rep));
    let metrics = summarize(grid, &results)?;
    let estimates = results
        .into_iter()
        .flat_map(|r| r.outcomes.into_iter())
        .filter_map(|o| o.result.ok())
        .flatten()
        .collect();
    let p = grid.conditions.iter().map(|c| c.n_columns()).max().unwrap_or(0);
    Ok(StudyResult {
        metrics,
        estimates,
        names: default_names(p),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => "NA".into(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

pub fn write_metrics_csv<W: Write>(writer: W, records: &[MetricRecord], names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.condition.to_string(),
            r.n.to_string(),
            r.p.to_string(),
            r.pn.to_string(),
            r.ncat.clone(),
            r.method.strategy.to_string(),
            r.method.q_label(),
            r.parameter.label(names),
            fmt_opt(r.prb),
            fmt_opt(Some(r.cic)),
            fmt_opt(Some(r.ciw)),
            fmt_opt(r.runtime_s),
            r.s.to_string(),
            r.failures.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn write_estimates_csv<W: Write>(writer: W, rows: &[EstimateRow], names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ESTIMATES_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.condition.to_string(),
            r.rep.to_string(),
            r.method.strategy.to_string(),
            r.method.q_label(),
            r.parameter.label(names),
            r.estimate.to_string(),
            r.ci_lower.to_string(),
            r.ci_upper.to_string(),
            r.full_estimate.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}
