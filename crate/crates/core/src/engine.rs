//! Chained-equations imputation with five predictor strategies.
//!
//! A run prepares a [`PredictorPlan`] once (quickpred screens, pre-pass
//! completion and fixed component scores where the strategy needs them) and
//! then executes `m` independent chains. Each chain starts from random draws
//! of the observed values and sweeps the incomplete columns in ascending
//! order, always conditioning on the most recent values of every other column.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use log::{debug, warn};
use rand::Rng;
use rayon::prelude::*;

use crate::data::{select_columns, select_rows, ColumnRole, IncompleteData, Matrix};
use crate::error::{Error, Result};
use crate::imputers::ImputerKind;
use crate::pca::{correlation_of_standardized, max_components, pca_from_parts, standardize};
use crate::rng::{derive_rng, SimRng};

pub const DEFAULT_CHAINS: usize = 5;
pub const DEFAULT_ITERATIONS: usize = 20;
pub const DEFAULT_CORR_THRESHOLD: f64 = 0.1;
pub const DEFAULT_PREPASS_THRESHOLD: f64 = 0.3;
pub const DEFAULT_PREPASS_ITERATIONS: usize = 20;

/// Stream index reserved for the pre-pass; chains use their own index.
const PREPASS_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Components of all other columns, recomputed at every visit.
    PcrVbv,
    /// Components of all columns, computed once from a pre-pass completion.
    PcrAll,
    /// Raw analysis columns plus components of the auxiliary block.
    PcrAux,
    /// Raw columns screened by correlation with the target or its response indicator.
    QuickPred,
    /// Raw analysis columns plus the columns that drive missingness.
    Oracle,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::PcrVbv,
        Strategy::PcrAll,
        Strategy::PcrAux,
        Strategy::QuickPred,
        Strategy::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::PcrVbv => "pcr-vbv",
            Strategy::PcrAll => "pcr-all",
            Strategy::PcrAux => "pcr-aux",
            Strategy::QuickPred => "quickpred",
            Strategy::Oracle => "oracle",
        }
    }

    pub fn uses_components(&self) -> bool {
        matches!(self, Strategy::PcrVbv | Strategy::PcrAll | Strategy::PcrAux)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcr-vbv" | "vbv" => Ok(Strategy::PcrVbv),
            "pcr-all" | "all" => Ok(Strategy::PcrAll),
            "pcr-aux" | "aux" => Ok(Strategy::PcrAux),
            "quickpred" | "qp" => Ok(Strategy::QuickPred),
            "oracle" | "or" => Ok(Strategy::Oracle),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Number of principal components used as predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentCount {
    Fixed(usize),
    /// As many as the predictor block and the observed-case budget allow.
    Max,
}

impl fmt::Display for ComponentCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentCount::Fixed(q) => write!(f, "{q}"),
            ComponentCount::Max => f.write_str("max"),
        }
    }
}

impl FromStr for ComponentCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("max") {
            return Ok(ComponentCount::Max);
        }
        match s.parse::<usize>() {
            Ok(q) if q >= 1 => Ok(ComponentCount::Fixed(q)),
            _ => Err(Error::invalid(format!(
                "component count must be a positive integer or \"max\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationSpec {
    pub strategy: Strategy,
    pub components: ComponentCount,
    pub imputer: ImputerKind,
    pub chains: usize,
    pub iterations: usize,
    pub corr_threshold: f64,
    pub prepass_threshold: f64,
    pub prepass_iterations: usize,
    pub seed: u64,
}

impl Default for ImputationSpec {
    fn default() -> Self {
        ImputationSpec {
            strategy: Strategy::PcrVbv,
            components: ComponentCount::Max,
            imputer: ImputerKind::BayesianNormal,
            chains: DEFAULT_CHAINS,
            iterations: DEFAULT_ITERATIONS,
            corr_threshold: DEFAULT_CORR_THRESHOLD,
            prepass_threshold: DEFAULT_PREPASS_THRESHOLD,
            prepass_iterations: DEFAULT_PREPASS_ITERATIONS,
            seed: 0,
        }
    }
}

impl ImputationSpec {
    pub fn new(strategy: Strategy, components: ComponentCount) -> Self {
        ImputationSpec {
            strategy,
            components,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains < 1 {
            return Err(Error::invalid("need at least one chain"));
        }
        if self.iterations < 1 || self.prepass_iterations < 1 {
            return Err(Error::invalid("need at least one iteration"));
        }
        for (name, t) in [
            ("corr_threshold", self.corr_threshold),
            ("prepass_threshold", self.prepass_threshold),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("{name} = {t} not in [0, 1]")));
            }
        }
        if self.components == ComponentCount::Fixed(0) {
            return Err(Error::invalid("component count must be >= 1"));
        }
        self.imputer.validate()
    }

    /// Sweeps per chain. The all-columns strategy conditions only on fixed
    /// component scores, so a single sweep is a full run.
    pub fn main_iterations(&self) -> usize {
        if self.strategy == Strategy::PcrAll {
            1
        } else {
            self.iterations
        }
    }
}

/// Mean and standard deviation of the imputed cells of one column after one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub chain: usize,
    pub iteration: usize,
    pub column: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Receives every trace row as it is produced. Called from worker threads.
pub type TraceHook<'a> = &'a (dyn Fn(&TraceRow) + Sync);

#[derive(Debug, Clone)]
pub struct MultiplyImputedSet {
    pub completions: Vec<Matrix>,
    pub trace: Vec<TraceRow>,
    pub spec: ImputationSpec,
    pub chain_seconds: Vec<f64>,
    /// Number of principal component analyses performed by the run.
    pub pca_count: usize,
    pub column_names: Vec<String>,
}

impl MultiplyImputedSet {
    pub fn m(&self) -> usize {
        self.completions.len()
    }
}

/// Replaces each missing cell with a uniform draw (with replacement) from
/// the observed values of its column.
pub fn initialize_fill<R: Rng + ?Sized>(data: &IncompleteData, rng: &mut R) -> Result<Matrix> {
    let mut out = data.values().clone();
    for j in data.incomplete_columns() {
        let observed: Vec<f64> = data
            .observed_rows(j)
            .into_iter()
            .map(|i| data.values()[(i, j)])
            .collect();
        if observed.is_empty() {
            return Err(Error::AllMissingColumn(data.column_names()[j].clone()));
        }
        for i in data.missing_rows(j) {
            out[(i, j)] = observed[rng.random_range(0..observed.len())];
        }
    }
    Ok(out)
}

fn pairwise_correlation(a: &[f64], b: &[f64], use_row: impl Fn(usize) -> bool) -> f64 {
    let mut n = 0.0;
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..a.len() {
        if use_row(i) {
            n += 1.0;
            sa += a[i];
            sb += b[i];
        }
    }
    if n < 2.0 {
        return f64::NAN;
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        if use_row(i) {
            let (da, db) = (a[i] - ma, b[i] - mb);
            saa += da * da;
            sbb += db * db;
            sab += da * db;
        }
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return f64::NAN;
    }
    sab / (saa * sbb).sqrt()
}

/// Correlation screen on the original incomplete data. For `target`, returns
/// every other column whose pairwise-complete absolute correlation with the
/// target, or with the target's response indicator, is at least `threshold`.
pub fn quickpred_columns(data: &IncompleteData, target: usize, threshold: f64) -> Vec<usize> {
    let n = data.nrows();
    let values = data.values();
    let mask = data.mask();
    let y: Vec<f64> = values.column(target).iter().copied().collect();
    let response: Vec<f64> = (0..n)
        .map(|i| if mask[(i, target)] { 1.0 } else { 0.0 })
        .collect();
    (0..data.ncols())
        .filter(|&k| k != target)
        .filter(|&k| {
            let x: Vec<f64> = values.column(k).iter().copied().collect();
            let r_value = pairwise_correlation(&y, &x, |i| mask[(i, target)] && mask[(i, k)]);
            let r_response = pairwise_correlation(&response, &x, |i| mask[(i, k)]);
            r_value.abs() >= threshold || r_response.abs() >= threshold
        })
        .collect()
}

fn column_is_constant(m: &Matrix, j: usize) -> bool {
    let col = m.column(j);
    let first = col[0];
    col.iter().all(|&v| v == first)
}

fn drop_constant_columns(m: &Matrix, cols: Vec<usize>, context: &str) -> Vec<usize> {
    let (keep, dropped): (Vec<usize>, Vec<usize>) =
        cols.into_iter().partition(|&c| !column_is_constant(m, c));
    if !dropped.is_empty() {
        debug!("{context}: dropped constant predictor columns {dropped:?}");
    }
    keep
}

/// Fixed component scores for strategies that compute them once.
#[derive(Debug, Clone)]
struct FixedScores {
    scores: Matrix,
    /// Number of non-constant columns in the block the scores summarize.
    block_columns: usize,
}

fn fixed_scores(block: &Matrix) -> Result<FixedScores> {
    let std = standardize(block)?;
    let block_columns = std.constant.iter().filter(|&&c| !c).count();
    if block_columns == 0 {
        return Err(Error::invalid("component block has no varying columns"));
    }
    let q = max_components(block.nrows(), block_columns);
    let corr = correlation_of_standardized(&std);
    let pcs = pca_from_parts(std, corr, q);
    Ok(FixedScores {
        scores: pcs.scores,
        block_columns,
    })
}

#[derive(Debug, Clone)]
enum PlanKind {
    Vbv,
    All(FixedScores),
    Aux {
        scores: FixedScores,
        analysis: Vec<usize>,
        /// Pre-pass completion of the auxiliary block, written into each chain.
        block_columns: Vec<usize>,
        block_completion: Matrix,
    },
    Columns(Vec<Vec<usize>>),
}

/// Everything a chain needs to assemble predictors, prepared once per run.
#[derive(Debug)]
pub struct PredictorPlan {
    kind: PlanKind,
    components: ComponentCount,
    /// Columns visited by every sweep, ascending.
    targets: Vec<usize>,
    pca_calls: AtomicUsize,
}

impl PredictorPlan {
    /// Prepares the plan for `spec` on `data`, running the single-imputation
    /// pre-pass for the strategies that extract components once.
    pub fn prepare<R: Rng + ?Sized>(
        spec: &ImputationSpec,
        data: &IncompleteData,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        match spec.strategy {
            Strategy::PcrAll => {
                let completion = prepass_single_impute_with(
                    data,
                    spec.prepass_threshold,
                    spec.prepass_iterations,
                    spec.imputer,
                    rng,
                )?;
                Self::from_completion(spec.strategy, data, &completion, spec.components, spec.corr_threshold)
            }
            Strategy::PcrAux => {
                let block = aux_block(data)?;
                let sub = data.select_columns(&crate::data::ColumnSubset::new(block.clone(), data.ncols())?)?;
                let sub_completion = prepass_single_impute_with(
                    &sub,
                    spec.prepass_threshold,
                    spec.prepass_iterations,
                    spec.imputer,
                    rng,
                )?;
                let mut completion = data.values().clone();
                for (k, &c) in block.iter().enumerate() {
                    completion.set_column(c, &sub_completion.column(k));
                }
                Self::from_completion(spec.strategy, data, &completion, spec.components, spec.corr_threshold)
            }
            _ => Self::from_completion(
                spec.strategy,
                data,
                data.values(),
                spec.components,
                spec.corr_threshold,
            ),
        }
    }

    /// Builds the plan using `completion` as the complete data from which
    /// fixed components are extracted (ignored by the other strategies).
    pub fn from_completion(
        strategy: Strategy,
        data: &IncompleteData,
        completion: &Matrix,
        components: ComponentCount,
        corr_threshold: f64,
    ) -> Result<Self> {
        let incomplete = data.incomplete_columns();
        let pca_calls = AtomicUsize::new(0);
        let (kind, targets) = match strategy {
            Strategy::PcrVbv => (PlanKind::Vbv, incomplete),
            Strategy::PcrAll => {
                check_complete(completion, "pre-pass completion")?;
                pca_calls.fetch_add(1, Ordering::Relaxed);
                (PlanKind::All(fixed_scores(completion)?), incomplete)
            }
            Strategy::PcrAux => {
                let analysis = data.columns_with_role(ColumnRole::AnalysisTarget);
                if analysis.is_empty() {
                    return Err(Error::invalid(
                        "pcr-aux needs at least one analysis column",
                    ));
                }
                let block = aux_block(data)?;
                let block_completion = select_columns(completion, &block);
                check_complete(&block_completion, "auxiliary block completion")?;
                pca_calls.fetch_add(1, Ordering::Relaxed);
                let scores = fixed_scores(&block_completion)?;
                let targets = incomplete
                    .into_iter()
                    .filter(|j| analysis.contains(j))
                    .collect();
                (
                    PlanKind::Aux {
                        scores,
                        analysis,
                        block_columns: block,
                        block_completion,
                    },
                    targets,
                )
            }
            Strategy::QuickPred => {
                let per_target = (0..data.ncols())
                    .map(|j| {
                        if incomplete.contains(&j) {
                            quickpred_columns(data, j, corr_threshold)
                        } else {
                            Vec::new()
                        }
                    })
                    .collect();
                (PlanKind::Columns(per_target), incomplete)
            }
            Strategy::Oracle => {
                let analysis = data.columns_with_role(ColumnRole::AnalysisTarget);
                let mar = data.columns_with_role(ColumnRole::MarPredictor);
                if mar.is_empty() {
                    return Err(Error::invalid(
                        "oracle needs the columns that drive missingness (mar role)",
                    ));
                }
                let per_target = (0..data.ncols())
                    .map(|j| {
                        analysis
                            .iter()
                            .chain(&mar)
                            .copied()
                            .filter(|&c| c != j)
                            .collect()
                    })
                    .collect();
                (PlanKind::Columns(per_target), incomplete)
            }
        };
        Ok(PredictorPlan {
            kind,
            components,
            targets,
            pca_calls,
        })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn pca_count(&self) -> usize {
        self.pca_calls.load(Ordering::Relaxed)
    }

    /// Overwrites the auxiliary block of a chain's working matrix with the
    /// pre-pass completion (no-op for other strategies).
    fn seed_working_matrix(&self, current: &mut Matrix) {
        if let PlanKind::Aux {
            block_columns,
            block_completion,
            ..
        } = &self.kind
        {
            for (k, &c) in block_columns.iter().enumerate() {
                current.set_column(c, &block_completion.column(k));
            }
        }
    }

    fn resolve_q(&self, available: usize, budget: usize) -> Result<usize> {
        match self.components {
            ComponentCount::Max => Ok(available.min(budget).max(1).min(available)),
            ComponentCount::Fixed(q) if q <= available => Ok(q),
            ComponentCount::Fixed(q) => Err(Error::invalid(format!(
                "{q} components requested but only {available} available"
            ))),
        }
    }

    /// Predictor matrix (all n rows) for imputing `target` from `current`.
    /// `n_observed` is the observed-case count of the target, used to keep
    /// predictors + intercept below the number of observed cases when q = max.
    pub fn predictors(&self, current: &Matrix, target: usize, n_observed: usize) -> Result<Matrix> {
        let n = current.nrows();
        // predictors + intercept < observed cases
        let budget = n_observed.saturating_sub(2);
        match &self.kind {
            PlanKind::Vbv => {
                let others: Vec<usize> = (0..current.ncols()).filter(|&c| c != target).collect();
                let others = drop_constant_columns(current, others, "pcr-vbv");
                if others.is_empty() {
                    return Ok(Matrix::zeros(n, 0));
                }
                let block = select_columns(current, &others);
                let q = self.resolve_q(max_components(n, others.len()), budget)?;
                let std = standardize(&block)?;
                let corr = correlation_of_standardized(&std);
                self.pca_calls.fetch_add(1, Ordering::Relaxed);
                Ok(pca_from_parts(std, corr, q).scores)
            }
            PlanKind::All(fixed) => {
                let q = self.resolve_q(max_components(n, fixed.block_columns), budget)?;
                Ok(fixed.scores.columns(0, q).into_owned())
            }
            PlanKind::Aux {
                scores, analysis, ..
            } => {
                let raw: Vec<usize> = analysis.iter().copied().filter(|&c| c != target).collect();
                let raw = drop_constant_columns(current, raw, "pcr-aux");
                let q = self.resolve_q(
                    max_components(n, scores.block_columns),
                    budget.saturating_sub(raw.len()),
                )?;
                let mut out = Matrix::zeros(n, raw.len() + q);
                for (k, &c) in raw.iter().enumerate() {
                    out.set_column(k, &current.column(c));
                }
                for k in 0..q {
                    out.set_column(raw.len() + k, &scores.scores.column(k));
                }
                Ok(out)
            }
            PlanKind::Columns(per_target) => {
                let cols = drop_constant_columns(current, per_target[target].clone(), "raw predictors");
                if cols.is_empty() {
                    warn!("column {target}: no predictors selected, using an intercept-only model");
                }
                Ok(select_columns(current, &cols))
            }
        }
    }
}

fn check_complete(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

fn aux_block(data: &IncompleteData) -> Result<Vec<usize>> {
    let block: Vec<usize> = (0..data.ncols())
        .filter(|&j| data.roles()[j] != ColumnRole::AnalysisTarget)
        .collect();
    if block.is_empty() {
        return Err(Error::invalid("pcr-aux needs at least one auxiliary column"));
    }
    Ok(block)
}

/// Assembles the predictor matrix for `target` under `strategy`. Fixed
/// component strategies extract their components from `current` itself.
pub fn build_predictors(
    strategy: Strategy,
    data: &IncompleteData,
    current: &Matrix,
    target: usize,
    components: ComponentCount,
    corr_threshold: f64,
) -> Result<Matrix> {
    let plan = PredictorPlan::from_completion(strategy, data, current, components, corr_threshold)?;
    plan.predictors(current, target, data.nrows() - data.missing_count(target))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs one chain against a prepared plan.
pub fn run_chain_with_plan<R: Rng + ?Sized>(
    spec: &ImputationSpec,
    data: &IncompleteData,
    plan: &PredictorPlan,
    chain: usize,
    rng: &mut R,
    hook: Option<TraceHook<'_>>,
) -> Result<(Matrix, Vec<TraceRow>)> {
    let mut current = initialize_fill(data, rng)?;
    plan.seed_working_matrix(&mut current);
    let mut trace = Vec::new();
    let visits: Vec<(usize, Vec<usize>, Vec<usize>, Vec<f64>)> = plan
        .targets()
        .iter()
        .map(|&j| {
            let obs = data.observed_rows(j);
            let y: Vec<f64> = obs.iter().map(|&i| data.values()[(i, j)]).collect();
            (j, obs, data.missing_rows(j), y)
        })
        .collect();
    for iteration in 1..=spec.main_iterations() {
        for (j, obs, mis, y_obs) in &visits {
            let predictors = plan.predictors(&current, *j, obs.len())?;
            let x_obs = select_rows(&predictors, obs);
            let x_mis = select_rows(&predictors, mis);
            let imputed = spec.imputer.impute(y_obs, &x_obs, &x_mis, rng)?;
            if imputed.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteImputation {
                    chain,
                    iteration,
                    column: *j,
                });
            }
            for (&i, &v) in mis.iter().zip(&imputed) {
                current[(i, *j)] = v;
            }
            let (mean, sd) = mean_sd(&imputed);
            let row = TraceRow {
                chain,
                iteration,
                column: *j,
                mean,
                sd,
            };
            if let Some(h) = hook {
                h(&row);
            }
            trace.push(row);
        }
    }
    Ok((current, trace))
}

/// Prepares a plan from `rng` and runs a single chain with it.
pub fn run_chain<R: Rng + ?Sized>(
    spec: &ImputationSpec,
    data: &IncompleteData,
    rng: &mut R,
) -> Result<(Matrix, Vec<TraceRow>)> {
    let plan = PredictorPlan::prepare(spec, data, rng)?;
    run_chain_with_plan(spec, data, &plan, 0, rng, None)
}

pub fn run_impute(spec: &ImputationSpec, data: &IncompleteData) -> Result<MultiplyImputedSet> {
    run_impute_with_hook(spec, data, None)
}

/// Runs the pre-pass (when needed) once, then `spec.chains` independent
/// chains. Chain `c` draws from a stream derived from `(seed, c)`, so results
/// do not depend on the chain count or on execution order.
pub fn run_impute_with_hook(
    spec: &ImputationSpec,
    data: &IncompleteData,
    hook: Option<TraceHook<'_>>,
) -> Result<MultiplyImputedSet> {
    spec.validate()?;
    let mut prepass_rng = derive_rng(spec.seed, &[PREPASS_STREAM]);
    let plan = PredictorPlan::prepare(spec, data, &mut prepass_rng)?;
    let results: Vec<Result<(Matrix, Vec<TraceRow>, f64)>> = (0..spec.chains)
        .into_par_iter()
        .map(|chain| {
            let start = Instant::now();
            let mut rng: SimRng = derive_rng(spec.seed, &[chain as u64]);
            run_chain_with_plan(spec, data, &plan, chain, &mut rng, hook)
                .map(|(m, t)| (m, t, start.elapsed().as_secs_f64()))
                .map_err(|e| Error::Chain {
                    chain,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut completions = Vec::with_capacity(spec.chains);
    let mut trace = Vec::new();
    let mut chain_seconds = Vec::with_capacity(spec.chains);
    for r in results {
        let (m, t, s) = r?;
        completions.push(m);
        trace.extend(t);
        chain_seconds.push(s);
    }
    Ok(MultiplyImputedSet {
        completions,
        trace,
        spec: spec.clone(),
        chain_seconds,
        pca_count: plan.pca_count(),
        column_names: data.column_names().to_vec(),
    })
}

/// Single quickpred chain whose final completion is used only to make
/// component extraction possible.
pub fn prepass_single_impute<R: Rng + ?Sized>(
    data: &IncompleteData,
    threshold: f64,
    iterations: usize,
    rng: &mut R,
) -> Result<Matrix> {
    prepass_single_impute_with(data, threshold, iterations, ImputerKind::BayesianNormal, rng)
}

pub fn prepass_single_impute_with<R: Rng + ?Sized>(
    data: &IncompleteData,
    threshold: f64,
    iterations: usize,
    imputer: ImputerKind,
    rng: &mut R,
) -> Result<Matrix> {
    if data.is_complete() {
        return Ok(data.values().clone());
    }
    let spec = ImputationSpec {
        strategy: Strategy::QuickPred,
        corr_threshold: threshold,
        iterations,
        imputer,
        chains: 1,
        ..Default::default()
    };
    spec.validate()?;
    let plan = PredictorPlan::from_completion(
        Strategy::QuickPred,
        data,
        data.values(),
        ComponentCount::Max,
        threshold,
    )?;
    Ok(run_chain_with_plan(&spec, data, &plan, 0, rng, None)?.0)
}
