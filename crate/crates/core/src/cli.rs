//! Command-line front end: `simulate`, `impute`, `pool` and `enumerate`.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! computation fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::data::{write_matrix_csv, ColumnRole, IncompleteData, Matrix, DEFAULT_NA_TOKEN};
use crate::engine::{
    run_impute_with_hook, ComponentCount, ImputationSpec, MultiplyImputedSet, Strategy, TraceRow,
    DEFAULT_CHAINS, DEFAULT_CORR_THRESHOLD, DEFAULT_ITERATIONS, DEFAULT_PREPASS_ITERATIONS,
    DEFAULT_PREPASS_THRESHOLD,
};
use crate::error::Error;
use crate::imputers::{ImputerKind, DEFAULT_PMM_DONORS};
use crate::pca::{retained_from_scree, scree, EnumerationRule};
use crate::pooling::{analyze_completions, ParameterId, PooledEstimate};
use crate::rng::seeded;
use crate::sim::generate::{Categories, SimulationCondition};
use crate::sim::study::{run_study, MethodSpec, StudyGrid, StudyResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

pub const DEFAULT_SEED: u64 = 1;

pub const POOLED_HEADER: [&str; 9] = [
    "parameter", "estimate", "within_var", "between_var", "total_var", "df", "ci_lower",
    "ci_upper", "m",
];

pub const TRACE_HEADER: [&str; 5] = ["chain", "iteration", "column", "mean", "sd"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(Error::Config { .. }) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "mipcr", version, about = "Multiple imputation with principal component regression")]
pub struct Cli {
    /// Root random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Token marking missing cells in input and output CSVs.
    #[arg(long, global = true, default_value = DEFAULT_NA_TOKEN)]
    pub na_token: String,
    /// Worker threads for simulations.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation grid described by a TOML config.
    Simulate(SimulateArgs),
    /// Multiply impute a CSV file.
    Impute(ImputeArgs),
    /// Pool estimates over imputed CSV files.
    Pool(PoolArgs),
    /// Count components to retain and print the scree.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Path of the TOML config.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    /// pcr-vbv, pcr-all, pcr-aux, quickpred or oracle.
    #[arg(long, default_value = "pcr-vbv")]
    pub method: String,
    /// Number of components, or "max".
    #[arg(long, default_value = "max")]
    pub npc: String,
    /// Number of imputed datasets.
    #[arg(long, default_value_t = DEFAULT_CHAINS)]
    pub m: usize,
    /// Iterations per chain.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub maxit: usize,
    /// Columns to impute. Every incomplete column must be listed.
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    /// Columns of the analysis model.
    #[arg(long, value_delimiter = ',')]
    pub analysis_cols: Vec<String>,
    /// Columns that drive the missingness.
    #[arg(long, value_delimiter = ',')]
    pub mar_cols: Vec<String>,
    /// pmm or bayesian-normal.
    #[arg(long, default_value = "pmm")]
    pub imputer: String,
    #[arg(long, default_value_t = DEFAULT_PMM_DONORS)]
    pub donors: usize,
    /// Correlation threshold of the quickpred screen.
    #[arg(long, default_value_t = DEFAULT_CORR_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value = "imputed")]
    pub out_prefix: String,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Imputed CSV files (at least two).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Comma-separated parameters: mean:A, var:A, cov:A:B, cor:A:B.
    #[arg(long, value_delimiter = ',', required = true)]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    pub input: PathBuf,
    /// kaiser, pa, oc or af.
    #[arg(long, default_value = "kaiser")]
    pub rule: String,
    /// Use only the complete rows of an incomplete file.
    #[arg(long)]
    pub complete_cases: bool,
}

/// Simulation config. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub replications: usize,
    pub record_timing: Option<bool>,
    #[serde(default)]
    pub conditions: ConditionConfig,
    #[serde(default)]
    pub imputation: ImputationConfig,
    pub methods: Vec<MethodConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub n: Option<usize>,
    pub factors: Option<usize>,
    pub items_first_factor: Option<usize>,
    pub items_per_other_factor: Option<usize>,
    pub targets: Option<usize>,
    pub loading: Option<f64>,
    pub high_corr: Option<f64>,
    pub low_corr: Option<f64>,
    pub target_mean: Option<f64>,
    pub target_var: Option<f64>,
    pub miss_prop: Option<f64>,
    pub pn: Option<Vec<f64>>,
    pub ncat: Option<Vec<TextOrNumber>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputationConfig {
    pub chains: Option<usize>,
    pub iterations: Option<usize>,
    pub imputer: Option<String>,
    pub donors: Option<usize>,
    pub corr_threshold: Option<f64>,
    pub prepass_threshold: Option<f64>,
    pub prepass_iterations: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub strategy: String,
    pub q: Option<OneOrMany>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TextOrNumber {
    Number(u64),
    Text(String),
}

impl std::fmt::Display for TextOrNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TextOrNumber::Number(n) => write!(f, "{n}"),
            TextOrNumber::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(TextOrNumber),
    Many(Vec<TextOrNumber>),
}

fn config_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Config {
        field: field.into(),
        message: e.to_string(),
    }
}

fn parse_imputer(tag: &str, donors: usize) -> Result<ImputerKind, Error> {
    let kind = match tag.to_ascii_lowercase().as_str() {
        "pmm" => ImputerKind::Pmm { donors },
        "bayesian-normal" | "norm" => ImputerKind::BayesianNormal,
        other => {
            return Err(Error::invalid(format!(
                "unknown imputer {other:?}; expected pmm or bayesian-normal"
            )))
        }
    };
    kind.validate()?;
    Ok(kind)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| config_err("config", e.message().trim().to_string() + &location(text, e.span())))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Builds the study grid. Conditions are ordered by category count, then
    /// noise proportion.
    pub fn to_grid(&self) -> Result<StudyGrid, Error> {
        let base = SimulationCondition::default();
        let c = &self.conditions;
        let template = SimulationCondition {
            n: c.n.unwrap_or(base.n),
            factors: c.factors.unwrap_or(base.factors),
            items_first_factor: c.items_first_factor.unwrap_or(base.items_first_factor),
            items_per_other_factor: c.items_per_other_factor.unwrap_or(base.items_per_other_factor),
            targets: c.targets.unwrap_or(base.targets),
            loading: c.loading.unwrap_or(base.loading),
            high_corr: c.high_corr.unwrap_or(base.high_corr),
            low_corr: c.low_corr.unwrap_or(base.low_corr),
            target_mean: c.target_mean.unwrap_or(base.target_mean),
            target_var: c.target_var.unwrap_or(base.target_var),
            miss_prop: c.miss_prop.unwrap_or(base.miss_prop),
            ..base
        };
        let pns = c.pn.clone().unwrap_or_else(|| vec![0.0]);
        let ncats = match &c.ncat {
            None => vec![Categories::Continuous],
            Some(v) => v
                .iter()
                .map(|t| t.to_string().parse::<Categories>().map_err(|e| config_err("conditions.ncat", e)))
                .collect::<Result<_, _>>()?,
        };
        if pns.is_empty() {
            return Err(config_err("conditions.pn", "empty list"));
        }
        if ncats.is_empty() {
            return Err(config_err("conditions.ncat", "empty list"));
        }
        let mut conditions = Vec::new();
        for &categories in &ncats {
            for &pn in &pns {
                let cond = SimulationCondition {
                    noise_proportion: pn,
                    categories,
                    ..template.clone()
                };
                cond.validate().map_err(|e| config_err("conditions", e))?;
                conditions.push(cond);
            }
        }

        let imp = &self.imputation;
        let imputer = parse_imputer(
            imp.imputer.as_deref().unwrap_or("bayesian-normal"),
            imp.donors.unwrap_or(DEFAULT_PMM_DONORS),
        )
        .map_err(|e| config_err("imputation.imputer", e))?;
        let spec = ImputationSpec {
            imputer,
            chains: imp.chains.unwrap_or(DEFAULT_CHAINS),
            iterations: imp.iterations.unwrap_or(DEFAULT_ITERATIONS),
            corr_threshold: imp.corr_threshold.unwrap_or(DEFAULT_CORR_THRESHOLD),
            prepass_threshold: imp.prepass_threshold.unwrap_or(DEFAULT_PREPASS_THRESHOLD),
            prepass_iterations: imp.prepass_iterations.unwrap_or(DEFAULT_PREPASS_ITERATIONS),
            ..Default::default()
        };
        spec.validate().map_err(|e| config_err("imputation", e))?;

        if self.methods.is_empty() {
            return Err(config_err("methods", "at least one method is required"));
        }
        let mut methods = Vec::new();
        for (k, m) in self.methods.iter().enumerate() {
            let field = format!("methods[{k}]");
            let strategy: Strategy = m.strategy.parse().map_err(|e| config_err(&format!("{field}.strategy"), e))?;
            let qs: Vec<TextOrNumber> = match &m.q {
                None => vec![TextOrNumber::Text("max".into())],
                Some(OneOrMany::One(v)) => vec![v.clone()],
                Some(OneOrMany::Many(v)) => v.clone(),
            };
            if !strategy.uses_components() {
                if m.q.is_some() {
                    return Err(config_err(&format!("{field}.q"), format!("{strategy} takes no component count")));
                }
                methods.push(MethodSpec::raw(strategy));
                continue;
            }
            if qs.is_empty() {
                return Err(config_err(&format!("{field}.q"), "empty list"));
            }
            for q in qs {
                let components: ComponentCount =
                    q.to_string().parse().map_err(|e| config_err(&format!("{field}.q"), e))?;
                methods.push(MethodSpec::new(strategy, components));
            }
        }
        if self.replications < 1 {
            return Err(config_err("replications", "must be at least 1"));
        }
        Ok(StudyGrid {
            conditions,
            methods,
            replications: self.replications,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            template: spec,
            record_timing: self.record_timing.unwrap_or(true),
        })
    }
}

fn location(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Error> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn out_dir(cli: &Cli, fallback: Option<&Path>) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| fallback.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn cmd_simulate(cli: &Cli, args: &SimulateArgs, out: &mut dyn Write) -> Result<StudyResult, CliError> {
    let config = RunConfig::load(&args.config)?;
    let mut grid = config.to_grid()?;
    if let Some(seed) = cli.seed {
        grid.seed = seed;
    }
    let workers = cli.workers.or(config.workers).unwrap_or(1);
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let dir = out_dir(cli, config.out_dir.as_deref());
    let result = run_study(&grid, workers)?;
    result.save(&dir)?;
    let failures: usize = result
        .metrics
        .iter()
        .filter(|m| m.parameter == result.metrics[0].parameter)
        .map(|m| m.failures)
        .sum();
    writeln!(
        out,
        "{} conditions x {} methods x {} replications; {failures} failed runs; results in {}",
        grid.conditions.len(),
        grid.methods.len(),
        grid.replications,
        dir.display()
    )
    .map_err(|e| usage(e))?;
    Ok(result)
}

fn resolve_names(data: &IncompleteData, names: &[String], flag: &str) -> Result<Vec<usize>, CliError> {
    names
        .iter()
        .map(|n| {
            data.column_index(n)
                .ok_or_else(|| usage(format!("{flag}: unknown column {n:?}")))
        })
        .collect()
}

/// Validates the flags of `impute` against the loaded data and returns the
/// imputation spec and role-annotated data.
pub fn prepare_impute(
    cli: &Cli,
    args: &ImputeArgs,
    data: IncompleteData,
) -> Result<(ImputationSpec, IncompleteData), CliError> {
    let strategy: Strategy = args.method.parse().map_err(usage)?;
    let components: ComponentCount = args.npc.parse().map_err(usage)?;
    let imputer = parse_imputer(&args.imputer, args.donors).map_err(usage)?;
    let analysis = resolve_names(&data, &args.analysis_cols, "--analysis-cols")?;
    let mar = resolve_names(&data, &args.mar_cols, "--mar-cols")?;
    if let Some(c) = analysis.iter().find(|c| mar.contains(c)) {
        return Err(usage(format!(
            "column {:?} is in both --analysis-cols and --mar-cols",
            data.column_names()[*c]
        )));
    }
    if strategy == Strategy::PcrAux && analysis.is_empty() {
        return Err(usage("--method pcr-aux requires --analysis-cols"));
    }
    if strategy == Strategy::Oracle && mar.is_empty() {
        return Err(usage("--method oracle requires --mar-cols"));
    }
    if !args.targets.is_empty() {
        let targets = resolve_names(&data, &args.targets, "--targets")?;
        let missing: Vec<&str> = data
            .incomplete_columns()
            .into_iter()
            .filter(|c| !targets.contains(c))
            .map(|c| data.column_names()[c].as_str())
            .collect();
        if !missing.is_empty() {
            return Err(usage(format!(
                "--targets must list every incomplete column; missing {}",
                missing.join(", ")
            )));
        }
    }
    let mut roles = vec![ColumnRole::Auxiliary; data.ncols()];
    for &c in &analysis {
        roles[c] = ColumnRole::AnalysisTarget;
    }
    for &c in &mar {
        roles[c] = ColumnRole::MarPredictor;
    }
    let data = data.with_roles(roles).map_err(usage)?;
    let spec = ImputationSpec {
        strategy,
        components,
        imputer,
        chains: args.m,
        iterations: args.maxit,
        corr_threshold: args.threshold,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        ..Default::default()
    };
    spec.validate().map_err(usage)?;
    Ok((spec, data))
}

pub fn write_trace_csv<W: Write>(writer: W, trace: &[TraceRow], names: &[String]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    let e = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(TRACE_HEADER).map_err(e)?;
    for r in trace {
        w.write_record([
            (r.chain + 1).to_string(),
            r.iteration.to_string(),
            names[r.column].clone(),
            r.mean.to_string(),
            r.sd.to_string(),
        ])
        .map_err(e)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn cmd_impute(cli: &Cli, args: &ImputeArgs, out: &mut dyn Write) -> Result<MultiplyImputedSet, CliError> {
    let data = IncompleteData::load_csv(&args.input, &cli.na_token)?;
    let (spec, data) = prepare_impute(cli, args, data)?;
    let dir = out_dir(cli, None);
    ensure_dir(&dir)?;
    let set = run_impute_with_hook(&spec, &data, None)?;
    for (k, completion) in set.completions.iter().enumerate() {
        let path = dir.join(format!("{}_{}.csv", args.out_prefix, k + 1));
        let mut w = create(&path)?;
        write_matrix_csv(&mut w, data.column_names(), completion, None, &cli.na_token)?;
        finish(w, &path)?;
    }
    let path = dir.join("trace.csv");
    let mut w = create(&path)?;
    write_trace_csv(&mut w, &set.trace, data.column_names())?;
    finish(w, &path)?;
    writeln!(
        out,
        "wrote {} completions and trace.csv to {}",
        set.m(),
        dir.display()
    )
    .map_err(usage)?;
    Ok(set)
}

/// Loads imputed files, checking that they share a header and shape.
pub fn load_imputed(paths: &[PathBuf], na_token: &str) -> Result<(Vec<String>, Vec<Matrix>), CliError> {
    if paths.len() < 2 {
        return Err(usage("pooling needs at least two imputed files"));
    }
    let mut names: Option<Vec<String>> = None;
    let mut shape = (0, 0);
    let mut completions = Vec::with_capacity(paths.len());
    for path in paths {
        let d = IncompleteData::load_csv(path, na_token)?;
        if !d.is_complete() {
            return Err(CliError::Runtime(Error::invalid(format!(
                "{} has missing cells",
                path.display()
            ))));
        }
        match &names {
            None => {
                names = Some(d.column_names().to_vec());
                shape = (d.nrows(), d.ncols());
            }
            Some(n) => {
                if n.as_slice() != d.column_names() || shape != (d.nrows(), d.ncols()) {
                    return Err(CliError::Runtime(Error::shape(format!(
                        "{} does not match the header or shape of {}",
                        path.display(),
                        paths[0].display()
                    ))));
                }
            }
        }
        completions.push(d.values().clone());
    }
    Ok((names.unwrap_or_default(), completions))
}

pub fn write_pooled_csv<W: Write>(
    writer: W,
    pids: &[ParameterId],
    pooled: &[PooledEstimate],
    names: &[String],
) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    let e = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(POOLED_HEADER).map_err(e)?;
    for (pid, p) in pids.iter().zip(pooled) {
        w.write_record([
            pid.label(names),
            p.estimate.to_string(),
            p.within_var.to_string(),
            p.between_var.to_string(),
            p.total_var.to_string(),
            p.df.to_string(),
            p.ci_lower.to_string(),
            p.ci_upper.to_string(),
            p.m.to_string(),
        ])
        .map_err(e)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn cmd_pool(cli: &Cli, args: &PoolArgs, out: &mut dyn Write) -> Result<Vec<PooledEstimate>, CliError> {
    let (names, completions) = load_imputed(&args.inputs, &cli.na_token)?;
    let pids = args
        .params
        .iter()
        .map(|p| ParameterId::parse(p, &names))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let pooled = analyze_completions(&completions, &pids)?;
    let dir = out_dir(cli, None);
    ensure_dir(&dir)?;
    let path = dir.join("pooled.csv");
    let mut w = create(&path)?;
    write_pooled_csv(&mut w, &pids, &pooled, &names)?;
    finish(w, &path)?;
    write_pooled_csv(&mut *out, &pids, &pooled, &names)?;
    Ok(pooled)
}

/// Retained component count and full scree of `data`.
pub fn enumerate_data(
    data: &IncompleteData,
    rule: EnumerationRule,
    complete_cases: bool,
    seed: u64,
) -> Result<(usize, Vec<f64>), CliError> {
    let matrix = if data.is_complete() {
        data.values().clone()
    } else if complete_cases {
        let rows = data.complete_case_rows();
        if rows.len() < 2 {
            return Err(CliError::Runtime(Error::invalid(format!(
                "only {} complete rows",
                rows.len()
            ))));
        }
        crate::data::select_rows(data.values(), &rows)
    } else {
        return Err(usage(
            "input has missing cells; pass --complete-cases to enumerate on the complete rows",
        ));
    };
    let eigs = scree(&matrix)?;
    let q = retained_from_scree(&eigs, matrix.nrows(), rule, &mut seeded(seed))?;
    Ok((q, eigs))
}

pub fn cmd_enumerate(cli: &Cli, args: &EnumerateArgs, out: &mut dyn Write) -> Result<(usize, Vec<f64>), CliError> {
    let rule = EnumerationRule::parse(&args.rule).map_err(usage)?;
    let data = IncompleteData::load_csv(&args.input, &cli.na_token)?;
    let (q, eigs) = enumerate_data(&data, rule, args.complete_cases, cli.seed.unwrap_or(DEFAULT_SEED))?;
    let io = |e: std::io::Error| usage(e);
    writeln!(out, "retained: {q}").map_err(io)?;
    writeln!(out, "component,eigenvalue").map_err(io)?;
    for (k, l) in eigs.iter().enumerate() {
        writeln!(out, "{},{l}", k + 1).map_err(io)?;
    }
    Ok((q, eigs))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(cli, a, out).map(|_| ()),
        Command::Impute(a) => cmd_impute(cli, a, out).map(|_| ()),
        Command::Pool(a) => cmd_pool(cli, a, out).map(|_| ()),
        Command::Enumerate(a) => cmd_enumerate(cli, a, out).map(|_| ()),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
