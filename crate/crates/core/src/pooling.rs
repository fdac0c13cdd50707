//! Per-completion moment estimates and Rubin's rules pooling.
//!
//! Correlations are pooled on the Fisher z scale and back-transformed; the
//! variance components of a pooled correlation therefore live on the z scale.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::Matrix;
use crate::engine::MultiplyImputedSet;
use crate::error::{Error, Result};

pub const CONFIDENCE_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParameterKind {
    Mean,
    Variance,
    Covariance,
    Correlation,
}

impl ParameterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParameterKind::Mean => "mean",
            ParameterKind::Variance => "var",
            ParameterKind::Covariance => "cov",
            ParameterKind::Correlation => "cor",
        }
    }

    /// Estimand inputs used for the complete-data degrees of freedom.
    pub fn arity(&self) -> usize {
        match self {
            ParameterKind::Mean | ParameterKind::Variance => 1,
            ParameterKind::Covariance | ParameterKind::Correlation => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParameterId {
    kind: ParameterKind,
    first: usize,
    second: Option<usize>,
}

impl ParameterId {
    pub fn mean(col: usize) -> Self {
        ParameterId {
            kind: ParameterKind::Mean,
            first: col,
            second: None,
        }
    }

    pub fn variance(col: usize) -> Self {
        ParameterId {
            kind: ParameterKind::Variance,
            first: col,
            second: None,
        }
    }

    pub fn covariance(a: usize, b: usize) -> Result<Self> {
        Self::pair(ParameterKind::Covariance, a, b)
    }

    pub fn correlation(a: usize, b: usize) -> Result<Self> {
        Self::pair(ParameterKind::Correlation, a, b)
    }

    fn pair(kind: ParameterKind, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::invalid(format!(
                "{} needs two distinct columns, got {a} twice",
                kind.as_str()
            )));
        }
        Ok(ParameterId {
            kind,
            first: a,
            second: Some(b),
        })
    }

    pub fn kind(&self) -> ParameterKind {
        self.kind
    }

    pub fn columns(&self) -> (usize, Option<usize>) {
        (self.first, self.second)
    }

    /// Means, variances, covariances and correlations of `cols`.
    pub fn moment_set(cols: &[usize]) -> Vec<ParameterId> {
        let mut out: Vec<ParameterId> = cols.iter().map(|&c| Self::mean(c)).collect();
        out.extend(cols.iter().map(|&c| Self::variance(c)));
        for kind in [ParameterKind::Covariance, ParameterKind::Correlation] {
            for (i, &a) in cols.iter().enumerate() {
                for &b in &cols[i + 1..] {
                    out.push(ParameterId {
                        kind,
                        first: a,
                        second: Some(b),
                    });
                }
            }
        }
        out
    }

    /// Label such as `cor(x1,x2)` using column names.
    pub fn label(&self, names: &[String]) -> String {
        let name = |c: usize| names.get(c).cloned().unwrap_or_else(|| format!("#{c}"));
        match self.second {
            Some(b) => format!("{}({},{})", self.kind.as_str(), name(self.first), name(b)),
            None => format!("{}({})", self.kind.as_str(), name(self.first)),
        }
    }

    /// Parses `mean:x1`, `var:x1`, `cov:x1:x2` or `cor:x1:x2` against column names.
    pub fn parse(token: &str, names: &[String]) -> Result<Self> {
        let parts: Vec<&str> = token.trim().split(':').collect();
        let col = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::invalid(format!("unknown column {s:?} in {token:?}")))
        };
        match parts.as_slice() {
            ["mean", a] => Ok(Self::mean(col(a)?)),
            ["var", a] => Ok(Self::variance(col(a)?)),
            ["cov", a, b] => Self::covariance(col(a)?, col(b)?),
            ["cor", a, b] => Self::correlation(col(a)?, col(b)?),
            _ => Err(Error::invalid(format!(
                "cannot parse parameter {token:?}; expected mean:A, var:A, cov:A:B or cor:A:B"
            ))),
        }
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.second {
            Some(b) => write!(f, "{}({},{})", self.kind.as_str(), self.first, b),
            None => write!(f, "{}({})", self.kind.as_str(), self.first),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledEstimate {
    pub estimate: f64,
    pub within_var: f64,
    pub between_var: f64,
    pub total_var: f64,
    pub df: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub m: usize,
}

fn sample_moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    (sxx / (n - 1.0), syy / (n - 1.0), sxy / (n - 1.0))
}

fn column(m: &Matrix, c: usize) -> Result<Vec<f64>> {
    if c >= m.ncols() {
        return Err(Error::shape(format!(
            "column {c} out of range for {} columns",
            m.ncols()
        )));
    }
    Ok(m.column(c).iter().copied().collect())
}

/// Estimate and its sampling variance on the pooling scale (Fisher z for
/// correlations).
pub fn estimate_parameter(completion: &Matrix, pid: ParameterId) -> Result<(f64, f64)> {
    let n = completion.nrows();
    if n < 4 {
        return Err(Error::invalid(format!("need n >= 4 rows, got {n}")));
    }
    let nf = n as f64;
    let x = column(completion, pid.first)?;
    match pid.kind {
        ParameterKind::Mean => {
            let (s2, _, _) = sample_moments(&x, &x);
            Ok((x.iter().sum::<f64>() / nf, s2 / nf))
        }
        ParameterKind::Variance => {
            let (s2, _, _) = sample_moments(&x, &x);
            Ok((s2, 2.0 * s2 * s2 / (nf - 1.0)))
        }
        ParameterKind::Covariance | ParameterKind::Correlation => {
            let y = column(completion, pid.second.expect("pair parameter"))?;
            let (sxx, syy, sxy) = sample_moments(&x, &y);
            if pid.kind == ParameterKind::Covariance {
                return Ok((sxy, (sxy * sxy + sxx * syy) / (nf - 1.0)));
            }
            if sxx <= 0.0 || syy <= 0.0 {
                return Err(Error::invalid(format!(
                    "correlation {pid} undefined for a zero-variance column"
                )));
            }
            let r = sxy / (sxx * syy).sqrt();
            let z = r.atanh();
            if !z.is_finite() {
                return Err(Error::NonFinite(format!("Fisher z of {pid} (r = {r})")));
            }
            Ok((z, 1.0 / (nf - 3.0)))
        }
    }
}

/// Estimate on the natural scale (the correlation itself, not its z).
pub fn point_estimate(completion: &Matrix, pid: ParameterId) -> Result<f64> {
    let (est, _) = estimate_parameter(completion, pid)?;
    Ok(if pid.kind == ParameterKind::Correlation {
        est.tanh()
    } else {
        est
    })
}

/// Barnard-Rubin small-sample degrees of freedom.
pub fn barnard_rubin_df(m: usize, within: f64, between: f64, complete_df: f64) -> f64 {
    if between == 0.0 {
        return complete_df;
    }
    let mf = m as f64;
    let total = within + (1.0 + 1.0 / mf) * between;
    let lambda = (1.0 + 1.0 / mf) * between / total;
    let df_old = (mf - 1.0) / (lambda * lambda);
    let df_obs = (complete_df + 1.0) / (complete_df + 3.0) * complete_df * (1.0 - lambda);
    df_old * df_obs / (df_old + df_obs)
}

/// Pools per-imputation `(estimate, variance)` pairs from data with `n_rows`
/// rows. Correlation inputs must be on the Fisher z scale; the returned
/// estimate and interval are back-transformed.
pub fn rubin_pool(pairs: &[(f64, f64)], kind: ParameterKind, n_rows: usize) -> Result<PooledEstimate> {
    let m = pairs.len();
    if m < 2 {
        return Err(Error::invalid(format!(
            "pooling needs at least 2 imputations, got {m}"
        )));
    }
    let complete_df = n_rows as f64 - kind.arity() as f64;
    if complete_df <= 0.0 {
        return Err(Error::invalid(format!(
            "complete-data degrees of freedom {complete_df} <= 0"
        )));
    }
    if pairs.iter().any(|(e, v)| !e.is_finite() || !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite("pooling inputs".into()));
    }
    let mf = m as f64;
    // deviations from the first estimate, so identical inputs give B = 0 exactly
    let origin = pairs[0].0;
    let dbar = pairs.iter().map(|p| p.0 - origin).sum::<f64>() / mf;
    let qbar = origin + dbar;
    let within = pairs.iter().map(|p| p.1).sum::<f64>() / mf;
    let between = pairs
        .iter()
        .map(|p| (p.0 - origin - dbar).powi(2))
        .sum::<f64>()
        / (mf - 1.0);
    let total = within + (1.0 + 1.0 / mf) * between;
    let df = barnard_rubin_df(m, within, between, complete_df);
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.5 + CONFIDENCE_LEVEL / 2.0);
    let half = t * total.sqrt();
    let (mut estimate, mut lo, mut hi) = (qbar, qbar - half, qbar + half);
    if kind == ParameterKind::Correlation {
        estimate = estimate.tanh();
        lo = lo.tanh();
        hi = hi.tanh();
    }
    Ok(PooledEstimate {
        estimate,
        within_var: within,
        between_var: between,
        total_var: total,
        df,
        ci_lower: lo,
        ci_upper: hi,
        m,
    })
}

/// Estimates `pids` on every completion and pools them.
pub fn analyze_completions(completions: &[Matrix], pids: &[ParameterId]) -> Result<Vec<PooledEstimate>> {
    let n = completions.first().map_or(0, |c| c.nrows());
    pids.iter()
        .map(|&pid| {
            let pairs = completions
                .iter()
                .map(|c| estimate_parameter(c, pid))
                .collect::<Result<Vec<_>>>()?;
            rubin_pool(&pairs, pid.kind, n)
        })
        .collect()
}

pub fn analyze_set(set: &MultiplyImputedSet, pids: &[ParameterId]) -> Result<Vec<PooledEstimate>> {
    analyze_completions(&set.completions, pids)
}
