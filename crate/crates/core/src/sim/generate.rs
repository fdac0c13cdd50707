//! Factor-model data generation and coarsening.

use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{ColumnRole, Matrix};
use crate::error::{Error, Result};
use crate::pca::quantile_sorted;

/// Number of categories auxiliary and missingness-predictor items are cut into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Categories {
    Continuous,
    Levels(usize),
}

impl fmt::Display for Categories {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Categories::Continuous => f.write_str("inf"),
            Categories::Levels(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Categories {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "continuous") {
            return Ok(Categories::Continuous);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 2 => Ok(Categories::Levels(k)),
            _ => Err(Error::invalid(format!(
                "category count must be \"inf\" or an integer >= 2, got {s:?}"
            ))),
        }
    }
}

/// One cell of the simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationCondition {
    pub n: usize,
    pub factors: usize,
    pub items_first_factor: usize,
    pub items_per_other_factor: usize,
    /// Leading items of the first factor that receive missing values.
    pub targets: usize,
    pub loading: f64,
    pub high_corr: f64,
    pub low_corr: f64,
    /// Fraction of auxiliary factors weakly correlated with everything else.
    pub noise_proportion: f64,
    pub categories: Categories,
    pub target_mean: f64,
    pub target_var: f64,
    pub miss_prop: f64,
}

impl Default for SimulationCondition {
    fn default() -> Self {
        SimulationCondition {
            n: 500,
            factors: 7,
            items_first_factor: 8,
            items_per_other_factor: 8,
            targets: 4,
            loading: 0.85,
            high_corr: 0.7,
            low_corr: 0.1,
            noise_proportion: 0.0,
            categories: Categories::Continuous,
            target_mean: 5.0,
            target_var: 6.5,
            miss_prop: 0.3,
        }
    }
}

impl SimulationCondition {
    /// 56-column design of the first study.
    pub fn study1(noise_proportion: f64, categories: Categories) -> Self {
        SimulationCondition {
            noise_proportion,
            categories,
            ..Default::default()
        }
    }

    /// 242-column design: 39 items per auxiliary factor.
    pub fn study2(noise_proportion: f64, categories: Categories) -> Self {
        SimulationCondition {
            items_per_other_factor: 39,
            ..Self::study1(noise_proportion, categories)
        }
    }

    pub fn n_columns(&self) -> usize {
        self.items_first_factor + (self.factors - 1) * self.items_per_other_factor
    }

    pub fn auxiliary_factors(&self) -> usize {
        self.factors - 1
    }

    /// Number of auxiliary factors set to the low correlation.
    pub fn low_factor_count(&self) -> usize {
        (self.noise_proportion * self.auxiliary_factors() as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.factors < 2 {
            return bad(format!("need at least 2 factors, got {}", self.factors));
        }
        if self.targets == 0 || self.targets >= self.items_first_factor {
            return bad(format!(
                "targets ({}) must leave at least one missingness predictor among {} first-factor items",
                self.targets, self.items_first_factor
            ));
        }
        if self.items_per_other_factor == 0 {
            return bad("auxiliary factors need at least one item".into());
        }
        if !(self.loading > 0.0 && self.loading < 1.0) {
            return bad(format!("loading {} not in (0, 1)", self.loading));
        }
        for c in [self.high_corr, self.low_corr] {
            if !(c > -1.0 && c < 1.0) {
                return bad(format!("factor correlation {c} not in (-1, 1)"));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_proportion) {
            return bad(format!("noise proportion {} not in [0, 1]", self.noise_proportion));
        }
        let scaled = self.noise_proportion * self.auxiliary_factors() as f64;
        if (scaled - scaled.round()).abs() > 0.05 {
            return bad(format!(
                "noise proportion {} does not give a whole number of the {} auxiliary factors",
                self.noise_proportion,
                self.auxiliary_factors()
            ));
        }
        if !(self.miss_prop > 0.0 && self.miss_prop < 1.0) {
            return bad(format!("missing proportion {} not in (0, 1)", self.miss_prop));
        }
        if self.target_var <= 0.0 {
            return bad(format!("target variance {} must be positive", self.target_var));
        }
        if self.n < 10 {
            return bad(format!("n = {} too small", self.n));
        }
        if let Categories::Levels(k) = self.categories {
            if k < 2 {
                return bad(format!("need at least 2 categories, got {k}"));
            }
        }
        Ok(())
    }

    /// Latent correlation matrix. The last `low_factor_count` auxiliary
    /// factors correlate at `low_corr` with every other factor; all remaining
    /// pairs correlate at `high_corr`.
    pub fn factor_correlation(&self) -> Matrix {
        let k = self.factors;
        let first_low = k - self.low_factor_count();
        Matrix::from_fn(k, k, |a, b| {
            if a == b {
                1.0
            } else if a >= first_low || b >= first_low {
                self.low_corr
            } else {
                self.high_corr
            }
        })
    }

    /// Factor index of each column.
    pub fn item_factors(&self) -> Vec<usize> {
        let mut out = vec![0; self.items_first_factor];
        for f in 1..self.factors {
            out.extend(std::iter::repeat(f).take(self.items_per_other_factor));
        }
        out
    }

    pub fn roles(&self) -> Vec<ColumnRole> {
        let mut roles = vec![ColumnRole::Auxiliary; self.n_columns()];
        for (j, r) in roles.iter_mut().enumerate().take(self.items_first_factor) {
            *r = if j < self.targets {
                ColumnRole::AnalysisTarget
            } else {
                ColumnRole::MarPredictor
            };
        }
        roles
    }
}

/// Rescales `col` in place to exact sample mean `mean` and variance `var`.
fn rescale(col: &mut [f64], mean: f64, var: f64) {
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let factor = var.sqrt() / s;
    for v in col.iter_mut() {
        *v = mean + (*v - m) * factor;
    }
}

/// Draws one complete dataset X = F L' + E with F ~ N(0, Psi) and
/// E ~ N(0, 1 - loading^2), then rescales every column.
pub fn generate_complete<R: Rng + ?Sized>(
    cond: &SimulationCondition,
    rng: &mut R,
) -> Result<(Matrix, Vec<ColumnRole>)> {
    cond.validate()?;
    let psi = cond.factor_correlation();
    let chol = Cholesky::new(psi)
        .ok_or_else(|| Error::NotPositiveDefinite("factor correlation matrix".into()))?;
    let l = chol.l();
    let k = cond.factors;
    let z = Matrix::from_fn(cond.n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let scores = z * l.transpose();
    let factors = cond.item_factors();
    let noise_sd = (1.0 - cond.loading * cond.loading).sqrt();
    let p = cond.n_columns();
    let mut x = Matrix::zeros(cond.n, p);
    for j in 0..p {
        let f = factors[j];
        for i in 0..cond.n {
            x[(i, j)] =
                cond.loading * scores[(i, f)] + noise_sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    for j in 0..p {
        rescale(x.column_mut(j).as_mut_slice(), cond.target_mean, cond.target_var);
    }
    Ok((x, cond.roles()))
}

/// Cuts a column at its empirical k/levels quantiles into equal-probability
/// bins coded 1..=levels.
pub fn coarsen_column(col: &[f64], levels: usize) -> Vec<f64> {
    let mut sorted = col.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let cuts: Vec<f64> = (1..levels)
        .map(|k| quantile_sorted(&sorted, k as f64 / levels as f64))
        .collect();
    col.iter()
        .map(|&v| 1.0 + cuts.iter().filter(|&&c| v > c).count() as f64)
        .collect()
}

/// Coarsens every non-target column; analysis targets are left untouched.
pub fn coarsen(matrix: &Matrix, roles: &[ColumnRole], categories: Categories) -> Matrix {
    let Categories::Levels(levels) = categories else {
        return matrix.clone();
    };
    let mut out = matrix.clone();
    for (j, role) in roles.iter().enumerate() {
        if *role == ColumnRole::AnalysisTarget {
            continue;
        }
        let col: Vec<f64> = matrix.column(j).iter().copied().collect();
        let coded = coarsen_column(&col, levels);
        out.column_mut(j).copy_from_slice(&coded);
    }
    out
}
