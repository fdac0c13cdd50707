//! Standardization, principal components of the Pearson correlation matrix,
//! and component-count rules.

use std::cmp::Ordering;

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Relative tolerance below which a column's standard deviation is treated as zero.
const CONSTANT_TOL: f64 = 1e-12;

/// Default replicate count for parallel analysis.
pub const PA_REPLICATES: usize = 100;
/// Default eigenvalue quantile for parallel analysis.
pub const PA_QUANTILE: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: Matrix,
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    /// True for columns whose sample variance is (numerically) zero.
    pub constant: Vec<bool>,
}

/// Centers each column and divides by its sample standard deviation (n - 1
/// denominator). Constant columns keep scale 1 and become exact zeros.
pub fn standardize(m: &Matrix) -> Result<Standardized> {
    let (n, p) = m.shape();
    if n < 2 {
        return Err(Error::invalid(format!("standardize needs n >= 2, got {n}")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("standardize input".into()));
    }
    let mut data = m.clone();
    let mut centers = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    let mut constant = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = data.column_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        let is_const = sd <= CONSTANT_TOL * mean.abs().max(1.0);
        if is_const {
            col.fill(0.0);
            scales.push(1.0);
        } else {
            col.iter_mut().for_each(|v| *v /= sd);
            scales.push(sd);
        }
        centers.push(mean);
        constant.push(is_const);
    }
    Ok(Standardized {
        data,
        centers,
        scales,
        constant,
    })
}

/// Pearson correlation matrix of already standardized columns. Constant
/// columns get zero rows and columns (including the diagonal).
pub fn correlation_of_standardized(std: &Standardized) -> Matrix {
    let n = std.data.nrows();
    let p = std.data.ncols();
    let mut c = std.data.tr_mul(&std.data) / (n - 1) as f64;
    for j in 0..p {
        if !std.constant[j] {
            c[(j, j)] = 1.0;
        }
        for k in 0..j {
            let v = 0.5 * (c[(j, k)] + c[(k, j)]);
            c[(j, k)] = v;
            c[(k, j)] = v;
        }
    }
    c
}

pub fn correlation_matrix(m: &Matrix) -> Result<Matrix> {
    Ok(correlation_of_standardized(&standardize(m)?))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// decreasing order and each eigenvector oriented so that its largest
/// magnitude entry is positive (lowest index wins ties).
pub fn sorted_eigen(sym: Matrix) -> (Vec<f64>, Matrix) {
    let p = sym.nrows();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order
        .iter()
        .map(|&k| eig.eigenvalues[k].max(0.0))
        .collect();
    let mut vectors = Matrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..p {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            vectors[(i, dst)] = sign * col[i];
        }
    }
    (values, vectors)
}

/// Retained principal components of a complete data matrix.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// n x q component scores.
    pub scores: Matrix,
    /// p x q orthonormal weight vectors.
    pub weights: Matrix,
    /// Variances of the retained score columns, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// All p eigenvalues of the correlation matrix.
    pub spectrum: Vec<f64>,
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
}

impl PcaResult {
    pub fn q(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Largest usable component count for an `n_rows` x `n_cols` matrix.
pub fn max_components(n_rows: usize, n_cols: usize) -> usize {
    n_rows.min(n_cols)
}

pub fn pca(m: &Matrix, q: usize) -> Result<PcaResult> {
    let (n, p) = m.shape();
    if q == 0 || q > max_components(n, p) {
        return Err(Error::invalid(format!(
            "q = {q} out of range 1..={} for a {n}x{p} matrix",
            max_components(n, p)
        )));
    }
    let std = standardize(m)?;
    let corr = correlation_of_standardized(&std);
    Ok(pca_from_parts(std, corr, q))
}

pub(crate) fn pca_from_parts(std: Standardized, corr: Matrix, q: usize) -> PcaResult {
    let (spectrum, vectors) = sorted_eigen(corr);
    let weights = vectors.columns(0, q).into_owned();
    let scores = &std.data * &weights;
    PcaResult {
        scores,
        weights,
        eigenvalues: spectrum[..q].to_vec(),
        spectrum,
        centers: std.centers,
        scales: std.scales,
    }
}

/// Correlation eigenvalues of a complete matrix, decreasing.
pub fn scree(m: &Matrix) -> Result<Vec<f64>> {
    Ok(sorted_eigen(correlation_matrix(m)?).0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnumerationRule {
    Kaiser,
    ParallelAnalysis { replicates: usize, quantile: f64 },
    OptimalCoordinates,
    AccelerationFactor,
}

impl EnumerationRule {
    pub fn parallel_analysis() -> Self {
        EnumerationRule::ParallelAnalysis {
            replicates: PA_REPLICATES,
            quantile: PA_QUANTILE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EnumerationRule::ParallelAnalysis {
            replicates,
            quantile,
        } = *self
        {
            if replicates < 1 {
                return Err(Error::invalid("parallel analysis needs >= 1 replicate"));
            }
            if !(quantile > 0.0 && quantile < 1.0) {
                return Err(Error::invalid(format!(
                    "parallel analysis quantile {quantile} not in (0, 1)"
                )));
            }
        }
        Ok(())
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "kaiser" | "kc" => Ok(EnumerationRule::Kaiser),
            "parallel-analysis" | "pa" => Ok(EnumerationRule::parallel_analysis()),
            "optimal-coordinates" | "oc" => Ok(EnumerationRule::OptimalCoordinates),
            "acceleration-factor" | "af" => Ok(EnumerationRule::AccelerationFactor),
            other => Err(Error::invalid(format!("unknown enumeration rule {other:?}"))),
        }
    }
}

/// Number of eigenvalues strictly greater than 1.
pub fn kaiser_count(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().filter(|&&l| l > 1.0).count()
}

fn mean_eigenvalue(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().sum::<f64>() / eigenvalues.len() as f64
}

/// Optimal coordinates: component i (1-based) is retained while its
/// eigenvalue is at least the value predicted at i by the line through
/// (i + 1, l[i+1]) and (p, l[p]), and at least the mean eigenvalue.
pub fn optimal_coordinates_count(eigenvalues: &[f64]) -> Result<usize> {
    let p = eigenvalues.len();
    if p < 3 {
        return Err(Error::invalid(
            "optimal coordinates needs at least 3 eigenvalues",
        ));
    }
    let gate = mean_eigenvalue(eigenvalues);
    let last = eigenvalues[p - 1];
    let mut count = 0;
    // zero-based i, predicting from i + 1 and p - 1
    for i in 0..p - 2 {
        let next = eigenvalues[i + 1];
        let slope = (last - next) / (p - 1 - (i + 1)) as f64;
        let predicted = next - slope;
        if eigenvalues[i] >= predicted && eigenvalues[i] >= gate {
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// Acceleration factor: the component preceding the largest second
/// difference of the scree, considering only points whose predecessor is at
/// least the mean eigenvalue.
pub fn acceleration_factor_count(eigenvalues: &[f64]) -> Result<usize> {
    let p = eigenvalues.len();
    if p < 3 {
        return Err(Error::invalid(
            "acceleration factor needs at least 3 eigenvalues",
        ));
    }
    let gate = mean_eigenvalue(eigenvalues);
    let mut best: Option<(usize, f64)> = None;
    for i in 1..p - 1 {
        if eigenvalues[i - 1] < gate {
            continue;
        }
        let af = eigenvalues[i + 1] - 2.0 * eigenvalues[i] + eigenvalues[i - 1];
        if best.map_or(true, |(_, b)| af > b) {
            best = Some((i, af));
        }
    }
    // zero-based i is the 1-based elbow i + 1; retain the components before it
    Ok(best.map_or(0, |(i, _)| i))
}

/// Per-position quantiles of correlation eigenvalues of `replicates`
/// standard-normal n x p datasets.
pub fn parallel_analysis_thresholds<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    replicates: usize,
    quantile: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut per_position: Vec<Vec<f64>> = vec![Vec::with_capacity(replicates); p];
    for _ in 0..replicates {
        let sim = Matrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let eigs = scree(&sim)?;
        for (slot, l) in per_position.iter_mut().zip(eigs) {
            slot.push(l);
        }
    }
    Ok(per_position
        .into_iter()
        .map(|mut v| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            quantile_sorted(&v, quantile)
        })
        .collect())
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Leading eigenvalues strictly above their parallel-analysis thresholds.
pub fn parallel_analysis_count(eigenvalues: &[f64], thresholds: &[f64]) -> usize {
    eigenvalues
        .iter()
        .zip(thresholds)
        .take_while(|(l, t)| l > t)
        .count()
}

/// Applies a retention rule to an observed scree.
pub fn retained_from_scree<R: Rng + ?Sized>(
    eigenvalues: &[f64],
    n_rows: usize,
    rule: EnumerationRule,
    rng: &mut R,
) -> Result<usize> {
    rule.validate()?;
    match rule {
        EnumerationRule::Kaiser => Ok(kaiser_count(eigenvalues)),
        EnumerationRule::OptimalCoordinates => optimal_coordinates_count(eigenvalues),
        EnumerationRule::AccelerationFactor => acceleration_factor_count(eigenvalues),
        EnumerationRule::ParallelAnalysis {
            replicates,
            quantile,
        } => {
            let t = parallel_analysis_thresholds(
                n_rows,
                eigenvalues.len(),
                replicates,
                quantile,
                rng,
            )?;
            Ok(parallel_analysis_count(eigenvalues, &t))
        }
    }
}

pub fn enumerate_components<R: Rng + ?Sized>(
    m: &Matrix,
    rule: EnumerationRule,
    rng: &mut R,
) -> Result<usize> {
    if m.nrows() < 2 {
        return Err(Error::invalid("component enumeration needs n >= 2"));
    }
    let eigs = scree(m)?;
    retained_from_scree(&eigs, m.nrows(), rule, rng)
}
