//! Right-tail MAR amputation with a calibrated logistic intercept.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data::{default_names, ColumnRole, IncompleteData, Matrix};
use crate::error::{Error, Result};

const CALIBRATION_TOLERANCE: f64 = 1e-9;

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Expected missing proportion for intercept `b0` over linear scores.
pub fn expected_proportion(scores: &[f64], b0: f64) -> f64 {
    scores.iter().map(|&l| logistic(b0 + l)).sum::<f64>() / scores.len() as f64
}

/// Intercept `b0` with `mean(logistic(b0 + l))` equal to `target`, found by bisection.
pub fn calibrate_intercept(scores: &[f64], target: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to calibrate".into()));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target proportion {target} not in (0, 1)")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("amputation scores".into()));
    }
    let (lo_s, hi_s) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let logit = (target / (1.0 - target)).ln();
    let mut lo = logit - hi_s - 1.0;
    let mut hi = logit - lo_s + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_proportion(scores, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < CALIBRATION_TOLERANCE {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Row sums of the given columns, each standardized to mean 0 and unit
/// sample variance, with the sum itself then standardized.
pub fn missingness_scores(matrix: &Matrix, predictors: &[usize]) -> Result<Vec<f64>> {
    if predictors.is_empty() {
        return Err(Error::invalid("no missingness predictors"));
    }
    let n = matrix.nrows();
    if n < 2 {
        return Err(Error::shape("need at least 2 rows to standardize"));
    }
    let mut sum = vec![0.0; n];
    for &j in predictors {
        let col = matrix.column(j);
        let (m, s) = mean_sd(col.as_slice());
        if s == 0.0 {
            return Err(Error::invalid(format!("missingness predictor {j} is constant")));
        }
        for (acc, v) in sum.iter_mut().zip(col.iter()) {
            *acc += (v - m) / s;
        }
    }
    let (m, s) = mean_sd(&sum);
    Ok(sum.into_iter().map(|v| (v - m) / s).collect())
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Imposes missingness on every analysis-target column of `complete`, driven
/// by the mar-predictor columns. Each target gets its own Bernoulli draws.
pub fn ampute<R: Rng + ?Sized>(
    complete: &Matrix,
    roles: &[ColumnRole],
    miss_prop: f64,
    rng: &mut R,
) -> Result<IncompleteData> {
    let p = complete.ncols();
    if roles.len() != p {
        return Err(Error::shape(format!("{} roles for {p} columns", roles.len())));
    }
    let predictors: Vec<usize> = (0..p).filter(|&j| roles[j] == ColumnRole::MarPredictor).collect();
    let targets: Vec<usize> = (0..p).filter(|&j| roles[j] == ColumnRole::AnalysisTarget).collect();
    let scores = missingness_scores(complete, &predictors)?;
    let b0 = calibrate_intercept(&scores, miss_prop)?;
    let probs: Vec<f64> = scores.iter().map(|&l| logistic(b0 + l)).collect();
    let n = complete.nrows();
    let mut mask = DMatrix::from_element(n, p, true);
    for &j in &targets {
        for (i, &pr) in probs.iter().enumerate() {
            if rng.random::<f64>() < pr {
                mask[(i, j)] = false;
            }
        }
    }
    IncompleteData::new(complete.clone(), mask, default_names(p), roles.to_vec())
}

/// Fit of the response indicator of one column on the mar predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct AmputationDiagnostics {
    pub missing_proportion: f64,
    pub pseudo_r2: f64,
    pub auc: f64,
}

/// Logistic regression by iteratively reweighted least squares. `x` should
/// not include an intercept column; one is added.
pub fn logistic_fit(y: &[bool], x: &Matrix) -> Result<Vec<f64>> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::shape(format!("{} responses for {n} rows", y.len())));
    }
    let k = x.ncols() + 1;
    let design = Matrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let mut beta = DVector::zeros(k);
    for _ in 0..100 {
        let eta = &design * &beta;
        let mut xtwx = Matrix::zeros(k, k);
        let mut xtwz = DVector::zeros(k);
        for i in 0..n {
            let mu = logistic(eta[i]);
            let w = (mu * (1.0 - mu)).max(1e-12);
            let z = eta[i] + (f64::from(u8::from(y[i])) - mu) / w;
            let row = design.row(i);
            for a in 0..k {
                xtwz[a] += w * row[a] * z;
                for b in 0..k {
                    xtwx[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        let next = xtwx
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("logistic information matrix".into()))?
            .solve(&xtwz);
        let step = (&next - &beta).amax();
        beta = next;
        if step < 1e-10 {
            break;
        }
    }
    Ok(beta.iter().copied().collect())
}

/// Area under the ROC curve of `scores` for classifying `y`, counting ties as one half.
pub fn auc(y: &[bool], scores: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    let n1 = y.iter().filter(|&&v| v).count() as f64;
    let n0 = y.len() as f64 - n1;
    let rank_sum: f64 = y.iter().zip(&ranks).filter(|(v, _)| **v).map(|(_, r)| r).sum();
    (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0)
}

/// Refits the missingness of `target` on the continuous mar predictors and
/// reports McFadden's pseudo R-squared and the AUC of the fitted scores.
pub fn amputation_diagnostics(
    data: &IncompleteData,
    continuous: &Matrix,
    target: usize,
) -> Result<AmputationDiagnostics> {
    let predictors = data.columns_with_role(ColumnRole::MarPredictor);
    let x = crate::data::select_columns(continuous, &predictors);
    let n = data.nrows();
    let y: Vec<bool> = (0..n).map(|i| !data.is_observed(i, target)).collect();
    let beta = logistic_fit(&y, &x)?;
    let eta: Vec<f64> = (0..n)
        .map(|i| beta[0] + (0..x.ncols()).map(|j| beta[j + 1] * x[(i, j)]).sum::<f64>())
        .collect();
    let loglik = |p: &dyn Fn(usize) -> f64| -> f64 {
        (0..n)
            .map(|i| {
                let pi = p(i).clamp(1e-300, 1.0 - 1e-16);
                if y[i] {
                    pi.ln()
                } else {
                    (1.0 - pi).ln()
                }
            })
            .sum()
    };
    let prop = y.iter().filter(|&&v| v).count() as f64 / n as f64;
    let ll_full = loglik(&|i| logistic(eta[i]));
    let ll_null = loglik(&|_| prop);
    Ok(AmputationDiagnostics {
        missing_proportion: prop,
        pseudo_r2: 1.0 - ll_full / ll_null,
        auc: auc(&y, &eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::sim::generate::{generate_complete, SimulationCondition};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn zero_scores_closed_form() {
        let z = vec![0.0; 50];
        assert!(calibrate_intercept(&z, 0.5).unwrap().abs() < 1e-8);
        let b = calibrate_intercept(&z, 0.3).unwrap();
        assert!((b - (0.3f64 / 0.7).ln()).abs() < 1e-8);
    }

    #[test]
    fn calibration_hits_target() {
        let mut rng = seeded(3);
        let s: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b = calibrate_intercept(&s, 0.3).unwrap();
        assert!((expected_proportion(&s, b) - 0.3).abs() < 1e-6);
    }

    #[test]
    fn calibration_rejects_bad_target() {
        assert!(calibrate_intercept(&[0.0], 1.0).is_err());
        assert!(calibrate_intercept(&[], 0.3).is_err());
    }

    #[test]
    fn auc_extremes() {
        let y = [false, false, true, true];
        assert_eq!(auc(&y, &[1.0, 2.0, 3.0, 4.0]), 1.0);
        assert_eq!(auc(&y, &[4.0, 3.0, 2.0, 1.0]), 0.0);
        assert_eq!(auc(&y, &[1.0, 1.0, 1.0, 1.0]), 0.5);
    }

    #[test]
    fn only_targets_amputed_in_the_right_tail() {
        let cond = SimulationCondition::default();
        let (x, roles) = generate_complete(&cond, &mut seeded(4)).unwrap();
        let data = ampute(&x, &roles, 0.3, &mut seeded(5)).unwrap();
        let scores = missingness_scores(&x, &[4, 5, 6, 7]).unwrap();
        for j in 0..x.ncols() {
            let miss = data.missing_rows(j);
            if j >= 4 {
                assert!(miss.is_empty());
                continue;
            }
            let prop = miss.len() as f64 / x.nrows() as f64;
            assert!((prop - 0.3).abs() < 0.06, "{prop}");
            let obs = data.observed_rows(j);
            let mean = |r: &[usize]| r.iter().map(|&i| scores[i]).sum::<f64>() / r.len() as f64;
            assert!(mean(&miss) > mean(&obs));
        }
    }
}
