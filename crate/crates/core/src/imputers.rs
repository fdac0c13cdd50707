//! Univariate imputation draws: Bayesian normal linear model and predictive
//! mean matching. Predictors may be raw columns or component scores; an
//! intercept is always added internally.

use std::cmp::Ordering;

use nalgebra::{Cholesky, DVector, Dyn};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Ridge added to the diagonal of the normal equations.
pub const DEFAULT_RIDGE: f64 = 1e-5;
pub const DEFAULT_PMM_DONORS: usize = 5;

/// One draw of the imputation model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModelDraw {
    /// Intercept followed by one slope per predictor.
    pub coefficients: Vec<f64>,
    pub residual_sd: f64,
    pub ridge: f64,
}

impl LinearModelDraw {
    pub fn n_predictors(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Linear predictor for each row of `x`.
    pub fn predict_mean(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.ncols() != self.n_predictors() {
            return Err(Error::shape(format!(
                "{} predictor columns for a model with {}",
                x.ncols(),
                self.n_predictors()
            )));
        }
        let slopes = DVector::from_column_slice(&self.coefficients[1..]);
        let eta = x * slopes;
        Ok(eta.iter().map(|v| v + self.coefficients[0]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputerKind {
    BayesianNormal,
    Pmm { donors: usize },
}

impl Default for ImputerKind {
    fn default() -> Self {
        ImputerKind::BayesianNormal
    }
}

impl ImputerKind {
    pub fn pmm() -> Self {
        ImputerKind::Pmm {
            donors: DEFAULT_PMM_DONORS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ImputerKind::Pmm { donors: 0 } => Err(Error::invalid("pmm needs at least one donor")),
            _ => Ok(()),
        }
    }

    /// Imputations for the rows of `x_mis` given observed `y_obs` on `x_obs`.
    pub fn impute<R: Rng + ?Sized>(
        &self,
        y_obs: &[f64],
        x_obs: &Matrix,
        x_mis: &Matrix,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        match *self {
            ImputerKind::BayesianNormal => {
                let params = draw_linear_params(y_obs, x_obs, rng)?;
                draw_predictive(&params, x_mis, rng)
            }
            ImputerKind::Pmm { donors } => {
                pmm_impute(y_obs, x_obs, x_mis, donors.min(y_obs.len()), rng)
            }
        }
    }
}

struct NormalEquations {
    chol: Cholesky<f64, Dyn>,
    center: DVector<f64>,
}

fn check_design(y: &[f64], x: &Matrix) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::shape(format!(
            "{} response values for {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("imputation model design".into()));
    }
    Ok(())
}

fn solve_normal_equations(y: &[f64], x: &Matrix, ridge: f64) -> Result<NormalEquations> {
    let n = y.len();
    let r = x.ncols();
    let mut gram = Matrix::zeros(r + 1, r + 1);
    let mut xty = DVector::zeros(r + 1);
    gram[(0, 0)] = n as f64;
    xty[0] = y.iter().sum();
    if r > 0 {
        let xtx = x.tr_mul(x);
        let yv = DVector::from_column_slice(y);
        let xy = x.tr_mul(&yv);
        for k in 0..r {
            let s: f64 = x.column(k).sum();
            gram[(0, k + 1)] = s;
            gram[(k + 1, 0)] = s;
            xty[k + 1] = xy[k];
            for l in 0..r {
                gram[(k + 1, l + 1)] = xtx[(k, l)];
            }
        }
    }
    for d in 0..=r {
        gram[(d, d)] += ridge;
    }
    let chol = Cholesky::new(gram)
        .ok_or_else(|| Error::NotPositiveDefinite("imputation model normal equations".into()))?;
    let center = chol.solve(&xty);
    if center.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares solution".into()));
    }
    Ok(NormalEquations { chol, center })
}

/// Ridge-stabilized least-squares coefficients (intercept first): the center
/// of the coefficient posterior.
pub fn ridge_least_squares(y: &[f64], x: &Matrix, ridge: f64) -> Result<Vec<f64>> {
    check_design(y, x)?;
    Ok(solve_normal_equations(y, x, ridge)?.center.as_slice().to_vec())
}

pub fn draw_linear_params<R: Rng + ?Sized>(
    y_obs: &[f64],
    x_obs: &Matrix,
    rng: &mut R,
) -> Result<LinearModelDraw> {
    draw_linear_params_with_ridge(y_obs, x_obs, DEFAULT_RIDGE, rng)
}

/// Draws (beta, sigma) from the normal linear model posterior under the
/// noninformative prior: sigma^2 = RSS / chi^2(df), then
/// beta ~ N(beta_hat, sigma^2 (X'X + ridge I)^-1).
pub fn draw_linear_params_with_ridge<R: Rng + ?Sized>(
    y_obs: &[f64],
    x_obs: &Matrix,
    ridge: f64,
    rng: &mut R,
) -> Result<LinearModelDraw> {
    check_design(y_obs, x_obs)?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::invalid(format!("ridge must be >= 0, got {ridge}")));
    }
    let n = y_obs.len();
    let k = x_obs.ncols() + 1;
    if n <= k {
        return Err(Error::Overparameterized {
            observed: n,
            parameters: k,
        });
    }
    let df = (n - k) as f64;
    let ne = solve_normal_equations(y_obs, x_obs, ridge)?;
    let b = ne.center.as_slice();
    let rss: f64 = (0..n)
        .map(|i| {
            let fit = b[0]
                + (0..k - 1)
                    .map(|c| x_obs[(i, c)] * b[c + 1])
                    .sum::<f64>();
            let e = y_obs[i] - fit;
            e * e
        })
        .sum();
    let chi: f64 = ChiSquared::new(df)
        .map_err(|e| Error::invalid(e.to_string()))?
        .sample(rng);
    let mut sigma = (rss / chi).sqrt();
    if !(sigma > 0.0) {
        sigma = f64::MIN_POSITIVE;
    }
    let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let l = ne.chol.l();
    let u = l
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::NotPositiveDefinite("cholesky factor".into()))?;
    let coefficients: Vec<f64> = (0..k).map(|c| b[c] + sigma * u[c]).collect();
    if coefficients.iter().any(|v| !v.is_finite()) || !sigma.is_finite() {
        return Err(Error::NonFinite("parameter draw".into()));
    }
    Ok(LinearModelDraw {
        coefficients,
        residual_sd: sigma,
        ridge,
    })
}

/// Posterior predictive draws: linear predictor plus residual noise.
pub fn draw_predictive<R: Rng + ?Sized>(
    params: &LinearModelDraw,
    x_mis: &Matrix,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = params.predict_mean(x_mis)?;
    for v in &mut out {
        *v += params.residual_sd * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(out)
}

/// Predictive mean matching with a single parameter draw used for both the
/// observed and missing predicted means. Each imputation is the observed
/// value of a donor picked uniformly among the `donors` nearest predicted
/// means (ties broken by row order).
pub fn pmm_impute<R: Rng + ?Sized>(
    y_obs: &[f64],
    x_obs: &Matrix,
    x_mis: &Matrix,
    donors: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if donors == 0 || donors > y_obs.len() {
        return Err(Error::invalid(format!(
            "{donors} donors requested from {} observed cases",
            y_obs.len()
        )));
    }
    let params = draw_linear_params(y_obs, x_obs, rng)?;
    let fit_obs = params.predict_mean(x_obs)?;
    let fit_mis = params.predict_mean(x_mis)?;
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(y_obs.len());
    let mut out = Vec::with_capacity(fit_mis.len());
    let by_distance =
        |a: &(f64, usize), b: &(f64, usize)| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
    for target in fit_mis {
        dist.clear();
        dist.extend(fit_obs.iter().enumerate().map(|(i, f)| ((f - target).abs(), i)));
        if donors < dist.len() {
            dist.select_nth_unstable_by(donors - 1, by_distance);
        }
        let pool = &mut dist[..donors];
        pool.sort_by(by_distance);
        let pick = pool[rng.random_range(0..donors)].1;
        out.push(y_obs[pick]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn column(v: &[f64]) -> Matrix {
        Matrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn exact_line_concentrates() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let xm = column(&x);
        let mut hits = 0;
        for seed in 0..200 {
            let d = draw_linear_params(&y, &xm, &mut seeded(seed)).unwrap();
            if (d.coefficients[1] - 2.0).abs() < 0.02 && d.residual_sd < 1e-3 {
                hits += 1;
            }
        }
        assert!(hits >= 199, "{hits}");
    }

    #[test]
    fn intercept_only_centers_on_mean() {
        let mut rng = seeded(11);
        let y: Vec<f64> = (0..50)
            .map(|_| 5.0 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let ybar = y.iter().sum::<f64>() / 50.0;
        let x = Matrix::zeros(50, 0);
        let draws: Vec<f64> = (0..1000)
            .map(|_| draw_linear_params(&y, &x, &mut rng).unwrap().coefficients[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / 1000.0;
        let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 999.0).sqrt();
        assert!((mean - ybar).abs() < 3.0 * sd / (1000f64).sqrt());
        assert!((mean - 5.0).abs() < 0.5);
    }

    #[test]
    fn overparameterized_rejected() {
        let x = Matrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let err = draw_linear_params(&[1.0, 2.0, 3.0], &x, &mut seeded(1)).unwrap_err();
        assert!(matches!(err, Error::Overparameterized { .. }));
    }

    #[test]
    fn non_finite_design_rejected() {
        let x = column(&[1.0, f64::NAN, 3.0, 4.0]);
        assert!(matches!(
            draw_linear_params(&[1.0, 2.0, 3.0, 4.0], &x, &mut seeded(1)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn predictive_without_noise_is_linear_predictor() {
        let params = LinearModelDraw {
            coefficients: vec![1.0, 2.0],
            residual_sd: 0.0,
            ridge: 0.0,
        };
        let out = draw_predictive(&params, &column(&[0.0, 1.5]), &mut seeded(1)).unwrap();
        assert_eq!(out, vec![1.0, 4.0]);
        let empty = draw_predictive(&params, &Matrix::zeros(0, 1), &mut seeded(1)).unwrap();
        assert!(empty.is_empty());
        assert!(draw_predictive(&params, &Matrix::zeros(2, 3), &mut seeded(1)).is_err());
    }

    #[test]
    fn predictive_moments() {
        let params = LinearModelDraw {
            coefficients: vec![1.0, 2.0],
            residual_sd: 3.0,
            ridge: 0.0,
        };
        let x = Matrix::from_element(10_000, 1, 0.5);
        let out = draw_predictive(&params, &x, &mut seeded(2)).unwrap();
        let mean = out.iter().sum::<f64>() / 1e4;
        let sd = (out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9999.0).sqrt();
        assert!((mean - 2.0).abs() < 4.0 * 3.0 / 100.0);
        assert!((sd - 3.0).abs() < 0.05 * 3.0);
    }

    #[test]
    fn pmm_exact_match() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let xm = column(&x);
        let out = pmm_impute(&x, &xm, &column(&[7.0, 13.0]), 1, &mut seeded(3)).unwrap();
        assert_eq!(out, vec![7.0, 13.0]);
    }

    #[test]
    fn pmm_constant_response() {
        let mut rng = seeded(4);
        let x = Matrix::from_fn(30, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let xm = Matrix::from_fn(5, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = vec![3.25; 30];
        let out = pmm_impute(&y, &x, &xm, 5, &mut rng).unwrap();
        assert!(out.iter().all(|&v| v == 3.25));
    }

    #[test]
    fn pmm_donor_bounds() {
        let x = column(&[1.0, 2.0, 3.0, 4.0]);
        assert!(pmm_impute(&[1.0, 2.0, 3.0, 4.0], &x, &x, 0, &mut seeded(1)).is_err());
        assert!(pmm_impute(&[1.0, 2.0, 3.0, 4.0], &x, &x, 5, &mut seeded(1)).is_err());
    }

    #[test]
    fn ridge_shrinks_slopes() {
        let mut rng = seeded(5);
        let x = Matrix::from_fn(40, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..40)
            .map(|i| 1.0 + x[(i, 0)] - 2.0 * x[(i, 1)] + 0.5 * x[(i, 2)])
            .map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = |ridge: f64| {
            let d = draw_linear_params_with_ridge(&y, &x, ridge, &mut seeded(9)).unwrap();
            d.coefficients[1..].iter().map(|b| b * b).sum::<f64>().sqrt()
        };
        let (a, b, c) = (norm(0.0), norm(1.0), norm(1e6));
        assert!(a > b && b > c, "{a} {b} {c}");
        assert!(c < 0.05);
    }
}
