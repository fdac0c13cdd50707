//! PCA against a cyclic Jacobi eigensolver on an explicitly built correlation matrix.

mod common;

use common::{explicit_correlation, jacobi};
use mipcr::data::Matrix;
use mipcr::pca::{
    acceleration_factor_count, kaiser_count, optimal_coordinates_count, pca, scree,
};
use mipcr::rng::seeded;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn random_matrix(n: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    let shared: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let weights: Vec<f64> = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
    Matrix::from_fn(n, p, |i, j| {
        weights[j] * shared[i] + rng.sample::<f64, _>(StandardNormal) * (1.0 + j as f64 * 0.1)
    })
}

#[test]
fn pca_matches_jacobi_oracle_on_200_matrices() {
    let (mut worst_val, mut worst_vec) = (0.0f64, 0.0f64);
    for seed in 0..200 {
        let x = random_matrix(30, 8, seed);
        let res = pca(&x, 8).unwrap();
        let (values, vectors) = jacobi(explicit_correlation(&x));
        for k in 0..8 {
            worst_val = worst_val.max((res.spectrum[k] - values[k]).abs());
            let same: f64 = (0..8).map(|i| (res.weights[(i, k)] - vectors[k][i]).abs()).fold(0.0, f64::max);
            let flip: f64 = (0..8).map(|i| (res.weights[(i, k)] + vectors[k][i]).abs()).fold(0.0, f64::max);
            worst_vec = worst_vec.max(same.min(flip));
        }
    }
    assert!(worst_val < 1e-8, "eigenvalue deviation {worst_val}");
    assert!(worst_vec < 1e-6, "eigenvector deviation {worst_vec}");
}

#[test]
fn scores_are_standardized_data_times_weights() {
    let x = random_matrix(40, 6, 99);
    let res = pca(&x, 3).unwrap();
    let r = explicit_correlation(&x);
    let n = x.nrows();
    for j in 0..6 {
        let col = x.column(j);
        let m = col.mean();
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((res.centers[j] - m).abs() < 1e-12);
        assert!((res.scales[j] - sd).abs() < 1e-12);
    }
    for k in 0..3 {
        for i in 0..n {
            let manual: f64 = (0..6)
                .map(|j| (x[(i, j)] - res.centers[j]) / res.scales[j] * res.weights[(j, k)])
                .sum();
            assert!((manual - res.scores[(i, k)]).abs() < 1e-10);
        }
        // Rayleigh quotient of the weight vector equals its eigenvalue.
        let w: Vec<f64> = (0..6).map(|j| res.weights[(j, k)]).collect();
        let rq: f64 = (0..6)
            .map(|a| (0..6).map(|b| w[a] * r[a][b] * w[b]).sum::<f64>())
            .sum();
        assert!((rq - res.eigenvalues[k]).abs() < 1e-10);
    }
}

#[test]
fn identity_like_data_has_few_kaiser_components() {
    let mut rng = seeded(5);
    let x = Matrix::from_fn(2000, 5, |_, _| rng.sample::<f64, _>(StandardNormal));
    let eigs = scree(&x).unwrap();
    assert!(kaiser_count(&eigs) <= 2);
    assert_eq!(kaiser_count(&[1.0, 1.0, 1.0]), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_sums_to_p_and_scores_are_uncorrelated(seed in 0u64..10_000, n in 12usize..40, p in 2usize..7) {
        let x = random_matrix(n, p, seed);
        let res = pca(&x, p.min(n)).unwrap();
        prop_assert!((res.spectrum.iter().sum::<f64>() - p as f64).abs() < 1e-9);
        prop_assert!(res.spectrum.windows(2).all(|w| w[0] >= w[1]));
        for a in 0..res.q() {
            for b in 0..res.q() {
                let s: f64 = res.scores.column(a).dot(&res.scores.column(b)) / (n - 1) as f64;
                let expect = if a == b { res.eigenvalues[a] } else { 0.0 };
                prop_assert!((s - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rule_counts_are_bounded(mut eigs in proptest::collection::vec(0.0f64..10.0, 3..30)) {
        eigs.sort_by(|a, b| b.total_cmp(a));
        let p = eigs.len();
        prop_assert!(kaiser_count(&eigs) <= p);
        prop_assert!(optimal_coordinates_count(&eigs).unwrap() < p);
        prop_assert!(acceleration_factor_count(&eigs).unwrap() < p);
    }
}
