//! Properties of the data generator, coarsening, amputation and metrics.

use mipcr::data::ColumnRole;
use mipcr::pca::{correlation_matrix, scree};
use mipcr::rng::{derive_rng, seeded};
use mipcr::sim::amputation::{ampute, calibrate_intercept, expected_proportion, missingness_scores};
use mipcr::sim::generate::{coarsen, coarsen_column, generate_complete, Categories, SimulationCondition};
use mipcr::sim::metrics::{compute_cic, compute_ciw, compute_prb};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn seven_factor_spectrum_is_visible() {
    let cond = SimulationCondition::study1(0.0, Categories::Continuous);
    let reps = 40;
    let mut hits = 0;
    for rep in 0..reps {
        let (x, _) = generate_complete(&cond, &mut derive_rng(77, &[rep])).unwrap();
        let eigs = scree(&x).unwrap();
        if eigs.iter().filter(|&&l| l > 1.5).count() == 7 {
            hits += 1;
        }
    }
    assert!(hits as f64 >= 0.95 * reps as f64, "{hits}/{reps}");
}

fn population_correlation(cond: &SimulationCondition, a: usize, b: usize) -> f64 {
    let f = cond.item_factors();
    let psi = cond.factor_correlation();
    cond.loading * cond.loading * psi[(f[a], f[b])]
}

/// Coarsening may not inflate a correlation beyond sampling slack. Pairs
/// with near-zero population correlation are only checked at pn = 0, where
/// none exist; elsewhere the coarsening noise alone can exceed the slack.
#[test]
fn coarsening_attenuates_correlations() {
    for (pn, seed) in [(0.0, 31u64), (0.0, 32), (1.0 / 3.0, 33), (1.0, 34)] {
        let cond = SimulationCondition::study1(pn, Categories::Continuous);
        let (x, roles) = generate_complete(&cond, &mut seeded(seed)).unwrap();
        let r = correlation_matrix(&x).unwrap();
        for k in [7, 5, 3, 2] {
            let c = correlation_matrix(&coarsen(&x, &roles, Categories::Levels(k))).unwrap();
            for a in 0..x.ncols() {
                for b in 0..a {
                    if population_correlation(&cond, a, b) < 0.3 {
                        continue;
                    }
                    assert!(
                        c[(a, b)].abs() <= r[(a, b)].abs() + 0.03,
                        "pn={pn} k={k} ({a},{b}) {} vs {}",
                        c[(a, b)],
                        r[(a, b)]
                    );
                }
            }
        }
    }
}

#[test]
fn coarsened_codes_are_balanced() {
    let mut rng = seeded(3);
    let col: Vec<f64> = (0..700).map(|_| rng.sample(StandardNormal)).collect();
    for k in [2usize, 3, 5, 7] {
        let coded = coarsen_column(&col, k);
        for code in 1..=k {
            let share = coded.iter().filter(|&&c| c == code as f64).count() as f64 / 700.0;
            assert!((share - 1.0 / k as f64).abs() < 0.01, "k={k} code={code} share={share}");
        }
    }
}

#[test]
fn amputation_hits_the_target_proportion() {
    let cond = SimulationCondition::default();
    for rep in 0..10u64 {
        let (x, roles) = generate_complete(&cond, &mut derive_rng(5, &[rep])).unwrap();
        let data = ampute(&x, &roles, 0.3, &mut derive_rng(6, &[rep])).unwrap();
        for j in 0..x.ncols() {
            let prop = data.missing_count(j) as f64 / x.nrows() as f64;
            if roles[j] == ColumnRole::AnalysisTarget {
                assert!((prop - 0.3).abs() <= 0.04 + 0.025, "rep {rep} col {j}: {prop}");
            } else {
                assert_eq!(prop, 0.0);
            }
        }
        let scores = missingness_scores(&x, &[4, 5, 6, 7]).unwrap();
        for j in 0..4 {
            let mean = |rows: Vec<usize>| rows.iter().map(|&i| scores[i]).sum::<f64>() / rows.len() as f64;
            assert!(mean(data.missing_rows(j)) > mean(data.observed_rows(j)));
        }
    }
}

proptest! {
    #[test]
    fn coarsening_preserves_order(col in proptest::collection::vec(-100.0f64..100.0, 2..80), k in 2usize..8) {
        let coded = coarsen_column(&col, k);
        for a in 0..col.len() {
            prop_assert!(coded[a] >= 1.0 && coded[a] <= k as f64);
            for b in 0..col.len() {
                if col[a] <= col[b] {
                    prop_assert!(coded[a] <= coded[b]);
                }
            }
        }
    }

    #[test]
    fn calibration_is_within_tolerance(scores in proptest::collection::vec(-5.0f64..5.0, 1..200), target in 0.01f64..0.99) {
        let b0 = calibrate_intercept(&scores, target).unwrap();
        prop_assert!((expected_proportion(&scores, b0) - target).abs() < 1e-6);
    }

    #[test]
    fn metrics_match_literal_formulas(
        est in proptest::collection::vec(-3.0f64..3.0, 1..40),
        shift in 0.1f64..3.0,
        widths in proptest::collection::vec(0.0f64..2.0, 1..40),
    ) {
        let s = est.len().min(widths.len());
        let est = &est[..s];
        let full: Vec<f64> = est.iter().map(|e| e * 0.5 + shift).collect();
        let phi = full.iter().sum::<f64>() / s as f64;
        let mean = est.iter().sum::<f64>() / s as f64;
        let prb = ((mean - phi) / phi).abs() * 100.0;
        prop_assert!((compute_prb(est, &full).unwrap() - prb).abs() <= 1e-12 * prb.max(1.0));
        let ci: Vec<(f64, f64)> = est.iter().zip(&widths[..s]).map(|(e, w)| (e - w, e + w)).collect();
        let ciw = widths[..s].iter().map(|w| 2.0 * w).sum::<f64>() / s as f64;
        prop_assert!((compute_ciw(&ci).unwrap() - ciw).abs() < 1e-12);
        let mut hits = 0.0;
        for (lo, hi) in &ci {
            if *lo <= phi && phi <= *hi {
                hits += 1.0;
            }
        }
        prop_assert!((compute_cic(&ci, phi).unwrap() - hits / s as f64).abs() < 1e-12);
    }
}
