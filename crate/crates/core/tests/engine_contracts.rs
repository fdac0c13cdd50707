//! Contracts of the imputation engine and the study runner.

use mipcr::data::{IncompleteData, Matrix};
use mipcr::engine::{
    build_predictors, prepass_single_impute, quickpred_columns, run_impute, ComponentCount,
    ImputationSpec, Strategy,
};
use mipcr::imputers::{ridge_least_squares, ImputerKind};
use mipcr::pca::scree;
use mipcr::rng::seeded;
use mipcr::sim::generate::{Categories, SimulationCondition};
use mipcr::sim::study::{replication_data, run_study, MethodSpec, StudyGrid};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn small_condition() -> SimulationCondition {
    SimulationCondition {
        n: 150,
        factors: 3,
        items_first_factor: 6,
        items_per_other_factor: 4,
        targets: 3,
        ..SimulationCondition::study1(0.0, Categories::Continuous)
    }
}

fn small_data(seed: u64) -> IncompleteData {
    replication_data(&small_condition(), seed, 0, 0).unwrap().incomplete
}

fn spec(strategy: Strategy, components: ComponentCount, seed: u64) -> ImputationSpec {
    ImputationSpec {
        strategy,
        components,
        chains: 2,
        iterations: 3,
        prepass_iterations: 3,
        seed,
        ..Default::default()
    }
}

fn all_methods() -> Vec<(Strategy, ComponentCount)> {
    vec![
        (Strategy::PcrVbv, ComponentCount::Fixed(2)),
        (Strategy::PcrVbv, ComponentCount::Max),
        (Strategy::PcrAll, ComponentCount::Fixed(3)),
        (Strategy::PcrAux, ComponentCount::Max),
        (Strategy::QuickPred, ComponentCount::Max),
        (Strategy::Oracle, ComponentCount::Max),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn observed_cells_are_never_modified(seed in 0u64..1000, method in 0usize..6, pmm in proptest::bool::ANY) {
        let data = small_data(seed);
        let (strategy, components) = all_methods()[method];
        let mut s = spec(strategy, components, seed);
        if pmm {
            s.imputer = ImputerKind::pmm();
        }
        let set = run_impute(&s, &data).unwrap();
        prop_assert_eq!(set.m(), 2);
        for c in &set.completions {
            prop_assert!(data.agrees_with(c));
        }
    }

    #[test]
    fn quickpred_sets_shrink_with_the_threshold(seed in 0u64..1000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let data = small_data(seed);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for &j in &data.incomplete_columns() {
            let big = quickpred_columns(&data, j, lo);
            let small = quickpred_columns(&data, j, hi);
            prop_assert!(small.iter().all(|c| big.contains(c)));
        }
    }
}

#[test]
fn same_seed_gives_identical_completions() {
    let data = small_data(3);
    for (strategy, components) in all_methods() {
        let a = run_impute(&spec(strategy, components, 11), &data).unwrap();
        let b = run_impute(&spec(strategy, components, 11), &data).unwrap();
        for (x, y) in a.completions.iter().zip(&b.completions) {
            assert!(x.iter().zip(y.iter()).all(|(u, v)| u.to_bits() == v.to_bits()), "{strategy}");
        }
        assert_eq!(a.trace, b.trace);
        assert_ne!(a.completions[0], a.completions[1], "{strategy}: chains should differ");
    }
}

#[test]
fn chain_count_does_not_perturb_earlier_chains() {
    let data = small_data(4);
    let mut s = spec(Strategy::PcrVbv, ComponentCount::Fixed(3), 5);
    let two = run_impute(&s, &data).unwrap();
    s.chains = 4;
    let four = run_impute(&s, &data).unwrap();
    assert_eq!(two.completions[0], four.completions[0]);
    assert_eq!(two.completions[1], four.completions[1]);
}

#[test]
fn pca_count_matches_strategy() {
    let data = small_data(5);
    let t = data.incomplete_columns().len();
    let vbv = run_impute(&spec(Strategy::PcrVbv, ComponentCount::Fixed(2), 1), &data).unwrap();
    assert_eq!(vbv.pca_count, t * 3 * 2);
    let all = run_impute(&spec(Strategy::PcrAll, ComponentCount::Fixed(2), 1), &data).unwrap();
    assert_eq!(all.pca_count, 1);
    let aux = run_impute(&spec(Strategy::PcrAux, ComponentCount::Fixed(2), 1), &data).unwrap();
    assert_eq!(aux.pca_count, 1);
    assert_eq!(all.trace.iter().map(|r| r.iteration).max(), Some(1));
}

#[test]
fn full_rank_pcr_reproduces_ols_fitted_values() {
    let mut rng = seeded(21);
    let (n, p) = (80, 6);
    let x = Matrix::from_fn(n, p, |i, j| rng.sample::<f64, _>(StandardNormal) + (i * j) as f64 * 0.001);
    let y: Vec<f64> = (0..n)
        .map(|i| 1.0 + (0..p).map(|j| (j as f64 - 2.0) * x[(i, j)]).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut full = x.clone().insert_column(p, 0.0);
    for i in 0..n {
        full[(i, p)] = y[i];
    }
    let data = IncompleteData::from_complete(full).unwrap();
    let scores = build_predictors(Strategy::PcrVbv, &data, data.values(), p, ComponentCount::Fixed(p), 0.1).unwrap();
    assert_eq!(scores.ncols(), p);
    let fitted = |design: &Matrix| {
        let b = ridge_least_squares(&y, design, 0.0).unwrap();
        (0..n)
            .map(|i| b[0] + (0..design.ncols()).map(|c| b[c + 1] * design[(i, c)]).sum::<f64>())
            .collect::<Vec<f64>>()
    };
    let via_pcr = fitted(&scores);
    let via_ols = fitted(&x);
    let worst = via_pcr.iter().zip(&via_ols).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn prepass_spectrum_tracks_the_complete_data() {
    let cond = SimulationCondition::default();
    let rep = replication_data(&cond, 17, 0, 0).unwrap();
    let completion = prepass_single_impute(&rep.incomplete, 0.3, 20, &mut seeded(3)).unwrap();
    assert!(rep.incomplete.agrees_with(&completion));
    let truth = scree(&rep.complete).unwrap();
    let pre = scree(&completion).unwrap();
    for k in 0..7 {
        assert!((pre[k] - truth[k]).abs() <= 0.1 * truth[k], "component {k}: {} vs {}", pre[k], truth[k]);
    }
}

#[test]
fn vbv_max_resolves_to_all_other_columns() {
    let cond = SimulationCondition::default();
    let rep = replication_data(&cond, 2, 0, 0).unwrap();
    let filled = mipcr::engine::initialize_fill(&rep.incomplete, &mut seeded(1)).unwrap();
    let z = build_predictors(Strategy::PcrVbv, &rep.incomplete, &filled, 0, ComponentCount::Max, 0.1).unwrap();
    assert_eq!(z.ncols(), 55);
}

fn tiny_grid() -> StudyGrid {
    let mut grid = StudyGrid::new(
        vec![small_condition(), SimulationCondition { noise_proportion: 1.0, ..small_condition() }],
        vec![
            MethodSpec::pcr(Strategy::PcrVbv, 2),
            MethodSpec::raw(Strategy::QuickPred),
            MethodSpec::raw(Strategy::Oracle),
        ],
        3,
    );
    grid.template.chains = 2;
    grid.template.iterations = 2;
    grid.seed = 99;
    grid
}

#[test]
fn study_output_is_independent_of_worker_count() {
    let mut grid = tiny_grid();
    grid.record_timing = false;
    let csvs = |workers: usize| {
        let res = run_study(&grid, workers).unwrap();
        let (mut m, mut e) = (Vec::new(), Vec::new());
        res.write_metrics(&mut m).unwrap();
        res.write_estimates(&mut e).unwrap();
        (m, e)
    };
    let (m1, e1) = csvs(1);
    let (m4, e4) = csvs(4);
    assert_eq!(m1, m4);
    assert_eq!(e1, e4);
}

#[test]
fn timed_records_differ_only_in_runtime() {
    let grid = tiny_grid();
    let a = run_study(&grid, 1).unwrap();
    let b = run_study(&grid, 3).unwrap();
    assert_eq!(a.metrics.len(), b.metrics.len());
    for (x, y) in a.metrics.iter().zip(&b.metrics) {
        let mut y = y.clone();
        y.runtime_s = x.runtime_s;
        assert_eq!(*x, y);
        assert!(x.runtime_s.is_some());
    }
}
