use std::f64::consts::PI;

use djc_core::disorder::{
    quenched_average, realization_deltas, realization_trace, realizations, DisorderKind, DisorderSpec,
};
use djc_core::lindblad::{NoiseRates, TimeGrid};
use djc_core::models::{InitialCase, InitialStateSpec, ModelParams};
use djc_core::scenario::{Route, Scenario};

fn clean(alpha: f64) -> Scenario {
    Scenario {
        model: ModelParams::resonant_symmetric(),
        drive: None,
        noise: NoiseRates::clean(),
        initial: InitialStateSpec { alpha, case: InitialCase::NoSuddenDeath },
        grid: TimeGrid::new(2.0, 201),
        cutoff: None,
        route: Route::Factorized,
    }
}

fn uniform(s: f64, n: usize) -> DisorderSpec {
    DisorderSpec {
        kind: DisorderKind::Uniform,
        s,
        n_realizations: n,
        seed: 2024,
        per_cavity_independent: true,
    }
}

#[test]
fn single_realization_average_is_that_realization() {
    let scenario = clean(PI / 6.0);
    let spec = uniform(0.4, 1);
    let avg = quenched_average(&scenario, &spec).unwrap();
    let (da, db) = realization_deltas(&spec, 0).unwrap();
    let single = realization_trace(&scenario, da, db).unwrap();
    assert_eq!(avg.mean.values, single.values);
    assert!(avg.stderr.iter().all(|e| *e == 0.0));
    assert_eq!(avg.mean.meta.realizations, 1);
    assert_eq!(avg.mean.meta.seed, Some(2024));
}

#[test]
fn zero_width_reproduces_clean_trace() {
    let scenario = clean(PI / 6.0);
    let clean_trace = scenario.simulate().unwrap().trace.values;
    for kind in [DisorderKind::Uniform, DisorderKind::Gaussian] {
        let spec = DisorderSpec { kind, s: 0.0, ..uniform(0.0, 4) };
        let avg = quenched_average(&scenario, &spec).unwrap();
        for (a, b) in avg.mean.values.iter().zip(&clean_trace) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn absent_disorder_runs_once() {
    let scenario = clean(PI / 6.0);
    let avg = quenched_average(&scenario, &DisorderSpec::none()).unwrap();
    assert_eq!(avg.realizations, 1);
}

#[test]
fn average_lies_within_realization_envelope() {
    let scenario = clean(PI / 5.0);
    let spec = DisorderSpec { kind: DisorderKind::Gaussian, ..uniform(0.3, 12) };
    let runs = realizations(&scenario, &spec).unwrap();
    let avg = quenched_average(&scenario, &spec).unwrap();
    for (k, m) in avg.mean.values.iter().enumerate() {
        let lo = runs.iter().map(|r| r.values[k]).fold(f64::INFINITY, f64::min);
        let hi = runs.iter().map(|r| r.values[k]).fold(f64::NEG_INFINITY, f64::max);
        assert!(lo - 1e-15 <= *m && *m <= hi + 1e-15);
    }
}

#[test]
fn label_swap_symmetry_of_estimator() {
    // Swapping the pairs maps α to π/2 − α and exchanges δ_A with δ_B.
    let alpha = PI / 6.0;
    let spec = uniform(0.5, 6);
    for i in 0..spec.n_realizations {
        let (da, db) = realization_deltas(&spec, i).unwrap();
        let direct = realization_trace(&clean(alpha), da, db).unwrap();
        let swapped = realization_trace(&clean(PI / 2.0 - alpha), db, da).unwrap();
        for (a, b) in direct.values.iter().zip(&swapped.values) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn average_is_independent_of_worker_count() {
    let scenario = clean(PI / 6.0);
    let spec = uniform(0.5, 16);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| quenched_average(&scenario, &spec).unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one.mean.values, three.mean.values);
    assert_eq!(one.stderr, three.stderr);
}

#[test]
fn failing_realization_reports_its_draw() {
    let scenario = Scenario {
        noise: NoiseRates::symmetric(0.5, 0.0, 0.0, 2.0),
        cutoff: Some(3),
        ..clean(PI / 6.0)
    };
    match quenched_average(&scenario, &uniform(0.2, 3)) {
        Err(djc_core::Error::Realization { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected a realization error, got {other:?}"),
    }
}
