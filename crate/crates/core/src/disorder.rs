//! Glassy coupling disorder and quenched averaging of the concurrence.
//!
//! Realization `i` draws its couplings from a ChaCha stream selected by
//! `(seed, i)`, so the set of realizations, and therefore the average,
//! does not depend on how work is scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::entanglement::{ConcurrenceTrace, TraceMeta};
use crate::error::{Error, Result};
use crate::lindblad::Diagnostics;
use crate::models::apply_disorder;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderKind {
    #[default]
    None,
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// Standard deviation (Gaussian) or full support width (uniform).
    pub s: f64,
    pub n_realizations: usize,
    pub seed: u64,
    /// Draw δ_A and δ_B separately; when false both cavities share one δ.
    pub per_cavity_independent: bool,
}

impl DisorderSpec {
    pub fn none() -> Self {
        Self {
            kind: DisorderKind::None,
            s: 0.0,
            n_realizations: 1,
            seed: 0,
            per_cavity_independent: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "s",
                reason: format!("disorder width must be nonnegative, got {}", self.s),
            });
        }
        if self.n_realizations < 1 {
            return Err(Error::InvalidParameter {
                field: "n_realizations",
                reason: "at least one realization is required".into(),
            });
        }
        Ok(())
    }
}

/// Independent random stream of realization `index`.
pub fn realization_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One coupling fluctuation δ.
pub fn sample_delta<R: Rng + ?Sized>(spec: &DisorderSpec, rng: &mut R) -> Result<f64> {
    match spec.kind {
        DisorderKind::None => Err(Error::Logic("cannot sample from an absent disorder distribution")),
        _ if spec.s == 0.0 => Ok(0.0),
        DisorderKind::Gaussian => {
            let normal = Normal::new(0.0, spec.s).map_err(|e| Error::InvalidParameter {
                field: "s",
                reason: e.to_string(),
            })?;
            Ok(normal.sample(rng))
        }
        DisorderKind::Uniform => {
            let half = 0.5 * spec.s;
            Ok(rng.random_range(-half..=half))
        }
    }
}

/// (δ_A, δ_B) of realization `index`.
pub fn realization_deltas(spec: &DisorderSpec, index: usize) -> Result<(f64, f64)> {
    if spec.kind == DisorderKind::None {
        return Ok((0.0, 0.0));
    }
    let mut rng = realization_stream(spec.seed, index as u64);
    let delta_a = sample_delta(spec, &mut rng)?;
    let delta_b = if spec.per_cavity_independent { sample_delta(spec, &mut rng)? } else { delta_a };
    Ok((delta_a, delta_b))
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub delta_a: f64,
    pub delta_b: f64,
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Concurrence trace of a single disorder realization.
pub fn realization_trace(scenario: &Scenario, delta_a: f64, delta_b: f64) -> Result<Realization> {
    let model = apply_disorder(&scenario.model, delta_a, delta_b);
    let sim = scenario.simulate_model(&model)?;
    Ok(Realization {
        delta_a,
        delta_b,
        values: sim.trace.values,
        diagnostics: sim.diagnostics,
    })
}

fn run_realization(scenario: &Scenario, spec: &DisorderSpec, index: usize) -> Result<Realization> {
    let (delta_a, delta_b) = realization_deltas(spec, index)?;
    realization_trace(scenario, delta_a, delta_b).map_err(|e| Error::Realization {
        index,
        delta_a,
        delta_b,
        source: Box::new(e),
    })
}

/// Every realization, in index order.
pub fn realizations(scenario: &Scenario, spec: &DisorderSpec) -> Result<Vec<Realization>> {
    spec.validate()?;
    scenario.validate()?;
    let n = if spec.kind == DisorderKind::None { 1 } else { spec.n_realizations };
    #[cfg(feature = "parallel")]
    let runs: Vec<Result<Realization>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(|i| run_realization(scenario, spec, i)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<Realization>> = (0..n).map(|i| run_realization(scenario, spec, i)).collect();
    runs.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct QuenchedResult {
    pub mean: ConcurrenceTrace,
    /// Standard error of the mean per sample.
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub diagnostics: Diagnostics,
}

/// `C(t) = (1/N) Σ_i C_{δ_i}(t)` over independent coupling draws.
pub fn quenched_average(scenario: &Scenario, spec: &DisorderSpec) -> Result<QuenchedResult> {
    let runs = realizations(scenario, spec)?;
    Ok(reduce(scenario, spec, &runs))
}

/// Order-fixed reduction of per-realization traces to mean and standard error.
pub fn reduce(scenario: &Scenario, spec: &DisorderSpec, runs: &[Realization]) -> QuenchedResult {
    let n = runs.len();
    let samples = scenario.grid.n_samples;
    let mut mean = vec![0.0; samples];
    for run in runs {
        for (m, v) in mean.iter_mut().zip(&run.values) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let stderr = if n > 1 {
        let mut var = vec![0.0; samples];
        for run in runs {
            for ((acc, v), m) in var.iter_mut().zip(&run.values).zip(&mean) {
                *acc += (v - m).powi(2);
            }
        }
        var.iter().map(|s| (s / (n - 1) as f64).sqrt() / (n as f64).sqrt()).collect()
    } else {
        vec![0.0; samples]
    };
    let mut diagnostics = runs[0].diagnostics;
    for run in &runs[1..] {
        diagnostics.merge(&run.diagnostics);
    }
    QuenchedResult {
        mean: ConcurrenceTrace {
            times: scenario.grid.raw_times(scenario.model.g_b),
            scaled_times: scenario.grid.scaled_times(),
            values: mean,
            meta: TraceMeta {
                scenario_hash: scenario.hash(),
                seed: Some(spec.seed),
                realizations: n,
            },
        },
        stderr,
        realizations: n,
        seed: spec.seed,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: DisorderKind, s: f64) -> DisorderSpec {
        DisorderSpec {
            kind,
            s,
            n_realizations: 10,
            seed: 42,
            per_cavity_independent: true,
        }
    }

    #[test]
    fn uniform_support() {
        let sp = spec(DisorderKind::Uniform, 0.4);
        let mut rng = realization_stream(1, 0);
        for _ in 0..10_000 {
            let d = sample_delta(&sp, &mut rng).unwrap();
            assert!((-0.2..=0.2).contains(&d));
        }
    }

    #[test]
    fn gaussian_moments() {
        let sp = spec(DisorderKind::Gaussian, 0.1);
        let mut rng = realization_stream(7, 3);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_delta(&sp, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let std = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 4.0 * 0.1 / (n as f64).sqrt(), "mean {mean}");
        assert!((std - 0.1).abs() < 0.02 * 0.1, "std {std}");
    }

    #[test]
    fn zero_width_is_degenerate() {
        let mut rng = realization_stream(1, 0);
        for kind in [DisorderKind::Gaussian, DisorderKind::Uniform] {
            assert_eq!(sample_delta(&spec(kind, 0.0), &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn sampling_absent_disorder_is_a_logic_error() {
        let mut rng = realization_stream(1, 0);
        assert!(matches!(sample_delta(&spec(DisorderKind::None, 0.1), &mut rng), Err(Error::Logic(_))));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let sp = spec(DisorderKind::Gaussian, 0.3);
        assert_eq!(realization_deltas(&sp, 5).unwrap(), realization_deltas(&sp, 5).unwrap());
        assert_ne!(realization_deltas(&sp, 5).unwrap(), realization_deltas(&sp, 6).unwrap());
        let (a, b) = realization_deltas(&sp, 5).unwrap();
        assert_ne!(a, b);
        let shared = DisorderSpec { per_cavity_independent: false, ..sp };
        let (a, b) = realization_deltas(&shared, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(DisorderKind::Uniform, -0.1).validate().is_err());
        assert!(DisorderSpec { n_realizations: 0, ..spec(DisorderKind::Uniform, 0.1) }.validate().is_err());
    }
}
