//! Browser bindings: a noisy trace, a pumped trace and a small disorder
//! average, each returned as the concurrence at evenly spaced scaled times
//! `0, t_end/(n−1), …, t_end`.
//!
//! The `*_values` functions hold the logic and run natively; the exported
//! wrappers only translate errors for JavaScript.

use std::f64::consts::PI;

use djc_core::disorder::{quenched_average, DisorderKind, DisorderSpec};
use djc_core::lindblad::{NoiseRates, TimeGrid};
use djc_core::models::{resonant_pump_detuning, DriveParams, InitialCase, InitialStateSpec, ModelParams, ResonanceBranch};
use djc_core::scenario::{Route, Scenario};
use wasm_bindgen::prelude::*;

/// Disorder averages in the page are capped to keep it responsive.
pub const MAX_REALIZATIONS: usize = 500;

fn scenario(n_photon: u32, g_a: f64, alpha: f64, case: InitialCase, noise: NoiseRates, t_end: f64, n_samples: usize) -> Scenario {
    Scenario {
        model: ModelParams { omega0: n_photon as f64, omega: 1.0, g_a, g_b: 1.0, n_photon },
        drive: None,
        noise,
        initial: InitialStateSpec { alpha, case },
        grid: TimeGrid::new(t_end, n_samples),
        cutoff: None,
        route: Route::Factorized,
    }
}

fn initial_case(sudden_death: bool) -> InitialCase {
    if sudden_death {
        InitialCase::SuddenDeath
    } else {
        InitialCase::NoSuddenDeath
    }
}

#[allow(clippy::too_many_arguments)]
pub fn noisy_values(
    n_photon: u32,
    g_a: f64,
    alpha_over_pi: f64,
    sudden_death: bool,
    kappa: f64,
    gamma: f64,
    gamma_phi: f64,
    n_th: f64,
    t_end: f64,
    n_samples: usize,
) -> Result<Vec<f64>, String> {
    let noise = NoiseRates::symmetric(kappa, gamma, gamma_phi, n_th);
    let s = scenario(n_photon, g_a, alpha_over_pi * PI, initial_case(sudden_death), noise, t_end, n_samples);
    s.simulate().map(|sim| sim.trace.values).map_err(|e| e.to_string())
}

/// Clean pumped model at resonance, α = π/6.
pub fn pumped_values(n_photon: u32, m_order: u32, epsilon: f64, t_end: f64, n_samples: usize) -> Result<Vec<f64>, String> {
    let delta_p = resonant_pump_detuning(n_photon, m_order, 1.0, ResonanceBranch::Plus).map_err(|e| e.to_string())?;
    let mut s = scenario(n_photon, 1.0, PI / 6.0, InitialCase::NoSuddenDeath, NoiseRates::clean(), t_end, n_samples);
    s.drive = Some(DriveParams { epsilon, chi: 0.0, m_order, delta_p });
    s.simulate().map(|sim| sim.trace.values).map_err(|e| e.to_string())
}

/// Quenched average of the clean symmetric model, α = π/6.
pub fn disorder_values(
    n_photon: u32,
    gaussian: bool,
    width: f64,
    n_realizations: usize,
    seed: u64,
    t_end: f64,
    n_samples: usize,
) -> Result<Vec<f64>, String> {
    if n_realizations > MAX_REALIZATIONS {
        return Err(format!("at most {MAX_REALIZATIONS} realizations run in the browser"));
    }
    let spec = DisorderSpec {
        kind: if gaussian { DisorderKind::Gaussian } else { DisorderKind::Uniform },
        s: width,
        n_realizations,
        seed,
        per_cavity_independent: true,
    };
    let s = scenario(n_photon, 1.0, PI / 6.0, InitialCase::NoSuddenDeath, NoiseRates::clean(), t_end, n_samples);
    quenched_average(&s, &spec).map(|q| q.mean.values).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = noisyTrace)]
#[allow(clippy::too_many_arguments)]
pub fn noisy_trace(
    n_photon: u32,
    g_a: f64,
    alpha_over_pi: f64,
    sudden_death: bool,
    kappa: f64,
    gamma: f64,
    gamma_phi: f64,
    n_th: f64,
    t_end: f64,
    n_samples: usize,
) -> Result<Vec<f64>, JsError> {
    noisy_values(n_photon, g_a, alpha_over_pi, sudden_death, kappa, gamma, gamma_phi, n_th, t_end, n_samples)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pumpedTrace)]
pub fn pumped_trace(n_photon: u32, m_order: u32, epsilon: f64, t_end: f64, n_samples: usize) -> Result<Vec<f64>, JsError> {
    pumped_values(n_photon, m_order, epsilon, t_end, n_samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = disorderAverage)]
pub fn disorder_average(
    n_photon: u32,
    gaussian: bool,
    width: f64,
    n_realizations: usize,
    seed: u64,
    t_end: f64,
    n_samples: usize,
) -> Result<Vec<f64>, JsError> {
    disorder_values(n_photon, gaussian, width, n_realizations, seed, t_end, n_samples).map_err(|e| JsError::new(&e))
}
