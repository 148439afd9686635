//! Named scenarios for the six figure panels.
//!
//! A preset is a panel with one or more curves. Parameters that the figures
//! state are fixed here; the noise rates, disorder width and time windows are
//! not stated and carry a default that every preset lists in its notes.

use std::f64::consts::PI;
use std::path::PathBuf;

use djc_core::disorder::{DisorderKind, DisorderSpec};
use djc_core::lindblad::{NoiseRates, TimeGrid};
use djc_core::models::{resonant_pump_detuning, DriveParams, InitialCase, InitialStateSpec, ModelParams, ResonanceBranch};
use djc_core::scenario::Route;

use crate::config::{parse_with_overrides, ConfigError, GridConfig, OutputSpec, Parsed, ScenarioConfig};

/// Marker for values the figures do not print.
pub const PLACEHOLDER: &str = "published value unreadable; default supplied";

/// Default rate of every noise channel.
pub const DEFAULT_RATE: f64 = 0.05;
/// Thermal photon number of the thermal-bath curves.
pub const DEFAULT_N_TH: f64 = 0.5;
/// Disorder width of the disorder presets.
pub const DEFAULT_WIDTH: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 1;
pub const REALIZATIONS: usize = 1000;
pub const ASYMMETRIC_G_A: f64 = 0.9;
/// Scaled time window of the undriven panels.
pub const WINDOW: f64 = 6.0;
const FINE_STEP: f64 = 1e-3;
/// Sampling of the disorder panels, where each sample costs a thousand runs.
const COARSE_STEP: f64 = 1e-2;
/// Sampling of the pumped panels; death windows there are about 4e-4 wide.
const PUMP_STEP: f64 = 1e-4;
const PUMP_WINDOW: f64 = 5.0;

fn grid(window: f64, step: f64) -> TimeGrid {
    TimeGrid::new(window, (window / step).round() as usize + 1)
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub summary: String,
    /// Parameters not taken from the figure captions.
    pub notes: Vec<String>,
    pub curves: Vec<Curve>,
}

impl Preset {
    /// Curves after applying `overrides`, optionally restricted to one label.
    pub fn resolve(&self, curve: Option<&str>, overrides: &[String]) -> Result<Vec<(String, Parsed)>, ConfigError> {
        let selected: Vec<&Curve> = self.curves.iter().filter(|c| curve.is_none_or(|l| c.label == l)).collect();
        if selected.is_empty() {
            let labels: Vec<&str> = self.curves.iter().map(|c| c.label.as_str()).collect();
            return Err(ConfigError::Field {
                field: "curve".into(),
                reason: format!("preset {} has no curve `{}`; available: {}", self.name, curve.unwrap_or(""), labels.join(", ")),
            });
        }
        selected
            .into_iter()
            .map(|c| Ok((c.label.clone(), parse_with_overrides(&c.config.to_toml(), overrides)?)))
            .collect()
    }
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}

pub fn catalog() -> Vec<Preset> {
    let mut out = Vec::new();
    for (name, g_a, case) in linear_panels("fig1") {
        out.push(panel(
            &name,
            format!("linear double JC, {}, {}; noise channels", coupling_label(g_a), case_label(case)),
            noise_menu(&base(&name, 1, g_a, case)),
            noise_notes(FINE_STEP),
        ));
    }
    for (name, g_a, case) in linear_panels("fig2") {
        let curves = (1..=3)
            .map(|n| curve(&format!("n{n}"), base(&name, n, g_a, case)))
            .collect();
        out.push(panel(
            &name,
            format!("multiphoton double JC, n = 1, 2, 3, {}, {}; clean", coupling_label(g_a), case_label(case)),
            curves,
            window_notes(FINE_STEP),
        ));
    }
    for (name, n) in [("fig2e", 2), ("fig2f", 3)] {
        out.push(panel(
            name,
            format!("multiphoton double JC, n = {n}, symmetric, case (i); noise channels"),
            noise_menu(&base(name, n, 1.0, InitialCase::NoSuddenDeath)),
            noise_notes(FINE_STEP),
        ));
    }
    for (fig, epsilon) in [("fig3", 0.01), ("fig4", 0.04)] {
        for (panel_id, orders) in [("a", &[(2, 1), (2, 2), (3, 1)][..]), ("b", &[(3, 3)][..])] {
            let name = format!("{fig}{panel_id}");
            let curves = orders.iter().map(|&(n, m)| curve(&format!("n{n}_m{m}"), driven(&name, n, m, epsilon))).collect();
            let pairs: Vec<String> = orders.iter().map(|(n, m)| format!("({n},{m})")).collect();
            out.push(panel(
                &name,
                format!("pumped multiphoton double JC, (N,M) in {}, epsilon = {epsilon}; clean", pairs.join(" ")),
                curves,
                vec![
                    format!("time window [0, {PUMP_WINDOW}] sampled every {PUMP_STEP} to resolve narrow death windows"),
                    "pump phase chi = 0; resonant pump detuning on the + branch when M = N".into(),
                ],
            ));
        }
    }
    for (fig, linear_noise) in [("fig5", false), ("fig6", true)] {
        for (panel_id, kind) in [("a", DisorderKind::Uniform), ("b", DisorderKind::Gaussian)] {
            let name = format!("{fig}{panel_id}");
            let kind_label = if kind == DisorderKind::Uniform { "uniform" } else { "Gaussian" };
            let (summary, curves) = if linear_noise {
                let template = disordered(base(&name, 1, 1.0, InitialCase::NoSuddenDeath), kind);
                (format!("linear double JC with {kind_label} disorder; noise channels"), noise_menu(&template))
            } else {
                let curves = (1..=3)
                    .map(|n| curve(&format!("n{n}"), disordered(base(&name, n, 1.0, InitialCase::NoSuddenDeath), kind)))
                    .collect();
                (format!("multiphoton double JC, n = 1, 2, 3, with {kind_label} disorder; clean"), curves)
            };
            let mut notes = vec![
                format!("disorder width s = {DEFAULT_WIDTH}: {PLACEHOLDER}"),
                format!("independent draws for both cavities, seed {DEFAULT_SEED}"),
            ];
            if linear_noise {
                notes.extend(noise_notes(COARSE_STEP));
            } else {
                notes.extend(window_notes(COARSE_STEP));
            }
            out.push(panel(&name, summary, curves, notes));
        }
    }
    out
}

fn linear_panels(fig: &str) -> [(String, f64, InitialCase); 4] {
    let sym = 1.0;
    let asym = ASYMMETRIC_G_A;
    [
        ((format!("{fig}a")), sym, InitialCase::NoSuddenDeath),
        ((format!("{fig}b")), asym, InitialCase::NoSuddenDeath),
        ((format!("{fig}c")), sym, InitialCase::SuddenDeath),
        ((format!("{fig}d")), asym, InitialCase::SuddenDeath),
    ]
}

fn coupling_label(g_a: f64) -> String {
    if g_a == 1.0 {
        "symmetric".into()
    } else {
        format!("G_A = {g_a} G_B")
    }
}

fn case_label(case: InitialCase) -> &'static str {
    match case {
        InitialCase::NoSuddenDeath => "case (i)",
        InitialCase::SuddenDeath => "case (ii)",
    }
}

fn panel(name: &str, summary: String, curves: Vec<Curve>, notes: Vec<String>) -> Preset {
    Preset { name: name.into(), summary, notes, curves }
}

fn curve(label: &str, mut config: ScenarioConfig) -> Curve {
    config.output.name = format!("{}_{label}", config.output.name);
    Curve { label: label.into(), config }
}

fn window_notes(step: f64) -> Vec<String> {
    vec![format!("time window [0, {WINDOW}] sampled every {step}: default supplied")]
}

fn noise_notes(step: f64) -> Vec<String> {
    let mut notes = window_notes(step);
    notes.push(format!("kappa = gamma = gamma_phi = {DEFAULT_RATE}: {PLACEHOLDER}"));
    notes.push(format!("thermal curve kappa = {DEFAULT_RATE}, n_th = {DEFAULT_N_TH}: {PLACEHOLDER}"));
    notes
}

/// Clean, resonant, α = π/6 over six periods.
fn base(name: &str, n_photon: u32, g_a: f64, case: InitialCase) -> ScenarioConfig {
    ScenarioConfig {
        seed: DEFAULT_SEED,
        model: ModelParams { omega0: n_photon as f64, omega: 1.0, g_a, g_b: 1.0, n_photon },
        drive: None,
        noise: NoiseRates::clean(),
        disorder: DisorderSpec { seed: DEFAULT_SEED, ..DisorderSpec::none() },
        initial: InitialStateSpec { alpha: PI / 6.0, case },
        grid: GridConfig { time: grid(WINDOW, FINE_STEP), cutoff: None, route: Route::default() },
        output: OutputSpec { dir: PathBuf::from("."), name: name.to_string(), json: false },
    }
}

fn noise_menu(template: &ScenarioConfig) -> Vec<Curve> {
    let r = DEFAULT_RATE;
    [
        ("clean", NoiseRates::clean()),
        ("kappa", NoiseRates::symmetric(r, 0.0, 0.0, 0.0)),
        ("gamma", NoiseRates::symmetric(0.0, r, 0.0, 0.0)),
        ("gamma_phi", NoiseRates::symmetric(0.0, 0.0, r, 0.0)),
        ("thermal", NoiseRates::symmetric(r, 0.0, 0.0, DEFAULT_N_TH)),
    ]
    .into_iter()
    .map(|(label, noise)| curve(label, ScenarioConfig { noise, ..template.clone() }))
    .collect()
}

fn driven(name: &str, n: u32, m: u32, epsilon: f64) -> ScenarioConfig {
    let mut config = base(name, n, 1.0, InitialCase::NoSuddenDeath);
    let delta_p = resonant_pump_detuning(n, m, 1.0, ResonanceBranch::Plus).expect("M ≤ N");
    config.drive = Some(DriveParams { epsilon, chi: 0.0, m_order: m, delta_p });
    config.grid.time = grid(PUMP_WINDOW, PUMP_STEP);
    config
}

fn disordered(mut config: ScenarioConfig, kind: DisorderKind) -> ScenarioConfig {
    config.disorder = DisorderSpec {
        kind,
        s: DEFAULT_WIDTH,
        n_realizations: REALIZATIONS,
        seed: DEFAULT_SEED,
        per_cavity_independent: true,
    };
    config.grid.time = grid(WINDOW, COARSE_STEP);
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names() {
        let names: Vec<String> = catalog().into_iter().map(|p| p.name).collect();
        let mut expected = Vec::new();
        for (fig, panels) in [("fig1", "abcd"), ("fig2", "abcdef"), ("fig3", "ab"), ("fig4", "ab"), ("fig5", "ab"), ("fig6", "ab")] {
            for p in panels.chars() {
                expected.push(format!("{fig}{p}"));
            }
        }
        assert_eq!(names, expected);
    }

    #[test]
    fn caption_parameters() {
        for p in catalog() {
            for c in &p.curves {
                assert_eq!(c.config.initial.alpha, PI / 6.0);
                if let Some(d) = c.config.drive {
                    let expected = if p.name.starts_with("fig4") { 0.04 } else { 0.01 };
                    assert_eq!(d.epsilon, expected, "{}", p.name);
                }
                if p.name.starts_with("fig5") || p.name.starts_with("fig6") {
                    assert_eq!(c.config.disorder.n_realizations, 1000);
                }
                assert!(c.config.model.is_multiphoton_resonant());
            }
        }
        let orders = |name: &str| -> Vec<u32> { find(name).unwrap().curves.iter().map(|c| c.config.model.n_photon).collect() };
        assert_eq!(orders("fig2e"), vec![2; 5]);
        assert_eq!(orders("fig2f"), vec![3; 5]);
        assert_eq!(find("fig1b").unwrap().curves[0].config.model.g_a, 0.9);
        assert_eq!(find("fig5a").unwrap().curves[0].config.disorder.kind, DisorderKind::Uniform);
        assert_eq!(find("fig6b").unwrap().curves[0].config.disorder.kind, DisorderKind::Gaussian);
    }

    #[test]
    fn unprinted_values_are_flagged() {
        for p in catalog() {
            let has_noise = p.curves.iter().any(|c| c.config.noise != NoiseRates::clean());
            let flagged = p.notes.iter().any(|n| n.contains(PLACEHOLDER));
            assert_eq!(has_noise || p.curves[0].config.is_disordered(), flagged, "{}", p.name);
        }
    }

    #[test]
    fn resolve_selects_and_overrides() {
        let p = find("fig1a").unwrap();
        let all = p.resolve(None, &[]).unwrap();
        assert_eq!(all.len(), 5);
        let one = p.resolve(Some("kappa"), &["noise.kappa=0.1".into()]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].1.config.noise.kappa_a, 0.1);
        assert_eq!(one[0].1.config.output.name, "fig1a_kappa");
        assert!(p.resolve(Some("nope"), &[]).is_err());
    }
}
