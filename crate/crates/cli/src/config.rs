//! TOML scenario documents.
//!
//! A document has a top-level `seed` and the sections `model`, `noise`,
//! `disorder`, `drive`, `initial`, `grid` and `output`. Every section except
//! `initial` and `grid` may be omitted. Unknown keys are rejected, and value
//! checks run during deserialization so that errors carry the line of the
//! offending key.
//!
//! Frequencies are read in any unit and normalized so that `g_b = 1`; the
//! final time is already expressed in periods `2π/G_B` and is left alone.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use djc_core::disorder::{DisorderKind, DisorderSpec};
use djc_core::lindblad::{NoiseRates, TimeGrid};
use djc_core::models::{
    resonant_pump_detuning, DriveParams, InitialCase, InitialStateSpec, ModelParams, ResonanceBranch,
};
use djc_core::scenario::{Route, Scenario};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("bad override `{0}`: expected key=value with a dotted key such as noise.kappa=0.1")]
    Override(String),
}

/// A parsed document with the warnings it raised.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub model: ModelParams,
    pub drive: Option<DriveParams>,
    pub noise: NoiseRates,
    pub disorder: DisorderSpec,
    pub initial: InitialStateSpec,
    pub grid: GridConfig,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub time: TimeGrid,
    pub cutoff: Option<usize>,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// File stem shared by the trace, events and manifest files.
    pub name: String,
    /// Also write the trace as JSON.
    pub json: bool,
}

impl ScenarioConfig {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            model: self.model,
            drive: self.drive,
            noise: self.noise,
            initial: self.initial,
            grid: self.grid.time,
            cutoff: self.grid.cutoff,
            route: self.grid.route,
        }
    }

    pub fn is_disordered(&self) -> bool {
        self.disorder.kind != DisorderKind::None
    }

    /// Canonical document; parsing it yields this configuration again.
    pub fn to_toml(&self) -> String {
        let doc = Document {
            seed: self.seed,
            model: RawModel {
                units: None,
                omega0: self.model.omega0,
                omega: self.model.omega,
                g_a: Positive(self.model.g_a),
                g_b: Positive(self.model.g_b),
                n_photon: self.model.n_photon,
            },
            noise: {
                let (kappa, kappa_a, kappa_b) = split_rate(self.noise.kappa_a, self.noise.kappa_b);
                let (gamma, gamma_a, gamma_b) = split_rate(self.noise.gamma_a, self.noise.gamma_b);
                let (gamma_phi, gamma_phi_a, gamma_phi_b) = split_rate(self.noise.gamma_phi_a, self.noise.gamma_phi_b);
                RawNoise {
                    kappa,
                    gamma,
                    gamma_phi,
                    kappa_a,
                    kappa_b,
                    gamma_a,
                    gamma_b,
                    gamma_phi_a,
                    gamma_phi_b,
                    n_th: Rate(self.noise.n_th),
                }
            },
            disorder: (self.disorder.kind != DisorderKind::None).then(|| RawDisorder {
                kind: self.disorder.kind,
                s: Some(Rate(self.disorder.s)),
                n_realizations: self.disorder.n_realizations,
                per_cavity_independent: self.disorder.per_cavity_independent,
            }),
            drive: self.drive.map(|d| RawDrive {
                epsilon: Rate(d.epsilon),
                chi: Angle(d.chi),
                m_order: d.m_order,
                delta_p: Detuning::Value(d.delta_p),
                branch: ResonanceBranch::default(),
            }),
            initial: RawInitial {
                alpha: Angle(self.initial.alpha),
                case: CaseName(self.initial.case),
            },
            grid: RawGrid {
                t_end: self.grid.time.t_end,
                n_samples: self.grid.time.n_samples,
                rtol: self.grid.time.rtol,
                atol: self.grid.time.atol,
                cutoff: self.grid.cutoff,
                route: self.grid.route,
            },
            output: RawOutput {
                dir: self.output.dir.clone(),
                name: self.output.name.clone(),
                json: self.output.json,
            },
        };
        toml::to_string(&doc).expect("configuration serializes")
    }
}

/// Equal rates print as the shared key, so that later shared overrides apply.
fn split_rate(a: f64, b: f64) -> (Option<Rate>, Option<Rate>, Option<Rate>) {
    if a == b {
        (Some(Rate(a)), None, None)
    } else {
        (None, Some(Rate(a)), Some(Rate(b)))
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml())
    }
}

/// Parses and resolves a document.
pub fn parse_config(text: &str) -> Result<Parsed, ConfigError> {
    let doc: Document = toml::from_str(text)?;
    resolve(doc)
}

/// Parses `text` after setting each dotted `key=value` override in it.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Parsed, ConfigError> {
    if overrides.is_empty() {
        return parse_config(text);
    }
    let mut table: toml::Table = text.parse()?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    parse_config(&toml::to_string(&table).expect("table serializes"))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| ConfigError::Override(item.into()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(item.into()));
    }
    let raw = raw.trim();
    // Bare words such as `gaussian` or `pi/6` are taken as strings.
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut node = table;
    for p in parents {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(item.into()))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn field_error(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.into(), reason: reason.into() }
}

fn resolve(doc: Document) -> Result<Parsed, ConfigError> {
    let mut warnings = Vec::new();
    let scale = doc.model.g_b.0;
    if let Some(units) = &doc.model.units {
        if units != "g_b" {
            return Err(field_error("model.units", format!("only `g_b` is supported, got `{units}`")));
        }
    }
    let model = ModelParams {
        omega0: doc.model.omega0 / scale,
        omega: doc.model.omega / scale,
        g_a: doc.model.g_a.0 / scale,
        g_b: 1.0,
        n_photon: doc.model.n_photon,
    };
    if model.n_photon < 1 {
        return Err(field_error("model.n_photon", "must be at least 1"));
    }
    if model.n_photon > 1 && !model.is_multiphoton_resonant() {
        warnings.push(format!(
            "model: omega0 = {} differs from n_photon * omega = {}; the multiphoton interaction is off resonance",
            model.omega0,
            model.n_photon as f64 * model.omega
        ));
    }

    let n = &doc.noise;
    let side = |shared: Option<Rate>, own: Option<Rate>| own.or(shared).map_or(0.0, |r| r.0) / scale;
    let noise = NoiseRates {
        kappa_a: side(n.kappa, n.kappa_a),
        kappa_b: side(n.kappa, n.kappa_b),
        gamma_a: side(n.gamma, n.gamma_a),
        gamma_b: side(n.gamma, n.gamma_b),
        gamma_phi_a: side(n.gamma_phi, n.gamma_phi_a),
        gamma_phi_b: side(n.gamma_phi, n.gamma_phi_b),
        n_th: n.n_th.0,
    };

    let drive = match doc.drive {
        None => None,
        Some(d) => {
            if d.m_order < 1 {
                return Err(field_error("drive.m_order", "must be at least 1"));
            }
            let delta_p = match d.delta_p {
                Detuning::Value(v) => v / scale,
                Detuning::Resonant => resonant_pump_detuning(model.n_photon, d.m_order, model.g_b, d.branch)
                    .map_err(|e| field_error("drive.delta_p", e.to_string()))?,
            };
            Some(DriveParams {
                epsilon: d.epsilon.0 / scale,
                chi: d.chi.0,
                m_order: d.m_order,
                delta_p,
            })
        }
    };

    let disorder = match doc.disorder {
        None => DisorderSpec { seed: doc.seed, ..DisorderSpec::none() },
        Some(d) => {
            let s = match (d.kind, d.s) {
                (DisorderKind::None, s) => s.map_or(0.0, |r| r.0),
                (_, Some(s)) => s.0,
                (kind, None) => {
                    return Err(field_error(
                        "disorder.s",
                        format!("`{}` disorder requires a width `s`", kind_name(kind)),
                    ))
                }
            };
            if d.n_realizations < 1 {
                return Err(field_error("disorder.n_realizations", "at least one realization is required"));
            }
            DisorderSpec {
                kind: d.kind,
                s,
                n_realizations: d.n_realizations,
                seed: doc.seed,
                per_cavity_independent: d.per_cavity_independent,
            }
        }
    };

    let g = &doc.grid;
    if !(g.t_end > 0.0 && g.t_end.is_finite()) {
        return Err(field_error("grid.t_end", format!("must be positive, got {}", g.t_end)));
    }
    if g.n_samples < 2 {
        return Err(field_error("grid.n_samples", "at least two samples are required"));
    }
    if !(g.rtol > 0.0 && g.atol > 0.0) {
        return Err(field_error("grid.rtol", "tolerances must be positive"));
    }
    if let Some(c) = g.cutoff {
        if c < 2 {
            return Err(field_error("grid.cutoff", "a cavity needs at least two Fock levels"));
        }
    }
    let grid = GridConfig {
        time: TimeGrid { t_end: g.t_end, n_samples: g.n_samples, rtol: g.rtol, atol: g.atol },
        cutoff: g.cutoff,
        route: g.route,
    };

    if doc.output.name.is_empty() || doc.output.name.contains(['/', '\\']) {
        return Err(field_error("output.name", "must be a nonempty file stem without separators"));
    }

    let config = ScenarioConfig {
        seed: doc.seed,
        model,
        drive,
        noise,
        disorder,
        initial: InitialStateSpec { alpha: doc.initial.alpha.0, case: doc.initial.case.0 },
        grid,
        output: OutputSpec { dir: doc.output.dir, name: doc.output.name, json: doc.output.json },
    };
    config.scenario().validate().map_err(|e| field_error("scenario", e.to_string()))?;
    Ok(Parsed { config, warnings })
}

fn kind_name(kind: DisorderKind) -> &'static str {
    match kind {
        DisorderKind::None => "none",
        DisorderKind::Gaussian => "gaussian",
        DisorderKind::Uniform => "uniform",
    }
}

/// Evaluates `[sign][coeff*]pi[/div]` or a plain number.
pub fn parse_angle(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().ok().filter(|d| *d != 0.0 && d.is_finite())?)),
        None => (body, None),
    };
    let coeff = match numer {
        "pi" | "π" => 1.0,
        _ => {
            let c = numer.strip_suffix("*pi").or_else(|| numer.strip_suffix("*π"))?;
            c.parse::<f64>().ok().filter(|c| c.is_finite())?
        }
    };
    Some(sign * coeff * PI / denom.unwrap_or(1.0))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disorder: Option<RawDisorder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    drive: Option<RawDrive>,
    initial: RawInitial,
    grid: RawGrid,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    /// Unit of the frequencies below; only `g_b` is recognised.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    units: Option<String>,
    #[serde(default = "one")]
    omega0: f64,
    #[serde(default = "one")]
    omega: f64,
    #[serde(default)]
    g_a: Positive,
    #[serde(default)]
    g_b: Positive,
    #[serde(default = "one_u32")]
    n_photon: u32,
}

impl Default for RawModel {
    fn default() -> Self {
        Self { units: None, omega0: 1.0, omega: 1.0, g_a: Positive(1.0), g_b: Positive(1.0), n_photon: 1 }
    }
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn default_realizations() -> usize {
    1000
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    /// Shorthand for both cavities; `kappa_a`/`kappa_b` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_phi: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa_a: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa_b: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_a: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_b: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_phi_a: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_phi_b: Option<Rate>,
    #[serde(default)]
    n_th: Rate,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisorder {
    kind: DisorderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<Rate>,
    #[serde(default = "default_realizations")]
    n_realizations: usize,
    #[serde(default = "yes")]
    per_cavity_independent: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    epsilon: Rate,
    #[serde(default)]
    chi: Angle,
    #[serde(default = "one_u32")]
    m_order: u32,
    #[serde(default)]
    delta_p: Detuning,
    /// Sign of the dressed-state resonance used when `delta_p = "resonant"`.
    #[serde(default, skip_serializing)]
    branch: ResonanceBranch,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    alpha: Angle,
    case: CaseName,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    /// Final time in periods 2π/G_B.
    t_end: f64,
    n_samples: usize,
    #[serde(default = "default_rtol")]
    rtol: f64,
    #[serde(default = "default_atol")]
    atol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
    #[serde(default)]
    route: Route,
}

fn default_rtol() -> f64 {
    TimeGrid::new(1.0, 2).rtol
}

fn default_atol() -> f64 {
    TimeGrid::new(1.0, 2).atol
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default = "default_name")]
    name: String,
    #[serde(default)]
    json: bool,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: default_dir(), name: default_name(), json: false }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_name() -> String {
    "trace".into()
}

/// Nonnegative finite number.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
struct Rate(f64);

impl TryFrom<f64> for Rate {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        if v >= 0.0 && v.is_finite() {
            Ok(Self(v))
        } else {
            Err(format!("expected a nonnegative number, got {v}"))
        }
    }
}

impl From<Rate> for f64 {
    fn from(r: Rate) -> f64 {
        r.0
    }
}

/// Strictly positive finite number.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
struct Positive(f64);

impl Default for Positive {
    fn default() -> Self {
        Self(1.0)
    }
}

impl TryFrom<f64> for Positive {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        if v > 0.0 && v.is_finite() {
            Ok(Self(v))
        } else {
            Err(format!("expected a positive number, got {v}"))
        }
    }
}

impl From<Positive> for f64 {
    fn from(r: Positive) -> f64 {
        r.0
    }
}

/// Radians, written as a number or as an expression like `"pi/6"`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(try_from = "AngleRepr", into = "f64")]
struct Angle(f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Number(f64),
    Integer(i64),
    Text(String),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = String;
    fn try_from(r: AngleRepr) -> Result<Self, String> {
        match r {
            AngleRepr::Number(v) if v.is_finite() => Ok(Self(v)),
            AngleRepr::Number(v) => Err(format!("angle must be finite, got {v}")),
            AngleRepr::Integer(v) => Ok(Self(v as f64)),
            AngleRepr::Text(t) => parse_angle(&t)
                .map(Self)
                .ok_or_else(|| format!("cannot read angle `{t}`; use a number or a form like \"pi/6\"")),
        }
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Pump detuning: a number or `"resonant"`.
#[derive(Debug, Clone, Copy, Default)]
enum Detuning {
    #[default]
    Resonant,
    Value(f64),
}

impl Serialize for Detuning {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Detuning::Resonant => s.serialize_str("resonant"),
            Detuning::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Detuning {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match AngleRepr::deserialize(d)? {
            AngleRepr::Number(v) if v.is_finite() => Ok(Detuning::Value(v)),
            AngleRepr::Integer(v) => Ok(Detuning::Value(v as f64)),
            AngleRepr::Text(t) if t == "resonant" => Ok(Detuning::Resonant),
            _ => Err(serde::de::Error::custom("expected a finite number or \"resonant\"")),
        }
    }
}

/// Initial atomic state, by name or by the case numeral.
#[derive(Debug, Clone, Copy)]
struct CaseName(InitialCase);

impl Serialize for CaseName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CaseName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.as_str() {
            "no_sudden_death" | "i" => Ok(Self(InitialCase::NoSuddenDeath)),
            "sudden_death" | "ii" => Ok(Self(InitialCase::SuddenDeath)),
            other => Err(serde::de::Error::custom(format!(
                "unknown initial case `{other}`; expected `no_sudden_death` (i) or `sudden_death` (ii)"
            ))),
        }
    }
}
