//! Runs a resolved configuration and writes its trace, events and manifest.
//!
//! Simulation happens before any file is touched, so a failed run leaves no
//! partial output behind, and the manifest is written last: it exists only
//! for runs that completed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use djc_core::disorder::quenched_average;
use djc_core::entanglement::{detect_events, ConcurrenceTrace, EsdEvent, EsdKind, ESD_THRESHOLD};
use djc_core::lindblad::Diagnostics;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};

/// Environment variable holding the worker-pool size for disorder runs.
pub const WORKERS_ENV: &str = "DJC_WORKERS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Simulation(#[from] djc_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    fn root(&self) -> Option<&djc_core::Error> {
        let mut e = match self {
            RunError::Simulation(e) => e,
            _ => return None,
        };
        while let djc_core::Error::Realization { source, .. } = e {
            e = source;
        }
        Some(e)
    }

    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io { .. } => "io",
            RunError::Pool(_) => "internal",
            RunError::Simulation(_) => match self.root() {
                Some(djc_core::Error::Truncation { .. }) => "truncation",
                Some(djc_core::Error::Stiffness { .. }) => "integrator",
                Some(djc_core::Error::Validation(_)) => "validation",
                Some(djc_core::Error::InvalidParameter { .. } | djc_core::Error::InvalidDimension { .. }) => "config",
                _ => "internal",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "config" => 2,
            "truncation" => 3,
            "integrator" => 4,
            "validation" => 5,
            "io" => 6,
            _ => 70,
        }
    }

    /// What to change before trying again.
    pub fn hint(&self) -> Option<String> {
        match self.root() {
            Some(djc_core::Error::Truncation { suggested_cutoff, .. }) => Some(format!(
                "set grid.cutoff to {suggested_cutoff} or more, or remove it to let the cutoff be chosen and escalated automatically"
            )),
            Some(djc_core::Error::Stiffness { .. }) => {
                Some("lower the rates or the drive strength, or use a shorter grid.t_end".into())
            }
            Some(djc_core::Error::Validation(_)) => {
                Some("tighten grid.rtol and grid.atol; if it persists, use grid.route = \"full\" to cross-check".into())
            }
            _ => None,
        }
    }
}

/// Everything a completed simulation produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: ConcurrenceTrace,
    /// Standard error of the mean, for disorder averages.
    pub stderr: Option<Vec<f64>>,
    pub events: Vec<EsdEvent>,
    pub diagnostics: Diagnostics,
    /// Fock cutoff used, when a single simulation ran.
    pub cutoff: Option<usize>,
}

/// Labels recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub preset: Option<String>,
    pub curve: Option<String>,
    pub warnings: Vec<String>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Written {
    pub trace: PathBuf,
    pub events: PathBuf,
    pub manifest: PathBuf,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub output: RunOutput,
    pub files: Written,
    pub wall_clock: f64,
}

/// Simulates without writing anything.
pub fn execute(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let scenario = config.scenario();
    let (trace, stderr, diagnostics, cutoff) = if config.is_disordered() {
        let q = quenched_average(&scenario, &config.disorder)?;
        (q.mean, Some(q.stderr), q.diagnostics, None)
    } else {
        let sim = scenario.simulate()?;
        (sim.trace, None, sim.diagnostics, Some(sim.cutoff))
    };
    let events = detect_events(&trace, ESD_THRESHOLD)?;
    Ok(RunOutput { trace, stderr, events, diagnostics, cutoff })
}

pub fn paths(config: &ScenarioConfig) -> Written {
    let stem = |suffix: &str| config.output.dir.join(format!("{}{suffix}", config.output.name));
    Written {
        trace: stem(".csv"),
        events: stem(".events.csv"),
        manifest: stem(".manifest.json"),
        json: config.output.json.then(|| stem(".json")),
    }
}

/// Simulates, then writes the trace, events, optional JSON mirror and the manifest.
pub fn run(config: &ScenarioConfig, context: &RunContext) -> Result<Report, RunError> {
    let files = paths(config);
    match fs::remove_file(&files.manifest) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(io_error(&files.manifest, e)),
        _ => {}
    }
    let start = Instant::now();
    let output = execute(config)?;
    let wall_clock = start.elapsed().as_secs_f64();

    fs::create_dir_all(&config.output.dir).map_err(|e| io_error(&config.output.dir, e))?;
    write_file(&files.trace, |w| write_trace(w, &output.trace, output.stderr.as_deref()))?;
    write_file(&files.events, |w| write_events(w, &output.events))?;
    if let Some(path) = &files.json {
        write_file(path, |w| write_json(w, &output))?;
    }
    let manifest = Manifest::new(config, context, &output, &files, wall_clock);
    write_file(&files.manifest, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })?;
    Ok(Report { output, files, wall_clock })
}

fn io_error(path: &Path, source: io::Error) -> RunError {
    RunError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, body: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = io::BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

/// Fixed 17-significant-digit scientific notation.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace(w: &mut impl Write, trace: &ConcurrenceTrace, stderr: Option<&[f64]>) -> io::Result<()> {
    match stderr {
        Some(_) => writeln!(w, "t,scaled_time,concurrence,stderr")?,
        None => writeln!(w, "t,scaled_time,concurrence")?,
    }
    for k in 0..trace.len() {
        write!(w, "{},{},{}", num(trace.times[k]), num(trace.scaled_times[k]), num(trace.values[k]))?;
        match stderr {
            Some(se) => writeln!(w, ",{}", num(se[k]))?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

pub fn write_events(w: &mut impl Write, events: &[EsdEvent]) -> io::Result<()> {
    writeln!(w, "kind,time,scaled_time,pre_slope,post_slope")?;
    for e in events {
        let kind = match e.kind {
            EsdKind::Death => "death",
            EsdKind::Revival => "revival",
        };
        writeln!(w, "{kind},{},{},{},{}", num(e.time), num(e.scaled_time), num(e.pre_slope), num(e.post_slope))?;
    }
    Ok(())
}

fn write_json(w: &mut impl Write, output: &RunOutput) -> io::Result<()> {
    #[derive(Serialize)]
    struct Mirror<'a> {
        t: &'a [f64],
        scaled_time: &'a [f64],
        concurrence: &'a [f64],
        #[serde(skip_serializing_if = "Option::is_none")]
        stderr: Option<&'a [f64]>,
        scenario_hash: &'a str,
        seed: Option<u64>,
        realizations: usize,
    }
    let t = &output.trace;
    let mirror = Mirror {
        t: &t.times,
        scaled_time: &t.scaled_times,
        concurrence: &t.values,
        stderr: output.stderr.as_deref(),
        scenario_hash: &t.meta.scenario_hash,
        seed: t.meta.seed,
        realizations: t.meta.realizations,
    };
    serde_json::to_writer(&mut *w, &mirror)?;
    writeln!(w)
}

#[derive(Serialize)]
struct Software {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: Software,
    preset: Option<&'a str>,
    curve: Option<&'a str>,
    config: &'a ScenarioConfig,
    config_toml: String,
    scenario_hash: &'a str,
    seed: u64,
    realizations: usize,
    cutoff: Option<usize>,
    workers: Option<usize>,
    wall_clock_seconds: f64,
    finished_unix_seconds: u64,
    warnings: &'a [String],
    diagnostics: &'a Diagnostics,
    events: &'a [EsdEvent],
    files: ManifestFiles,
}

#[derive(Serialize)]
struct ManifestFiles {
    trace: PathBuf,
    events: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    json: Option<PathBuf>,
}

impl<'a> Manifest<'a> {
    fn new(
        config: &'a ScenarioConfig,
        context: &'a RunContext,
        output: &'a RunOutput,
        files: &Written,
        wall_clock: f64,
    ) -> Self {
        Self {
            software: Software { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
            preset: context.preset.as_deref(),
            curve: context.curve.as_deref(),
            config,
            config_toml: config.to_toml(),
            scenario_hash: &output.trace.meta.scenario_hash,
            seed: config.seed,
            realizations: output.trace.meta.realizations,
            cutoff: output.cutoff,
            workers: context.workers,
            wall_clock_seconds: wall_clock,
            finished_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            warnings: &context.warnings,
            diagnostics: &output.diagnostics,
            events: &output.events,
            files: ManifestFiles { trace: files.trace.clone(), events: files.events.clone(), json: files.json.clone() },
        }
    }
}

/// Pool size from the environment; unset means rayon's default.
pub fn workers_from_env() -> Result<Option<usize>, RunError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(RunError::Config(ConfigError::Field {
                field: WORKERS_ENV.into(),
                reason: format!("expected a positive integer, got `{v}`"),
            })),
        },
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn config(dir: &Path, extra: &str) -> ScenarioConfig {
        let text = format!(
            "{extra}\n[initial]\nalpha = \"pi/6\"\ncase = \"i\"\n[grid]\nt_end = 1.0\nn_samples = 101\n\
             [output]\ndir = {:?}\nname = \"unit\"\njson = true\n",
            dir.to_str().unwrap()
        );
        parse_config(&text).unwrap().config
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path(), "");
        let report = run(&c, &RunContext::default()).unwrap();
        let trace = fs::read_to_string(&report.files.trace).unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some("t,scaled_time,concurrence"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!((first[2] - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(trace.lines().count(), 102);
        assert_eq!(fs::read_to_string(&report.files.events).unwrap(), "kind,time,scaled_time,pre_slope,post_slope\n");
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report.files.manifest).unwrap()).unwrap();
        assert_eq!(manifest["software"]["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(manifest["cutoff"], 3);
        let mirror: serde_json::Value = serde_json::from_str(&fs::read_to_string(report.files.json.unwrap()).unwrap()).unwrap();
        assert_eq!(mirror["concurrence"].as_array().unwrap().len(), 101);
    }

    #[test]
    fn disordered_trace_has_stderr_column() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path(), "seed = 3\n[disorder]\nkind = \"uniform\"\ns = 0.5\nn_realizations = 4\n");
        let report = run(&c, &RunContext::default()).unwrap();
        let trace = fs::read_to_string(&report.files.trace).unwrap();
        assert!(trace.starts_with("t,scaled_time,concurrence,stderr\n"));
        assert!(trace.lines().nth(1).unwrap().split(',').count() == 4);
    }

    #[test]
    fn failed_run_leaves_no_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let good = config(dir.path(), "");
        let files = run(&good, &RunContext::default()).unwrap().files;
        assert!(files.manifest.exists());
        let mut bad = good.clone();
        bad.noise.n_th = 2.0;
        bad.noise.kappa_a = 0.5;
        bad.grid.cutoff = Some(3);
        let err = run(&bad, &RunContext::default()).unwrap_err();
        assert_eq!(err.category(), "truncation");
        assert_eq!(err.exit_code(), 3);
        assert!(err.hint().unwrap().contains("grid.cutoff"));
        assert!(!files.manifest.exists());
    }

    #[test]
    fn number_format_has_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
    }
}
