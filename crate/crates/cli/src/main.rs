use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use djc_cli::config::{parse_config, ConfigError, Parsed};
use djc_cli::presets::{catalog, find};
use djc_cli::runner::{run, with_workers, workers_from_env, RunContext, RunError};

#[derive(Parser)]
#[command(name = "djc", version, about = "Entanglement dynamics of double Jaynes-Cummings systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Worker threads for disorder realizations (overrides DJC_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a figure preset, one output set per curve.
    Preset {
        name: String,
        /// Set a configuration key, e.g. `noise.kappa=0.1`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Run only the curve with this label.
        #[arg(long)]
        curve: Option<String>,
        /// Directory for the output files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Print the resolved scenario files instead of running them.
        #[arg(long)]
        print: bool,
    },
    /// List the figure presets and their curves.
    ListPresets {
        /// Also show which parameters are defaults rather than caption values.
        #[arg(long)]
        verbose: bool,
    },
    /// Check a scenario file and print it fully resolved.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_config(path: &PathBuf) -> Result<Parsed, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
    let parsed = parse_config(&text).map_err(|e| match e {
        ConfigError::Parse(p) => ConfigError::Field { field: path.display().to_string(), reason: p.to_string() },
        other => other,
    })?;
    warn(&parsed.warnings);
    Ok(parsed)
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>, RunError> {
    match flag {
        Some(0) => Err(ConfigError::Field { field: "--workers".into(), reason: "must be at least 1".into() }.into()),
        Some(n) => Ok(Some(n)),
        None => workers_from_env(),
    }
}

fn run_one(parsed: Parsed, context: RunContext) -> Result<(), RunError> {
    let config = parsed.config;
    let workers = context.workers;
    let report = with_workers(workers, || run(&config, &RunContext { warnings: parsed.warnings, ..context }))??;
    let n = report.output.events.len();
    let label = if report.output.stderr.is_some() { format!("{n} events in the average") } else { format!("{n} events") };
    println!("{} ({label}, {:.2} s)", report.files.trace.display(), report.wall_clock);
    Ok(())
}

fn dispatch(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run { config, workers } => {
            let parsed = read_config(&config)?;
            let workers = resolve_workers(workers)?;
            run_one(parsed, RunContext { workers, ..RunContext::default() })
        }
        Command::Preset { name, overrides, curve, out_dir, workers, print } => {
            let preset = find(&name).ok_or_else(|| {
                RunError::from(ConfigError::Field {
                    field: "preset".into(),
                    reason: format!("unknown preset `{name}`; see `djc list-presets`"),
                })
            })?;
            let mut overrides = overrides;
            if let Some(dir) = out_dir {
                overrides.push(format!("output.dir={:?}", dir.display().to_string()));
            }
            let curves = preset.resolve(curve.as_deref(), &overrides)?;
            if print {
                for (label, parsed) in &curves {
                    println!("# {name} / {label}\n{}", parsed.config);
                }
                return Ok(());
            }
            let workers = resolve_workers(workers)?;
            for (label, parsed) in curves {
                warn(&parsed.warnings);
                let context = RunContext {
                    preset: Some(name.clone()),
                    curve: Some(label),
                    workers,
                    ..RunContext::default()
                };
                run_one(parsed, context)?;
            }
            Ok(())
        }
        Command::ListPresets { verbose } => {
            for p in catalog() {
                let labels: Vec<&str> = p.curves.iter().map(|c| c.label.as_str()).collect();
                println!("{:<6} {} [{}]", p.name, p.summary, labels.join(", "));
                if verbose {
                    for note in &p.notes {
                        println!("       - {note}");
                    }
                }
            }
            Ok(())
        }
        Command::Validate { config } => {
            let parsed = read_config(&config)?;
            print!("{}", parsed.config);
            Ok(())
        }
    }
}
