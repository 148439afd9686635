use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use djc_cli::config::parse_config;

fn djc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_djc")).args(args).current_dir(cwd).output().unwrap()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let parsed = parse_config(&fs::read_to_string(&path).unwrap());
        assert!(parsed.is_ok(), "{}: {:?}", path.display(), parsed.err());
    }
}

#[test]
fn run_writes_trace_events_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("pumped.toml");
    let out = djc(&["run", config.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["pumped.csv", "pumped.events.csv", "pumped.manifest.json"] {
        assert!(dir.path().join("out").join(file).exists(), "{file}");
    }
}

#[test]
fn validate_prints_resolved_document() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("gaussian_disorder.toml");
    let out = djc(&["validate", config.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap();
    let reparsed = parse_config(&printed).unwrap().config;
    assert_eq!(reparsed.disorder.n_realizations, 200);
    assert_eq!(reparsed.model.n_photon, 2);
}

#[test]
fn config_errors_exit_with_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[initial]\nalpha = 1\ncase = \"i\"\n[grid]\nt_end = 1\nn_samples = 11\nstep = 2\n").unwrap();
    let out = djc(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error [config]") && stderr.contains("step") && stderr.contains("line 7"), "{stderr}");
}

#[test]
fn truncation_exits_with_hint_and_no_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("leaky.toml");
    fs::write(
        &config,
        "[noise]\nkappa = 0.5\nn_th = 2.0\n[initial]\nalpha = \"pi/6\"\ncase = \"i\"\n\
         [grid]\nt_end = 1\nn_samples = 11\ncutoff = 3\n[output]\nname = \"leaky\"\n",
    )
    .unwrap();
    let out = djc(&["run", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("hint: set grid.cutoff"));
    assert!(!dir.path().join("leaky.manifest.json").exists());
    assert!(!dir.path().join("leaky.csv").exists());
}

#[test]
fn preset_curve_with_override_and_worker_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_djc"))
        .args(["preset", "fig1a", "--curve", "kappa", "--override", "grid.n_samples=101", "--out-dir", "res"])
        .env("DJC_WORKERS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.path().join("res/fig1a_kappa.manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(manifest["preset"], "fig1a");
    assert_eq!(manifest["workers"], 2);
    assert_eq!(manifest["config"]["grid"]["time"]["n_samples"], 101);

    let bad = Command::new(env!("CARGO_BIN_EXE_djc"))
        .args(["preset", "fig1a", "--curve", "kappa"])
        .env("DJC_WORKERS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn list_presets_shows_placeholders() {
    let dir = tempfile::tempdir().unwrap();
    let out = djc(&["list-presets", "--verbose"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("fig")).count(), 18);
    assert!(text.contains("published value unreadable"));
}
