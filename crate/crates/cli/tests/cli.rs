use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gibbslab_core::group::{build_octagon, enumerate_orbit, EnumerationOptions};
use gibbslab_core::DiskPoint;
use serde_json::Value;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, command: &str, config: &Path, out: &str) -> Output {
        Command::new(env!("CARGO_BIN_EXE_gibbslab"))
            .args([command, "--config"])
            .arg(config)
            .arg("--out")
            .arg(self.path(out))
            .env("GIBBSLAB_CACHE_DIR", self.path("cache"))
            .output()
            .unwrap()
    }

    fn summary(&self, out: &str) -> Value {
        serde_json::from_slice(&fs::read(self.path(out).join("summary.json")).unwrap()).unwrap()
    }

    fn cache_csv(&self) -> PathBuf {
        fs::read_dir(self.path("cache"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|p| p.extension().is_some_and(|e| e == "csv"))
            .unwrap()
    }
}

fn summary_margin(ws: &Workspace, out: &str) -> f64 {
    let resolved: toml::Table = toml::from_str(&fs::read_to_string(ws.path(out).join("config.resolved.toml")).unwrap()).unwrap();
    resolved["orbit"]["prune_margin"].as_float().unwrap()
}

const SMALL: &str = "
seed = 5
orbit.radius = 6.0
orbit.orbit_point = [0.1, 0.05]
";

#[test]
fn enum_orbit_matches_direct_enumeration_and_is_idempotent() {
    let ws = Workspace::new();
    let cfg = ws.config("small.toml", SMALL);
    let out = ws.run("enum-orbit", &cfg, "run1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("built"));

    let direct = enumerate_orbit(
        &build_octagon(),
        DiskPoint::ORIGIN,
        DiskPoint::new(0.1, 0.05).unwrap(),
        6.0,
        EnumerationOptions {
            prune_margin: summary_margin(&ws, "run1"),
            ..Default::default()
        },
    )
    .unwrap();
    let summary = ws.summary("run1");
    assert_eq!(summary["orbit"]["points"].as_u64().unwrap() as usize, direct.len());
    let annuli = fs::read_to_string(ws.path("run1").join("annuli.csv")).unwrap();
    let counts: Vec<(i64, usize)> = annuli
        .lines()
        .skip(1)
        .map(|l| {
            let (n, c) = l.split_once(',').unwrap();
            (n.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    let expected: Vec<(i64, usize)> = direct.annuli().iter().map(|(n, v)| (*n, v.len())).collect();
    assert_eq!(counts, expected);
    assert_eq!(counts.iter().map(|c| c.1).sum::<usize>(), direct.len());

    let before = fs::read(ws.cache_csv()).unwrap();
    let again = ws.run("enum-orbit", &cfg, "run2");
    assert_eq!(again.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&again.stderr).contains("cache hit"));
    assert_eq!(fs::read(ws.cache_csv()).unwrap(), before);
    assert_eq!(ws.summary("run2")["orbit"]["cache_status"], "hit");
}

#[test]
fn truncated_cache_is_an_infrastructure_failure() {
    let ws = Workspace::new();
    let cfg = ws.config("small.toml", SMALL);
    assert_eq!(ws.run("enum-orbit", &cfg, "run1").status.code(), Some(0));
    let csv = ws.cache_csv();
    let bytes = fs::read(&csv).unwrap();
    fs::write(&csv, &bytes[..bytes.len() - 40]).unwrap();
    let out = ws.run("enum-orbit", &cfg, "run2");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
    assert_eq!(ws.summary("run2")["exit_code"], 3);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let ws = Workspace::new();
    let cfg = ws.config("bad.toml", "orbit.radiuss = 6.0\n");
    let out = ws.run("enum-orbit", &cfg, "run");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radiuss"));
    let out = Command::new(env!("CARGO_BIN_EXE_gibbslab"))
        .arg("no-such-command")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn json_config_is_accepted_and_resolved_config_is_written() {
    let ws = Workspace::new();
    let cfg = ws.config("small.json", r#"{"seed": 5, "orbit": {"radius": 6.0, "orbit_point": [0.1, 0.05]}}"#);
    let out = ws.run("enum-orbit", &cfg, "run");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let resolved = fs::read_to_string(ws.path("run").join("config.resolved.toml")).unwrap();
    // The default margin grows to cover the off-origin orbit point.
    assert!(resolved.contains("prune_margin = 2.9"), "{resolved}");
    assert!(resolved.contains("[delta]\nwindow = "), "{resolved}");
}

const DECAY: &str = "
orbit.radius = 12.0
flow.samples = 4
flow.horizon = 20.0
flow.t_grid = [2.0, 3.0, 4.0, 5.0]
measure.shell_width = 2.0
measure.sensitivity = [0.05]
";

#[test]
fn decay_experiment_is_deterministic_and_shift_invariant() {
    let ws = Workspace::new();
    let cfg = ws.config("zero.toml", DECAY);
    let a = ws.run("decay-experiment", &cfg, "a");
    assert!(matches!(a.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&a.stderr));
    let b = ws.run("decay-experiment", &cfg, "b");
    assert_eq!(a.status.code(), b.status.code());
    for name in ["decay.csv", "slopes.csv", "birkhoff.csv", "annuli.csv", "epsilon_sensitivity.csv"] {
        assert_eq!(
            fs::read(ws.path("a").join(name)).unwrap(),
            fs::read(ws.path("b").join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
    assert!(ws.path("a").join("decay_000.svg").exists());
    let summary = ws.summary("a");
    let names: Vec<&str> = summary["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["decay_slope", "birkhoff_spread", "lambda_agreement", "corollary"]);

    let shifted = ws.config("shifted.toml", &format!("{DECAY}potential.level = 0.3\n"));
    let c = ws.run("decay-experiment", &shifted, "c");
    assert_eq!(a.status.code(), c.status.code());
    let slopes = |dir: &str| -> Vec<f64> {
        ws.summary(dir)["decay"]["slopes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect()
    };
    for (x, y) in slopes("a").iter().zip(slopes("c")) {
        assert!((x - y).abs() < 1e-9);
    }
    let pa = ws.summary("a")["decay"]["predicted_slope"].as_f64().unwrap();
    let pc = ws.summary("c")["decay"]["predicted_slope"].as_f64().unwrap();
    assert!((pa - pc).abs() < 1e-9);
}

#[test]
fn lemma_checks_report_constants() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "lemmas.toml",
        "
orbit.radius = 12.0
measure.shell_width = 2.0
lemmas.cone_samples = 10
lemmas.max_shift = 0.0
lemmas.inclusion_samples = 200
lemmas.bounded_samples = 2
lemmas.bounded_t_grid = [2.0, 3.0, 4.0, 5.0]
",
    );
    let out = ws.run("lemma-checks", &cfg, "run");
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
    let s = ws.summary("run");
    assert_eq!(s["lemmas"]["k"], 1);
    assert!(s["lemmas"]["c_empirical"].as_f64().unwrap() > 0.01);
    let iterations = s["lemmas"]["north_south_iterations"].as_array().unwrap();
    assert_eq!(iterations.len(), 8);
    assert!(iterations.iter().all(|n| n.as_u64().unwrap() <= 50));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS cone_mass"));
    assert!(stdout.contains("PASS shadow_inclusion"));
    assert!(stdout.contains("PASS north_south"));
}

#[test]
fn estimate_delta_runs_the_shift_self_test() {
    let ws = Workspace::new();
    let cfg = ws.config("c.toml", "orbit.radius = 12.0\npotential.level = 0.3\ndelta.window = [5, 9]\n");
    let out = ws.run("estimate-delta", &cfg, "run");
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
    let s = ws.summary("run");
    let shift = s["shift_test"]["shift"].as_f64().unwrap();
    assert!((shift - 0.3).abs() < 0.02, "shift {shift}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS constant_shift"));
}

#[test]
fn locked_run_directory_is_refused() {
    let ws = Workspace::new();
    let cfg = ws.config("small.toml", SMALL);
    fs::create_dir_all(ws.path("run")).unwrap();
    fs::write(ws.path("run").join(".lock"), "1").unwrap();
    let out = ws.run("enum-orbit", &cfg, "run");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
}
