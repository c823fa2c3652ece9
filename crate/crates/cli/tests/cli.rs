use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn avplan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avplan"))
        .current_dir(dir)
        .args(args)
        .env("AVPLAN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const SMALL: &str = r#"{
  "seed": 11,
  "windows": { "tau_h": 365, "tau_d": 365 },
  "requirement": { "m0": 0.035, "m1": 0.045 },
  "mileage": { "x_t": 0.21, "x_d": 0.21 },
  "grid": { "n_t": [2, 5], "tau_t": { "min": 10, "max": 120, "step": 10 }, "c_max": 12 },
  "constraints": { "alpha_c": 0.5 },
  "priority": { "kind": "max_pr_threshold", "threshold": 0.5 },
  "mcmc": { "burn_in": 1000, "thin": 2, "chains": 2, "target_acceptance": 0.3 },
  "n_post": 200,
  "simulation": { "theta": [230.0, 0.01, 0.8], "units": 10, "daily_miles": 0.21 },
  "paths": { "out": "run" }
}"#;

fn setup(config: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, config).unwrap();
    (dir, path)
}

fn pipeline(dir: &Path) {
    for cmd in ["simulate", "fit", "plan"] {
        let o = avplan(dir, &[cmd, "--config", "config.json"]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("run").join(name)).unwrap()
}

#[test]
fn pipeline_writes_consistent_outputs() {
    let (dir, _) = setup(SMALL);
    pipeline(dir.path());
    let results = read(dir.path(), "results.csv");
    let front = read(dir.path(), "front.csv");
    let header = "model,n_t,tau_t,c,tau_total,cr,pr,ap,feasible,on_front";
    assert_eq!(results.lines().next(), Some(header));
    assert_eq!(front.lines().next(), Some(header));
    assert_eq!(results.lines().count(), 1 + 2 * 12 * 13);

    // Every front row is a results row flagged on_front, and vice versa.
    let on_front: Vec<&str> = results
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",true,true"))
        .collect();
    let front_rows: Vec<&str> = front.lines().skip(1).collect();
    assert!(!front_rows.is_empty());
    assert_eq!(on_front.len(), front_rows.len());
    for row in &front_rows {
        assert!(on_front.contains(row), "{row} not flagged in results");
    }
    let selection: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "selection.json")).unwrap();
    assert!(selection["selected"]["pr"].as_f64().unwrap() <= 0.5);
    let fit: serde_json::Value = serde_json::from_str(&read(dir.path(), "fit.json")).unwrap();
    assert_eq!(fit["n_post"], 200);
    assert!(read(dir.path(), "draws.csv").starts_with('#'));
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let (dir, _) = setup(SMALL);
    pipeline(dir.path());
    let first = [
        read(dir.path(), "draws.csv"),
        read(dir.path(), "results.csv"),
    ];
    pipeline(dir.path());
    let second = [
        read(dir.path(), "draws.csv"),
        read(dir.path(), "results.csv"),
    ];
    assert_eq!(first, second);

    let o = avplan(
        dir.path(),
        &[
            "simulate",
            "--config",
            "config.json",
            "--seed",
            "12",
            "--out",
            "other",
        ],
    );
    assert_eq!(code(&o), 0);
    let a = std::fs::read(dir.path().join("run/events.csv")).unwrap();
    let b = std::fs::read(dir.path().join("other/events.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn report_summarizes_and_renders_svg() {
    let (dir, _) = setup(SMALL);
    pipeline(dir.path());
    let o = avplan(dir.path(), &["report", "--config", "config.json", "--svg"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("on the front"), "{stdout}");
    assert!(read(dir.path(), "front.svg").starts_with("<svg"));
}

#[test]
fn model_override_switches_model() {
    let config = SMALL.replace(
        r#""priority": { "kind": "max_pr_threshold", "threshold": 0.5 },"#,
        "",
    );
    let (dir, _) = setup(&config);
    pipeline(dir.path());
    let o = avplan(
        dir.path(),
        &[
            "plan",
            "--config",
            "config.json",
            "--model",
            "nhpp",
            "--out",
            "nhpp",
            "--draws",
            "run/draws.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let results = std::fs::read_to_string(dir.path().join("nhpp/results.csv")).unwrap();
    assert!(results.lines().skip(1).all(|l| l.starts_with("nhpp,")));
    let o = avplan(
        dir.path(),
        &["report", "--config", "config.json", "--out", "nhpp"],
    );
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("model nhpp:"));
    assert!(!dir.path().join("nhpp/selection.json").exists());
}

#[test]
fn usage_and_config_errors_exit_1() {
    let (dir, _) = setup(SMALL);
    assert_eq!(code(&avplan(dir.path(), &["--help"])), 0);
    assert_eq!(code(&avplan(dir.path(), &["frobnicate"])), 1);
    assert_eq!(
        code(&avplan(dir.path(), &["plan", "--model", "weibull"])),
        1
    );

    std::fs::write(dir.path().join("bad.json"), r#"{"seeed": 3}"#).unwrap();
    assert_eq!(
        code(&avplan(dir.path(), &["simulate", "--config", "bad.json"])),
        1
    );

    // `plan` needs the requirement section.
    std::fs::write(dir.path().join("bare.json"), "{}").unwrap();
    let o = avplan(dir.path(), &["plan", "--config", "bare.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("requirement"));

    let o = Command::new(env!("CARGO_BIN_EXE_avplan"))
        .current_dir(dir.path())
        .args(["simulate", "--config", "config.json"])
        .env("AVPLAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn data_errors_exit_2() {
    let (dir, _) = setup(SMALL);
    assert_eq!(
        code(&avplan(dir.path(), &["fit", "--config", "config.json"])),
        2
    );
    assert_eq!(
        code(&avplan(
            dir.path(),
            &["simulate", "--config", "missing.json"]
        )),
        2
    );

    std::fs::create_dir_all(dir.path().join("run")).unwrap();
    std::fs::write(
        dir.path().join("run/draws.csv"),
        "theta1,theta2,theta3\n1,-2,1\n",
    )
    .unwrap();
    let o = avplan(dir.path(), &["plan", "--config", "config.json"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));

    std::fs::write(dir.path().join("run/results.csv"), "not,a,results,file\n").unwrap();
    assert_eq!(
        code(&avplan(dir.path(), &["report", "--config", "config.json"])),
        2
    );
}

#[test]
fn infeasible_constraints_exit_3() {
    // A single draw whose field rate is far above m1 makes CR = 1 for every
    // plan that can pass.
    let config = SMALL.replace(r#""alpha_c": 0.5"#, r#""alpha_c": 0.2"#);
    let (dir, _) = setup(&config);
    std::fs::create_dir_all(dir.path().join("run")).unwrap();
    std::fs::write(
        dir.path().join("run/draws.csv"),
        "theta1,theta2,theta3\n500,0.001,1\n",
    )
    .unwrap();
    let o = avplan(dir.path(), &["plan", "--config", "config.json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha_c"));
    assert!(read(dir.path(), "results.csv").lines().count() > 1);
}
