use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const HAWKES: &str = r#"{"background": {"form": "constant", "mu": 1.0},
    "kernel": {"family": "exponential", "alpha": 0.5, "beta": 2.0},
    "link": {"link": "power", "eta": 1.0}}"#;

fn evopp(cmd: &str, config: &str, dir: &Path, out: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{out}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_evopp"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .args(extra)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn simulate_config(model: &str, horizon: f64) -> String {
    format!(r#"{{"seed": 5, "model": {model}, "simulation": {{"horizon": {horizon}}}}}"#)
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = simulate_config(HAWKES, 200.0);
    let a = evopp("simulate", &cfg, dir.path(), "a", &[]);
    let b = evopp("simulate", &cfg, dir.path(), "b", &[]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let pa = std::fs::read(dir.path().join("a/pattern.csv")).unwrap();
    let pb = std::fs::read(dir.path().join("b/pattern.csv")).unwrap();
    assert_eq!(pa, pb);
    let c = evopp("simulate", &cfg, dir.path(), "c", &["--seed", "6"]);
    assert_eq!(code(&c), 0);
    assert_ne!(pa, std::fs::read(dir.path().join("c/pattern.csv")).unwrap());
}

#[test]
fn fit_hpp_on_simulated_pattern() {
    let dir = TempDir::new().unwrap();
    let sim = evopp("simulate", &simulate_config(HAWKES, 100.0), dir.path(), "sim", &[]);
    assert_eq!(code(&sim), 0);
    let pattern = dir.path().join("sim/pattern.csv");
    let fit = format!(
        r#"{{"seed": 3, "preset": "hpp",
            "data": {{"source": "pattern", "path": {:?}}},
            "sampler": {{"n_iterations": 1500, "burn_in": 500}}}}"#,
        pattern.display().to_string()
    );
    let a = evopp("fit", &fit, dir.path(), "fa", &[]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = evopp("fit", &fit, dir.path(), "fb", &[]);
    assert_eq!(code(&b), 0);
    for f in ["draws.csv", "acceptance.csv"] {
        let da = std::fs::read(dir.path().join("fa").join(f)).unwrap();
        assert_eq!(da, std::fs::read(dir.path().join("fb").join(f)).unwrap(), "{f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fa/summary.json")).unwrap()).unwrap();
    assert!(summary.get("summary").is_some());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = evopp("simulate", r#"{"seed": 1, "colour": "red"}"#, dir.path(), "x", &[]);
    assert_eq!(code(&o), 2);
    let o = evopp("fit", r#"{"preset": "hpp"}"#, dir.path(), "y", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_or_bad_data_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let missing = r#"{"preset": "hpp", "data": {"source": "pattern", "path": "/nonexistent/p.csv"}}"#;
    assert_eq!(code(&evopp("fit", missing, dir.path(), "m", &[])), 3);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "# horizon: 10\ntime_hours\n1.0\nfoo\n").unwrap();
    let cfg = format!(
        r#"{{"preset": "hpp", "data": {{"source": "pattern", "path": {:?}}}}}"#,
        bad.display().to_string()
    );
    let o = evopp("fit", &cfg, dir.path(), "b", &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn explosive_simulation_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    let model = r#"{"background": {"form": "constant", "mu": 1.0},
        "kernel": {"family": "exponential", "alpha": 2.0, "beta": 1.0},
        "link": {"link": "exp"}}"#;
    let o = evopp("simulate", &simulate_config(model, 100.0), dir.path(), "x", &[]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}
