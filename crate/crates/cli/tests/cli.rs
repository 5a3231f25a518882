use std::path::Path;
use std::process::{Command, Output};

const SCENARIO: &str = r#"
seed = 3
nodes = 2
power_rate = 100.0
[[phase]]
workload = "Boot"
duration = 60.0
[[phase]]
workload = "Idle"
duration = 20.0
[[phase]]
workload = "HPL"
duration = 20.0
[[thermal]]
node = "mc02"
shape = { kind = "ramp", from = 71.0, to = 107.0, span = 30.0, at = 50.0 }
"#;

fn oda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oda")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bundle(dir: &Path) -> String {
    let scenario = dir.join("s.toml");
    std::fs::write(&scenario, SCENARIO).unwrap();
    let out = dir.join("bundle");
    let o = oda(&["sim", "generate", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.to_str().unwrap().to_string()
}

#[test]
fn efficiency_and_scaling_text() {
    let o = oda(&["analyze", "efficiency", "--sustained", "12.65e9", "--nodes", "8"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("39.5%"), "{}", stdout(&o));
    let o = oda(&["analyze", "scaling", "--single", "1.86e9", "--multi", "12.65e9", "--nodes", "8"]);
    assert!(stdout(&o).contains("linear fraction: 85.0%"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(oda(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(oda(&["analyze", "efficiency"]).status.code(), Some(1));
    assert_eq!(oda(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_bundle_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    let o = oda(&["query", "--bundle", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundle_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let b = bundle(dir.path());

    let o = oda(&["query", "--bundle", &b, "--node", "mc03"]);
    assert_eq!(o.status.code(), Some(2), "unknown node is missing data");

    let o = oda(&["query", "--bundle", &b, "--node", "mc01", "--format", "csv"]);
    assert!(stdout(&o).lines().any(|l| l == "mc01,,power.core"), "{}", stdout(&o));

    let o = oda(&["report", "table5", "--bundle", &b, "--node", "mc01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("core")) && text.contains("Total"), "{text}");
    assert!(text.contains("R1") && text.contains("R2"), "{text}");

    let o = oda(&["analyze", "boot-decompose", "--bundle", &b, "--node", "mc01", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["decompositions"].as_array().is_some_and(|a| !a.is_empty()));

    let o = oda(&["analyze", "thermal", "--bundle", &b, "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.contains("mc02,cpu_temp,CRITICAL") || text.to_lowercase().contains("mc02,cpu_temp,critical"), "{text}");
    assert!(!text.contains("mc01"), "{text}");

    let svg = dir.path().join("core.svg");
    let o = oda(&["plot", "--bundle", &b, "--node", "mc01", "--metric", "power.core", "-o", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert!(svg.with_extension("csv").exists());
}

#[test]
fn replay_into_store_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let b = bundle(dir.path());
    let store = dir.path().join("store");
    let o = oda(&["sim", "replay", "--bundle", &b, "--speed", "inf", "--store", store.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = oda(&["query", "--store", store.to_str().unwrap(), "--node", "mc02", "--metric", "power.core", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pts: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(pts.len(), 100 * 100);
}
