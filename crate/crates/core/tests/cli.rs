//! Exit codes, config overrides, output files and reproducibility of the CLI.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    nodal_lab::cli::run(std::iter::once("nodal-lab").chain(args.iter().copied()).map(Into::into))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frequency", "--no-such-flag"]), 1);
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["tunnels", "--r", "abc"]), 1);
}

#[test]
fn precondition_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"p": "1/2", "unknown_key": 1}"#).unwrap();
    assert_eq!(run(&["tail-check", "--config", path_str(&cfg)]), 2);
    assert_eq!(run(&["frequency", "--field", "homogeneous:2:3", "--rmin", "2", "--rmax", "1"]), 2);
    assert_eq!(run(&["doubling", "--field", "no-such-preset", "--radius", "0.5"]), 2);
    assert_eq!(run(&["tail-check", "--p", "3/2"]), 2);
}

#[test]
fn budget_and_infeasibility_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let o = path_str(&out);
    assert_eq!(run(&["nodal-measure", "--field", "coordinate:3", "--max-cells", "10", "--out", o]), 3);
    assert_eq!(run(&["tunnels", "--field", "homogeneous:2:32", "--gate", "4", "--paper-constants", "--out", o]), 3);
    assert_eq!(run(&["subdivide-count", "--field", "homogeneous:2:4", "--budget", "10", "--out", o]), 3);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tail.json");
    let out = dir.path().join("tail-out.json");
    std::fs::write(&cfg, r#"{"p": "1/3", "kmax": 40}"#).unwrap();
    assert_eq!(run(&["tail-check", "--config", path_str(&cfg), "--kmax", "60", "--out", path_str(&out)]), 0);
    let v = read_json(&out);
    assert_eq!(v["command"], "tail-check");
    assert_eq!(v["config"]["p"], "1/3");
    assert_eq!(v["config"]["kmax"], 60);
    assert_eq!(v["config"]["epsilon"], 0.5);
    assert_eq!(v["result"]["verified"], true);
}

#[test]
fn resolved_config_reproduces_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let args = ["nodal-measure", "--field", "random:2:5:11", "--radius", "0.8", "--out", path_str(&first)];
    assert_eq!(run(&args), 0);
    let v = read_json(&first);
    assert_eq!(v["config"]["field"]["kind"], "harmonic-polynomial");
    let cfg = dir.path().join("resolved.json");
    std::fs::write(&cfg, serde_json::to_string(&v["config"]).unwrap()).unwrap();
    assert_eq!(run(&["nodal-measure", "--config", path_str(&cfg), "--out", path_str(&second)]), 0);
    let w = read_json(&second);
    assert_eq!(v["result"], w["result"]);
    assert_eq!(v["config"], w["config"]);
    assert_eq!(v["seed"], w["seed"]);
}

#[test]
fn csv_output_writes_a_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let args = ["frequency", "--field", "homogeneous:3:4", "--count", "5", "--out", path_str(&out)];
    assert_eq!(run(&args), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,H,beta"));
    for line in lines {
        let beta: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((beta - 5.0).abs() < 1e-9, "{line}");
    }
    let sidecar = read_json(&dir.path().join("profile.csv.json"));
    assert_eq!(sidecar["command"], "frequency");
    assert_eq!(sidecar["result"]["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn selftest_passes_and_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(run(&["selftest", "--seed", "3", "--format", "json", "--out", path_str(&a)]), 0);
    assert_eq!(run(&["selftest", "--seed", "3", "--format", "json", "--out", path_str(&b)]), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_json(&a)["result"]["all_passed"], true);
}

#[test]
fn sabotaged_selftest_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(run(&["selftest", "--sabotage", "quadrature-order1", "--out", path_str(&out)]), 3);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().any(|l| l.contains(",FAIL,")));
}

#[test]
fn binary_writes_json_to_stdout() {
    let out = Command::new(env!("CARGO_BIN_EXE_nodal-lab"))
        .args(["doubling", "--field", "homogeneous:2:4", "--radius", "0.5"])
        .env("NODAL_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "doubling");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("}\n"));
    assert_eq!(Command::new(env!("CARGO_BIN_EXE_nodal-lab")).arg("--bogus").status().unwrap().code(), Some(1));
}
