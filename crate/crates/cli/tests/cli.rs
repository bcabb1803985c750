use std::path::Path;
use std::process::{Command, Output};

use rsg_cli::RunSpec;

fn rsg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsg")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "problem.synth.n=40\nproblem.synth.d=4\nsolver.t=200\nsolver.stages=4\n";

#[test]
fn summary_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", &format!("{SMALL}solver.w0=gaussian\nsolver.seed=4\n"));
    let out = rsg(&["run", "--config", &cfg, "--out", "first"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("first/rsg.summary.json")).unwrap()).unwrap();
    let pairs: Vec<(String, String)> = summary["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
        .collect();
    let spec = RunSpec::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
    let cfg2 = write(dir.path(), "b.cfg", &spec.to_text());
    let out = rsg(&["run", "--config", &cfg2, "--out", "second"], dir.path());
    assert!(out.status.success());
    let a = std::fs::read(dir.path().join("first/rsg.trace.csv")).unwrap();
    let b = std::fs::read(dir.path().join("second/rsg.trace.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with(b"run_id,algo,stage,iter,cum_iter,objective,eta,wallclock_ns\r\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.cfg", "solver.nope=1\n");
    assert_eq!(rsg(&["run", "--config", &unknown], dir.path()).status.code(), Some(1));
    assert_eq!(rsg(&["run", "--bogus-flag"], dir.path()).status.code(), Some(1));

    let missing = write(dir.path(), "m.cfg", "problem.data=/nonexistent/file.libsvm\n");
    assert_eq!(rsg(&["run", "--config", &missing], dir.path()).status.code(), Some(2));

    let diverge = write(dir.path(), "d.cfg", &format!("{SMALL}solver.algo=sg\nsolver.eta=1e300\nsolver.iters=50\n"));
    let out = rsg(&["run", "--config", &diverge, "--out", "div"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("div/sg.trace.csv").exists());
}

#[test]
fn compare_requires_shared_problem() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.cfg", &format!("{SMALL}output.run_id=a\n"));
    let b = write(dir.path(), "b.cfg", &format!("{SMALL}output.run_id=b\nproblem.synth.seed=2\n"));
    let out = rsg(&["compare", "--config", &a, "--config", &b], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let dup = write(dir.path(), "c.cfg", &format!("{SMALL}output.run_id=a\nsolver.algo=r2sg\n"));
    assert_eq!(rsg(&["compare", "--config", &a, "--config", &dup], dir.path()).status.code(), Some(1));
}

#[test]
fn compare_writes_merged_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.cfg", &format!("{SMALL}output.run_id=rsg\n"));
    let b = write(dir.path(), "b.cfg", &format!("{SMALL}output.run_id=base\nsolver.algo=baseline_sg\nsolver.iters=800\n"));
    let out = rsg(&["compare", "--config", &a, "--config", &b, "--out", "cmp", "--threads", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let merged = std::fs::read_to_string(dir.path().join("cmp/compare.merged.csv")).unwrap();
    assert!(merged.starts_with("cum_iter,rsg,base\r\n0,"));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("cmp/compare.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 2);
    assert_eq!(summary["thresholds"].as_array().unwrap().len(), 5);
    assert!(dir.path().join("cmp/base.trace.csv").exists());
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsg(&["verify", "--suite", "prox"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
    assert_eq!(rsg(&["verify", "--suite", "nope"], dir.path()).status.code(), Some(1));
}
