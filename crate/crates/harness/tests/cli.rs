use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gaspace(args: &[&str], env_out: Option<&Path>, cwd: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaspace"));
    cmd.args(args).current_dir(cwd).env_remove("GASPACE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("GASPACE_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn summary(dir: &Path, kind: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{kind}.summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn census_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = gaspace(&["census", "--max-bits", "4", "--out", out.to_str().unwrap()], None, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out, "table1-census");
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["metrics"]["counts"]["oopp"], 0);
    assert!(out.join("table1-census.csv").exists());
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, s);
}

#[test]
fn run_subcommand_reads_config_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind": "ga-run", "seed": 1, "replicas": 1, "out": "from-config",
            "params": {"objective": {"name": "sphere", "dimension": 2},
                       "engine": {"population_size": 10, "max_generations": 15}}}"#,
    )
    .unwrap();
    let o = gaspace(&["run", cfg.to_str().unwrap(), "--seed", "5", "--replicas", "2"], None, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("from-config");
    let s = summary(&dir, "ga-run");
    assert_eq!((s["seed"].as_u64(), s["replicas"].as_u64()), (Some(5), Some(2)));
    let history: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("ga-run.history.json")).unwrap()).unwrap();
    let runs = history.as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs[0]["history"].as_array().unwrap().len() >= 2);
    assert!(runs[0]["best"]["chromosome"]["genes"].is_array());
}

#[test]
fn env_var_sets_default_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env");
    let o = gaspace(&["budget", "--bits", "6", "--runs", "5"], Some(&env_dir), tmp.path());
    assert!(o.status.success());
    assert!(env_dir.join("discrete-budget.csv").exists());

    let flag_dir = tmp.path().join("flag");
    let args = ["budget", "--bits", "6", "--runs", "5", "--out", flag_dir.to_str().unwrap()];
    assert!(gaspace(&args, Some(&env_dir), tmp.path()).status.success());
    assert!(flag_dir.join("discrete-budget.csv").exists());

    assert!(gaspace(&["census", "--max-bits", "3"], None, tmp.path()).status.success());
    assert!(tmp.path().join("gaspace-out/table1-census.csv").exists());
}

#[test]
fn game_reads_a_distribution_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dist = tmp.path().join("d.json");
    std::fs::write(&dist, "[[1, 0, 1.0]]").unwrap();
    let out = tmp.path().join("o");
    let args = [
        "game", "--distribution", dist.to_str().unwrap(), "--curve", "arctan-sequence",
        "--rounds", "1000", "--out", out.to_str().unwrap(),
    ];
    let o = gaspace(&args, None, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out, "guessgame");
    assert_eq!(s["metrics"]["by_curve"]["arctan-sequence"]["analytic"]["mean"], 0.625);
}

#[test]
fn sweep_passes_and_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = gaspace(&["sweep", "--triples", "500", "--out", out.to_str().unwrap()], None, tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&out, "conservation-sweep")["violations"], 0);

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "nope"}"#).unwrap();
    let o = gaspace(&["run", bad.to_str().unwrap()], None, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment"));

    std::fs::write(&bad, "[[1, 0, 0.5]]").unwrap();
    let args = ["game", "--distribution", bad.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(gaspace(&args, None, tmp.path()).status.code(), Some(2));
}

#[test]
fn list_names_every_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gaspace(&["list"], None, tmp.path());
    let text = String::from_utf8(o.stdout).unwrap();
    for kind in ["conservation-sweep", "table1-census", "guessgame", "selection-compare", "ga-run", "discrete-budget"] {
        assert!(text.contains(kind), "{kind} missing");
    }
}
