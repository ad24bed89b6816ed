//! The `traceloc` binary end to end on the bundled fixture.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture_conf;
use serde_json::Value;

fn traceloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traceloc")).args(args).output().expect("binary runs")
}

fn run_into(workdir: &Path, extra: &[&str]) -> Output {
    let conf = fixture_conf();
    let mut args = vec!["run", "--config", conf.to_str().unwrap(), "--workdir", workdir.to_str().unwrap()];
    args.extend_from_slice(extra);
    traceloc(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_reports_for_every_composer() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("report.json"));
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 10);
    for r in reports {
        let agg = r["aggregates"].as_object().unwrap();
        let keys: Vec<&str> = agg.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5, "{keys:?}");
        for m in ["MAP", "MRR", "Top1", "Top5", "Top10"] {
            let v = agg[m].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("PROJECT,MAP,MRR,Top1,Top5,Top10\ndemo,"));
    assert!(csv.lines().last().unwrap().starts_with("Average,"));
    let manifest = read_json(&dir.path().join("run_manifest.json"));
    assert_eq!(manifest["seed"], 42);
    assert!(manifest["input_hashes"]["issues"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(manifest["history_audit"]["violations"], 0);
    for f in ["ingest_summary.json", "features.csv", "scores_trace.csv", "scores_history.csv", "scores_structure.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // no temp files left behind by atomic writes
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn leaky_history_cutoff_needs_explicit_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--bugcache-cutoff", "resolved", "--composer", "fixed_weight"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-leakage"));
    assert!(!dir.path().join("report.json").exists());
    let ok = run_into(dir.path(), &["--bugcache-cutoff", "resolved", "--allow-leakage", "--composer", "fixed_weight"]);
    assert!(ok.status.success());
    let manifest = read_json(&dir.path().join("run_manifest.json"));
    assert_eq!(manifest["history_audit"]["leakage_allowed"], true);
}

#[test]
fn same_seed_gives_identical_rankings() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_into(a.path(), &["--seed", "7"]).status.success());
    assert!(run_into(b.path(), &["--seed", "7"]).status.success());
    let mut compared = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name().to_string_lossy().into_owned();
        if name.starts_with("rankings_") || name.starts_with("scores_") || name == "features.csv" || name == "report.json" {
            assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name}");
            compared += 1;
        }
    }
    assert_eq!(compared, 10 + 3 + 2);
}

#[test]
fn staged_commands_reproduce_a_full_run() {
    let (full, staged) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_into(full.path(), &[]).status.success());
    let conf = fixture_conf();
    let (c, w) = (conf.to_str().unwrap(), staged.path().to_str().unwrap());
    for args in [
        vec!["ingest", "--config", c, "--workdir", w],
        vec!["score", "trace", "history", "structure", "--config", c, "--workdir", w],
        vec!["fuse", "--config", c, "--workdir", w],
        vec!["evaluate", "--config", c, "--workdir", w],
    ] {
        let out = traceloc(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["report.json", "rankings_fixed_weight.csv", "rankings_rf.csv"] {
        assert_eq!(std::fs::read(full.path().join(f)).unwrap(), std::fs::read(staged.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn fuse_without_scores_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = fixture_conf();
    let out = traceloc(&["fuse", "--config", conf.to_str().unwrap(), "--workdir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_values_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_into(dir.path(), &["--composer", "median"]).status.code(), Some(1));
    let missing = traceloc(&["run", "--config", dir.path().join("nope.conf").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

fn fake_report(dir: &Path, project: &str, map: f64) -> String {
    let report = serde_json::json!({
        "project": project,
        "notes": [],
        "reports": [{
            "project": project,
            "composer": "fixed_weight",
            "bug_count": 10,
            "excluded_empty_truth": [],
            "no_relevant_retrieved": [],
            "aggregates": {"MAP": map, "MRR": map + 0.1, "Top1": map, "Top5": map + 0.2, "Top10": map + 0.3},
            "per_bug": []
        }]
    });
    let path = dir.join(format!("{project}_{map}.json"));
    std::fs::write(&path, report.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compare_runs_paired_tests_and_checks_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let left: Vec<String> = [("a", 0.1), ("b", 0.2), ("c", 0.3)].iter().map(|(p, m)| fake_report(d, p, *m)).collect();
    let right: Vec<String> = [("a", 0.2), ("b", 0.4), ("c", 0.6)].iter().map(|(p, m)| fake_report(d, p, *m)).collect();
    let mut args = vec!["compare", "--left"];
    args.extend(left.iter().map(String::as_str));
    args.push("--right");
    args.extend(right.iter().map(String::as_str));
    let out = traceloc(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "metric,test,statistic,p_value,projects,status");
    // differences 0.1, 0.2, 0.3 on MAP
    let map: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(map[0], "MAP");
    assert!((map[2].parse::<f64>().unwrap() + 3.4641016).abs() < 1e-4);
    assert!((map[3].parse::<f64>().unwrap() - 0.0742).abs() < 1e-3);
    args.extend(["--test", "ks"]);
    let ks = traceloc(&args);
    assert!(String::from_utf8_lossy(&ks.stdout).contains(",exact"));
    let two = traceloc(&["compare", "--left", &left[0], &left[1], "--right", &right[0], &right[1]]);
    assert_eq!(two.status.code(), Some(2));
}

#[test]
fn report_merges_projects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = fake_report(d, "alpha", 0.25);
    let b = fake_report(d, "beta", 0.5);
    let out_path = d.join("table.csv");
    let out = traceloc(&["report", &a, &b, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.contains("alpha,0.250,"));
    assert!(table.contains("Average,0.375,"));
}
