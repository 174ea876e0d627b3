use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn procova(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procova")).args(args).output().unwrap()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> (PathBuf, String) {
    let p = tmp.path().join(name);
    let s = p.display().to_string();
    (p, s)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn curves_anchor_row() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "curves");
    let o = procova(&["curves", "--config", &fixture("ad_design.toml"), "--vr", "0,0.15", "--n", "500:1500:10", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("power_curve.csv")).unwrap();
    assert!(csv.starts_with("n,power_vr_0,power_vr_0.15\n"));
    let row = csv.lines().find(|l| l.starts_with("1000,")).unwrap();
    let p: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((p - 0.94).abs() <= 0.005, "{row}");
    assert_eq!(files_in(&dir), ["fraction_curve.csv", "manifest.json", "power_curve.csv"]);
}

#[test]
fn evaluate_reproduces_phase2_row() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "eval");
    let cohort = format!("Phase 2={}", fixture("phase_2.csv"));
    let o = procova(&["evaluate", "--cohort", &cohort, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("evaluation.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "Phase 2,CDR-SB,18,453,0.0,15.9,15.9"), "{csv}");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evaluate");
    assert!(manifest.get("master_seed").is_none());
    let digest = manifest["inputs"][fixture("phase_2.csv")].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 2);
}

#[test]
fn simulate_embeds_seed_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let (dir, out) = out_dir(&tmp, &format!("sim{k}"));
        let o = procova(&["simulate", "--config", &fixture("ad_zero_benefit.toml"), "--seed", "99", "--reps", "1000", "--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report = std::fs::read_to_string(dir.join("simulation.json")).unwrap();
        let manifest = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(v["master_seed"], 99);
        assert_eq!(v["replications"], 1000);
        assert!(manifest.contains("\"master_seed\": 99"));
        texts.push((report, manifest));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn design_reports_reduction_and_floor() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "design");
    let o = procova(&["design", "--config", &fixture("ad_design.toml"), "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("design.json")).unwrap()).unwrap();
    let e = &v["endpoints"][0];
    assert_eq!(e["sizes_before"]["n_total"], 1000);
    assert_eq!(e["sizes_after"]["n_total"], 900);
    assert!((e["floor_power_after"].as_f64().unwrap() - 0.868).abs() < 0.001);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "x");
    for args in [
        vec!["simulate", "--config", &fixture("ad_zero_benefit.toml"), "--out", &out],
        vec!["design", "--config", &fixture("ad_design.toml"), "--out", &out, "--frobnicate"],
        vec!["curves", "--n", "1500:500:10", "--out", &out],
        vec!["design", "--config", "/nonexistent/d.toml", "--out", &out],
        vec!["evaluate", "--cohort", &fixture("phase_2.csv"), "--method", "randomization", "--out", &out],
        vec!["bogus"],
    ] {
        let o = procova(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert!(!dir.exists());
}

#[test]
fn help_exits_0() {
    let o = procova(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}

#[test]
fn data_errors_exit_3_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "x");
    let csv = tmp.path().join("dup.csv");
    std::fs::write(&csv, "participant_id,score_cdr_18,outcome_cdr_18\nA,1,2\nB,2,3\nA,3,5\n").unwrap();
    let o = procova(&["evaluate", "--cohort", &csv.display().to_string(), "--out", &out]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains('A') && stderr(&o).contains("line 4"), "{}", stderr(&o));

    std::fs::write(&csv, "participant_id,score_cdr_18,outcome_cdr_18\nA,1,two\n").unwrap();
    let o = procova(&["evaluate", "--cohort", &csv.display().to_string(), "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 2") && stderr(&o).contains("outcome_cdr_18"), "{}", stderr(&o));

    let cfg = tmp.path().join("typo.toml");
    std::fs::write(&cfg, "calibrate_total = 1000\nassumed_vr = 0.1\ntarget_powr = 0.9\n").unwrap();
    let o = procova(&["design", "--config", &cfg.display().to_string(), "--out", &out]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.exists());
}

#[test]
fn computation_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "x");
    let o = procova(&["simulate", "--config", &fixture("ad_zero_benefit.toml"), "--seed", "1", "--reps", "10", "--out", &out]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!stderr(&o).is_empty());
    assert!(!dir.exists());
}

#[test]
fn report_writes_only_declared_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = out_dir(&tmp, "report");
    let o = procova(&[
        "report",
        "--config",
        &fixture("ad_report.toml"),
        "--evaluations",
        &fixture("published_evaluations.csv"),
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files_in(&dir), ["manifest.json", "report.json", "report.md"]);
    assert_eq!(files_in(tmp.path()), ["report"]);
    let md = std::fs::read_to_string(dir.join("report.md")).unwrap();
    assert!(md.contains("| 0.0% | 0.900000 | 0.867949 |"), "{md}");
}
