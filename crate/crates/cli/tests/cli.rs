use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jobcost_core::io::{load_problem, load_schedule, parse_schedule};
use jobcost_core::schedule::check_schedule;
use tempfile::TempDir;

fn jobcost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jobcost")).args(args).output().unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen_problem(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let p = path(dir, name);
    let mut args = vec!["gen", "problem", "--out", s(&p)];
    args.extend_from_slice(extra);
    let o = jobcost(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    p
}

#[test]
fn schedule_output_passes_check() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "4", "--workflows", "6"]);
    let out = path(&dir, "s.json");
    let o = jobcost(&["schedule", "--in", s(&problem), "--no-model", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("status=optimal"), "{}", stderr(&o));
    let vp = load_problem(&fs::read_to_string(&problem).unwrap()).unwrap();
    let sched = load_schedule(&fs::read_to_string(&out).unwrap(), &vp).unwrap();
    assert!(check_schedule(&vp, &sched).is_empty());
}

#[test]
fn oracle_and_schedule_agree_on_cost() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "11", "--workflows", "5", "--devices", "3"]);
    let a = jobcost(&["schedule", "--in", s(&problem)]);
    let b = jobcost(&["oracle", "--in", s(&problem)]);
    assert!(a.status.success() && b.status.success());
    let ca = parse_schedule(std::str::from_utf8(&a.stdout).unwrap()).unwrap().cost.total;
    let cb = parse_schedule(std::str::from_utf8(&b.stdout).unwrap()).unwrap().cost.total;
    assert!((ca - cb).abs() <= 1e-6, "{ca} vs {cb}");
}

#[test]
fn infeasible_problem_names_culprits() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "2", "--workflows", "3", "--density", "0"]);
    let text = fs::read_to_string(&problem).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let w = &mut doc["workflows"][1];
    let e = w["earliest_start"].as_f64().unwrap();
    w["deadline"] = (e + 1e-4).into();
    fs::write(&problem, serde_json::to_string(&doc).unwrap()).unwrap();
    for cmd in ["schedule", "oracle"] {
        let o = jobcost(&[cmd, "--in", s(&problem)]);
        assert_eq!(o.status.code(), Some(1), "{cmd}");
        assert!(stderr(&o).contains("`w1`"), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn no_model_requires_durations() {
    let dir = TempDir::new().unwrap();
    let problem = path(&dir, "p.json");
    fs::write(&problem, r#"{"format_version": 1, "workflows": [], "devices": [], "configs": []}"#).unwrap();
    let o = jobcost(&["schedule", "--in", s(&problem), "--no-model"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no durations block"), "{}", stderr(&o));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jobcost(&["schedule"]).status.code(), Some(2));
    assert_eq!(jobcost(&["frobnicate"]).status.code(), Some(2));
    let bad = path(&dir, "bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = jobcost(&["validate", "--in", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
    let o = jobcost(&["validate", "--in", s(&path(&dir, "missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_problem_exits_1() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "1"]);
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&problem).unwrap()).unwrap();
    doc["workflows"][0]["predecessors"] = serde_json::json!(["w0"]);
    fs::write(&problem, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = jobcost(&["validate", "--in", s(&problem)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cycle"), "{}", stderr(&o));
}

#[test]
fn validate_summarizes() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "3", "--workflows", "4", "--devices", "2", "--configs", "2"]);
    let o = jobcost(&["validate", "--in", s(&problem)]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("valid: 4 workflows, 2 devices, 4 configs, 16 durations"), "{out}");
}

#[test]
fn train_predict_schedule_pipeline() {
    let dir = TempDir::new().unwrap();
    let records = path(&dir, "r.csv");
    let o = jobcost(&["gen", "records", "--n", "400", "--seed", "5", "--out", s(&records)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = path(&dir, "m.json");
    let o = jobcost(&["train", "--in", s(&records), "--alpha", "0.5", "--out", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("mae="));

    // Workflows borrow the static features of two generated jobs.
    let csv = fs::read_to_string(&records).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let mut features = String::from(header);
    features.push('\n');
    for (w, line) in ["w0", "w1"].iter().zip(lines.step_by(7)) {
        let rest = line.split_once(',').unwrap().1;
        features.push_str(&format!("{w},{rest}\n"));
    }
    let features_path = path(&dir, "f.csv");
    fs::write(&features_path, features).unwrap();

    let skeleton = path(&dir, "p.json");
    fs::write(
        &skeleton,
        r#"{"format_version": 1,
  "workflows": [
    {"id": "w0", "earliest_start": 0, "deadline": 1000, "predecessors": []},
    {"id": "w1", "earliest_start": 0, "deadline": 1000, "predecessors": ["w0"]}],
  "devices": [{"id": "d0", "base_rate": 1.0, "overflow_rate": 2.0, "prepurchased_hours": 0.5}],
  "configs": [
    {"device_id": "d0", "config_id": "small", "device_count": 1, "cpu_cores": 4, "memory_gb": 16},
    {"device_id": "d0", "config_id": "large", "device_count": 4, "cpu_cores": 4, "memory_gb": 16}]}"#,
    )
    .unwrap();
    let filled = path(&dir, "filled.json");
    let o = jobcost(&[
        "predict", "--in", s(&skeleton), "--model", s(&model), "--features", s(&features_path), "--out", s(&filled),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let vp = load_problem(&fs::read_to_string(&filled).unwrap()).unwrap();
    assert_eq!(vp.problem().durations.len(), 4);

    let a = jobcost(&["schedule", "--in", s(&filled)]);
    let b = jobcost(&["schedule", "--in", s(&skeleton), "--model", s(&model), "--features", s(&features_path)]);
    assert!(a.status.success() && b.status.success(), "{}", stderr(&b));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn model_and_no_model_conflict() {
    let o = jobcost(&["schedule", "--in", "p.json", "--no-model", "--model", "m.json", "--features", "f.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tune_writes_scores() {
    let dir = TempDir::new().unwrap();
    let records = path(&dir, "r.csv");
    assert!(jobcost(&["gen", "records", "--n", "200", "--out", s(&records)]).status.success());
    let o = jobcost(&["tune", "--in", s(&records), "--folds", "4", "--family", "lasso"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["tune"]["family"], "lasso");
    assert_eq!(doc["tune"]["folds"], 4);
    assert!(doc["tune"]["cv_score_by_alpha"].as_array().unwrap().len() > 4);
}

#[test]
fn report_from_run_log() {
    let dir = TempDir::new().unwrap();
    let problem = gen_problem(&dir, "p.json", &["--seed", "8", "--workflows", "3"]);
    let sched = jobcost(&["schedule", "--in", s(&problem)]);
    assert!(sched.status.success());
    let sdoc: serde_json::Value = serde_json::from_slice(&sched.stdout).unwrap();
    let pdoc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&problem).unwrap()).unwrap();
    let log = serde_json::json!({
        "format_version": 1,
        "problem": pdoc,
        "assignment": sdoc["assignment"],
        "jobs": [
            {"workflow_id": "w0", "status": "success"},
            {"workflow_id": "w1", "status": "recovered"},
            {"workflow_id": "w2", "status": "success"}
        ],
        "elapsed_s": 1.5
    });
    let log_path = path(&dir, "log.json");
    fs::write(&log_path, serde_json::to_string_pretty(&log).unwrap()).unwrap();
    let o = jobcost(&["report", "--in", s(&log_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"throughput_jobs_per_s\": 2.000000"), "{text}");
    assert!(text.contains("\"reliability\": 1.000000"), "{text}");
    let r: serde_json::Value = serde_json::from_str(&text).unwrap();
    let (ic, fc) = (r["initial_cost"].as_f64().unwrap(), r["final_cost"].as_f64().unwrap());
    assert!((r["cost_change_rate"].as_f64().unwrap() - (ic - fc) / ic).abs() < 1e-5);
    assert!((fc - sdoc["cost"]["total"].as_f64().unwrap()).abs() < 1e-5);
}
