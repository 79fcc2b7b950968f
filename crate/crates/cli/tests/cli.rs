use std::path::Path;
use std::process::{Command, Output};

use lossy_walk_cli::{SweepRow, Table};

fn lossy_walk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossy-walk")).args(args).output().expect("spawn lossy-walk")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().next().expect("stderr record");
    serde_json::from_str(line).expect("JSON error record")
}

fn read_table(path: &Path) -> Table {
    Table::from_csv(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_one_row_per_cell_and_conserves() {
    let out = lossy_walk(&["simulate", "--v", "0.5"]);
    assert!(out.status.success());
    let table = Table::from_csv(&out.stdout).unwrap();
    assert_eq!(table.columns, ["m", "P_m"]);
    assert_eq!(table.rows.len(), 51);
    let sum: f64 = table.rows.iter().map(|r| r[1].as_f64().unwrap()).sum();
    let summary = stderr_json(&out);
    let residual = summary["residual"].as_f64().unwrap();
    assert!((sum + residual - 1.0).abs() <= 1e-6, "sum {sum} residual {residual}");
    assert!(table.rows[0][1].as_f64().unwrap() > 0.17);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let out = lossy_walk(&["sweep", "--L", "15", "--v-grid", "-0.6:0.6:0.1", "--workers", workers, "--output", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let table = read_table(&a);
    assert_eq!(table.rows.len(), 13);
    assert_eq!(table.columns, SweepRow::COLUMNS);
    let rows: Vec<SweepRow> = table.rows.iter().map(|r| SweepRow::from_cells(r).unwrap()).collect();
    let zero = rows.iter().find(|r| r.v == 0.0).unwrap();
    assert_eq!((zero.bloch_w, zero.nonbloch_w), (Some(1.0), Some(1)));
    assert!(zero.p_imb.unwrap().abs() < 1e-10);
    assert!(!dir.path().join("a.errors.csv").exists());
}

#[test]
fn failed_points_go_to_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let out = lossy_walk(&["winding", "--v-grid", "0:0.5:0.25", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let table = read_table(&path);
    assert_eq!(table.rows.len(), 3);
    let errors = read_table(&dir.path().join("w.errors.csv"));
    assert_eq!(errors.columns, ["v", "stage", "error", "message"]);
    assert_eq!(errors.rows.len(), 1);
    assert_eq!(errors.rows[0][0].as_f64(), Some(0.25));
}

#[test]
fn json_output_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"L": 9, "v": 0.9, "format": "json"}"#).unwrap();
    let out = lossy_walk(&["spectrum", "--config", cfg.to_str().unwrap(), "--v", "0.2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r["v"] == 0.2));
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["v", "re_E", "im_E", "abs_E", "edge_flag"]);
}

#[test]
fn bad_input_yields_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"L\": 9,\n  \"wat\": 1\n}\n").unwrap();
    let out = lossy_walk(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_json(&out);
    assert_eq!(rec["error"], "config");
    assert!(rec["at"].as_str().unwrap().ends_with(":3:7") || rec["at"].as_str().unwrap().contains(":3:"));

    let out = lossy_walk(&["simulate", "--gamma", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "config");

    let out = lossy_walk(&["sweep", "--v-grid", "1:0:0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_failure_exits_nonzero() {
    let out = lossy_walk(&["simulate", "--dt", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "dt_too_large");
}
