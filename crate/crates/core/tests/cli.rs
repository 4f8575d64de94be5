use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sosverify(args: &[&str], report_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sosverify"));
    cmd.args(args).env_remove("SOSVERIFY_REPORT_DIR");
    if let Some(dir) = report_dir {
        cmd.env("SOSVERIFY_REPORT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("report written")).expect("valid JSON")
}

#[test]
fn classify_prints_the_stratum() {
    let out = sosverify(&["classify", "--k", "2", "--t", "0", "--x", "1,0", "--tau", "0", "--xi", "2,0"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Sigma2");

    let out = sosverify(&["classify", "--k", "3", "--t", "1/2", "--x", "1,0", "--tau", "0", "--xi", "-8,1"], None);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Sigma1");

    let out = sosverify(&["classify", "--k", "2", "--t", "0", "--x", "1,0", "--tau", "1", "--xi", "2,0"], None);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Noncharacteristic");
}

#[test]
fn classify_report_has_the_bracket_rank() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = sosverify(
        &["classify", "--k", "2", "--t", "0.5", "--x", "1,0", "--tau", "0", "--xi", "-4.0,1", "--out", path.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&path);
    assert_eq!(v["stratum"], "Sigma1");
    assert_eq!(v["arithmetic"], "exact");
    assert_eq!(v["symplectic"]["degenerate"], false);
}

#[test]
fn invalid_configuration_exits_two() {
    assert_eq!(sosverify(&["verify", "--k", "1"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["cutoff", "--n", "12"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["flow", "--a", "2", "--b", "1"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["flow", "--mu", "0"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["coeffs", "--format", "csv"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["classify", "--k", "2", "--t", "0", "--x", "0,0", "--tau", "0", "--xi", "0,0"], None).status.code(), Some(2));
    assert_eq!(sosverify(&["no-such-command"], None).status.code(), Some(2));
}

#[test]
fn verify_writes_a_passing_report_to_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = sosverify(&["verify", "--k", "2", "--pmax", "8"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["passed"], true);
    assert_eq!(v["total_residual_terms"], 0);
    for entry in v["x2_localized_power"]["entries"].as_array().unwrap() {
        assert_eq!(entry["residual_terms"], 0);
    }
    // no temp files left behind
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = sosverify(&["verify", "--k", "3", "--jmax", "5", "--pmax", "4", "--out", p.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn flow_csv_has_the_trajectory_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = sosverify(&["flow", "--t-end", "1", "--h", "0.01", "--format", "csv", "--out", "traj.csv"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "time,x1,x2,xi1,xi2,dot_x_xi,x_A_xi,norm_x");
    assert_eq!(lines.count(), 101);
}

#[test]
fn coarse_flow_step_is_a_verification_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let out = sosverify(&["flow", "--mu", "2", "--h", "0.01", "--t-end", "5", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let v = read_json(&path);
    assert_eq!(v["passed"], false);
    assert!(v["error"].as_str().unwrap().contains("Richardson"));
}

#[test]
fn cutoff_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cut.json");
    let out = sosverify(&["cutoff", "--n", "16", "--k", "2", "--out", json.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&json);
    assert_eq!(v["bands"].as_array().unwrap().len(), 4);
    assert_eq!(v["bands"][0]["d"], "1/4");
    assert_eq!(v["bound_check"].as_array().unwrap().len(), 9);
    assert!(v["C_measured"].as_f64().unwrap() > 0.0);

    let csv = dir.path().join("cut.csv");
    let out = sosverify(&["cutoff", "--n", "16", "--points", "11", "--orders", "3", "--format", "csv", "--out", csv.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,phi,phi_1,phi_2,phi_3");
    assert_eq!(lines.count(), 11);
}

#[test]
fn coeffs_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let out = sosverify(&["coeffs", "--jmax", "6", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&path);
    let table = serde_json::to_string(&v["table"]).unwrap();
    let parsed = sosverify::exactalg::CoeffTable::from_json(&table).unwrap();
    assert_eq!(parsed, sosverify::exactalg::a_table_recurrence(6));
}
