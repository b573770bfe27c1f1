use std::fs;
use std::path::Path;
use std::process::Command;

use qsde_sim::cli::{parse_trajectory_csv, RunConfig};
use qsde_sim::{run_master, AtomState};

const REFERENCE: &str = r#"{"kappa":1,"omega":0,"Omega":12,"T":4,"N":400,"n_slices":4,"runs":2000,"seed":3}"#;

fn qsde(dir: &Path, args: &[&str]) -> std::process::Output {
    let cfg = dir.join("cfg.json");
    if !cfg.exists() {
        fs::write(&cfg, REFERENCE).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_qsde-sim"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn master_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsde(dir.path(), &["master"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_trajectory_csv(&fs::read_to_string(dir.path().join("master.csv")).unwrap()).unwrap();
    let cfg = RunConfig::from_json(REFERENCE).unwrap();
    let traj = run_master(&cfg.params, 400, AtomState::ground()).unwrap();
    assert_eq!(rows.len(), 401);
    for ((t, e), (t2, e2)) in rows.iter().zip(traj.times().iter().zip(traj.expectations())) {
        assert!((t - t2).abs() < 1e-11);
        for a in 0..3 {
            assert!((e[a] - e2[a]).abs() < 1e-11);
        }
    }
    assert!(dir.path().join("plot_master.py").exists());
}

#[test]
fn filters_need_a_matching_record() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qsde(dir.path(), &["filter-counting", "--record", "0010"]).status.success());
    assert!(dir.path().join("filter_counting_0010.csv").exists());
    assert!(qsde(dir.path(), &["filter-homodyne", "--record", "+-++"]).status.success());
    assert!(dir.path().join("filter_homodyne_pmpp.csv").exists());
    assert!(!qsde(dir.path(), &["filter-homodyne", "--record", "0010"]).status.success());
    assert!(!qsde(dir.path(), &["filter-counting"]).status.success());
}

#[test]
fn qasm_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(qsde(a.path(), &["emit-qasm"]).status.success());
    assert!(qsde(b.path(), &["emit-qasm"]).status.success());
    let qa = fs::read_to_string(a.path().join("chain_zz.qasm")).unwrap();
    let qb = fs::read_to_string(b.path().join("chain_zz.qasm")).unwrap();
    assert_eq!(qa, qb);
    assert!(qa.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
    assert_eq!(qa.matches("cu3(").count(), 4);
    assert!(qa.contains("measure q[4] -> c[4];"));

    assert!(qsde(a.path(), &["emit-qasm", "--decompose-cry"]).status.success());
    let qd = fs::read_to_string(a.path().join("chain_zz.qasm")).unwrap();
    assert!(!qd.contains("cu3("));
    assert!(qd.contains("ry(0.1) q[0];") && qd.contains("ry(-0.1) q[0];"));
}

#[test]
fn sample_is_seed_deterministic_and_compare_passes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(qsde(a.path(), &["sample"]).status.success());
    assert!(qsde(b.path(), &["sample"]).status.success());
    let csv = fs::read_to_string(a.path().join("sample.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.path().join("sample.csv")).unwrap());
    assert!(csv.starts_with("field_basis,record,step,axis,count,mean,stderr\n"));

    assert!(qsde(b.path(), &["sample", "--seed", "4"]).status.success());
    assert_ne!(csv, fs::read_to_string(b.path().join("sample.csv")).unwrap());

    let out = qsde(a.path(), &["compare"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("compare_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(a.path().join("plot_compare_z.py").exists());
}

#[test]
fn compare_fails_on_an_impossible_threshold() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"kappa":1,"omega":0,"Omega":12,"lambda2":0.16,"runs":2000,"z_threshold":1e-6,"basis":"z"}"#,
    )
    .unwrap();
    let out = qsde(dir.path(), &["compare"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"kappa":-1,"omega":0,"Omega":12,"lambda2":0.16}"#).unwrap();
    let out = qsde(dir.path(), &["master"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn limits_reports_the_target_triple() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qsde(dir.path(), &["limits"]).status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("limits.json")).unwrap()).unwrap();
    assert!(v["max_error_vs_target"].as_f64().unwrap() < 1e-3);
}

#[test]
fn deterministic_case_scores_zero_on_z() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"kappa":0,"omega":0,"Omega":0,"lambda2":0.16,"runs":500,"min_count":1}"#,
    )
    .unwrap();
    assert!(qsde(dir.path(), &["compare"]).status.success());
    let csv = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let z_rows: Vec<&str> = csv.lines().filter(|l| l.split(',').nth(4) == Some("z") && !l.ends_with(",nan")).collect();
    assert!(!z_rows.is_empty());
    for row in z_rows {
        assert!(row.ends_with(",0.00000000000e0"), "{row}");
    }
}
