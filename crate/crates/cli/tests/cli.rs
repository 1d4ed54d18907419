//! Exit codes and output contracts of the `tomita` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tomita"))
}

fn example(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bundled_inner_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(bin().args(["check", "-c", &example("inner_m2.json"), "-o"]).arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["labels"]["verdict"], "pass");
    assert_eq!(report["seed"], 20240611);
}

#[test]
fn broken_conjugation_fails_a_named_check() {
    let o = run(bin().args(["check", "-c", &example("broken_jmap.json"), "-o", "-"]));
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("derivation.conjugation_intertwining"), "{stderr}");
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .count();
    assert!(failing > 0);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ \"seed\": 1, ");
    assert_eq!(run(bin().arg("check").arg("-c").arg(&bad)).status.code(), Some(2));
    let no_seed = write(
        dir.path(),
        "noseed.json",
        r#"{ "algebra": {"blocks": [2]}, "derivation": {"kind": "eigen_inner"} }"#,
    );
    assert_eq!(run(bin().arg("check").arg("-c").arg(&no_seed)).status.code(), Some(2));
    assert_eq!(
        run(bin()
            .arg("check")
            .arg("-c")
            .arg(&no_seed)
            .args(["--seed", "4", "-o", "-"]))
        .status
        .code(),
        Some(0)
    );
    let neg = write(
        dir.path(),
        "neg.json",
        r#"{ "seed": 1, "algebra": {"blocks": [2]}, "derivation": {"kind": "eigen_inner"}, "tolerances": {"check": -1} }"#,
    );
    assert_eq!(run(bin().arg("check").arg("-c").arg(&neg)).status.code(), Some(2));
    assert_eq!(
        run(bin().args(["check", "-c", "/nonexistent.json"])).status.code(),
        Some(2)
    );
}

#[test]
fn solver_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.json",
        r#"{ "seed": 1, "algebra": {"blocks": [2]}, "state": {"diagonal": [0.9, 0.1]},
             "derivation": {"kind": "eigen_inner"}, "tolerances": {"max_iterations": 1} }"#,
    );
    let o = run(bin().arg("check").arg("-c").arg(&cfg).args(["-o", "-"]));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn time_zero_is_the_identity() {
    let o = run(bin().args(["semigroup", "-c", &example("inner_m2.json"), "--t-grid", "0", "-o", "-"]));
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,min_choi_eig,unitality_defect,symmetry_residual,energy\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows[0][2] <= 1e-12 && rows[0][3] <= 1e-12);
}

#[test]
fn cocycle_semigroup_is_positive_and_dissipative() {
    let o = run(bin().args([
        "semigroup",
        "-c",
        &example("cocycle_z2.json"),
        "--t-grid",
        "0:3:0.25",
        "-o",
        "-",
    ]));
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 13);
    for r in &rows {
        assert!(r[1] >= -1e-10, "{r:?}");
    }
    for w in rows.windows(2) {
        assert!(w[1][4] <= w[0][4] * (1.0 + 1e-12), "{w:?}");
    }
}

#[test]
fn empty_scan_is_header_only() {
    let o = run(bin().args(["scan-kms", "--dim", "2", "--trials", "0", "--seed", "3", "-o", "-"]));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "trial,label,min_choi_eig,dirichlet_margin\n"
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials=0"));
}

#[test]
fn scan_rejects_dimension_one() {
    let o = run(bin().args(["scan-kms", "--dim", "1", "--trials", "3", "--seed", "3", "-o", "-"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replayed_violation_keeps_its_label() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let o = run(bin()
        .args(["scan-kms", "--dim", "2", "--trials", "20", "--seed", "8", "-o"])
        .arg(&csv));
    assert_eq!(o.status.code(), Some(0));
    let dump_path = dir.path().join("scan.violations.json");
    let dump: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&dump_path).unwrap()).unwrap();
    let first = &dump["violations"][0];
    let trial = first["trial"].as_u64().unwrap();
    let o = run(bin().arg("replay").arg("-i").arg(&dump_path));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.contains(&format!("trial={trial} label=violating")), "{line}");
    let row = std::fs::read_to_string(&csv).unwrap();
    let min_choi = line.trim().rsplit('=').next().unwrap();
    assert!(row.contains(&format!("{trial},violating,{min_choi},")), "{line}");
}

#[test]
fn kms_and_crossed_examples_pass() {
    for name in ["kms_pauli.json", "crossed_z2.json", "cocycle_z2.json"] {
        let o = run(bin().args(["check", "-c", &example(name), "-o", "-"]));
        assert_eq!(
            o.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}
