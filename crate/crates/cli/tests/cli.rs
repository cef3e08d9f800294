use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("docs/examples")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-lift")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = examples().join("crossed_product.json");
    let o = cli(&["run", cfg.to_str().unwrap(), "--window", "2,3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("crossed_product.csv")).unwrap();
    assert!(csv.starts_with("window,block,index,eigenvalue,multiplicity\n"));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("2,") || l.starts_with("3,")));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("crossed_product.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0]["entries"].as_array().unwrap().iter().all(|e| e["passed"] == true));
}

#[test]
fn custom_factor_system_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = examples().join("custom_factor_system.json");
    let o = cli(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write_config(dir.path(), "a.json", r#"{"kind":"quantum_torus","theta":{"mixed":0.1}}"#);
    let o = cli(&["run", &missing, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("windows"), "{}", stderr(&o));

    let wrong_size = write_config(
        dir.path(),
        "b.json",
        r#"{"kind":"crossed_product","base":{"diagonal":3},"automorphism":{"permutation":[1,2,0]},"d_b":{"diag":[1,2]},"windows":[1]}"#,
    );
    let o = cli(&["run", &wrong_size, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d_b"), "{}", stderr(&o));

    let cfg = examples().join("crossed_product.json");
    let o = cli(&["run", cfg.to_str().unwrap(), "--window", "3,2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("windows"));
}

#[test]
fn invalid_automorphism_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"kind":"crossed_product","base":{"diagonal":2},"automorphism":{"unitary":{"rows":[[1,1],[0,1]]}},"d_b":{"diag":[1,2]},"windows":[1]}"#,
    );
    let o = cli(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn a_too_tight_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = examples().join("quantum_torus.json");
    let o = cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--window",
        "1",
        "--tolerance",
        "1e-300",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("failed"), "{}", stderr(&o));
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = examples().join("quantum_torus.json");
    for d in [&a, &b] {
        let o = cli(&["run", cfg.to_str().unwrap(), "--window", "1", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["quantum_torus.csv", "quantum_torus.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn compare_reports_only_real_differences() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = examples().join("crossed_product.json");
    let o = cli(&["run", cfg.to_str().unwrap(), "--window", "3", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let baseline = dir.path().join("crossed_product.csv");

    let same = cli(&["compare", cfg.to_str().unwrap(), baseline.to_str().unwrap(), "--window", "3"]);
    assert_eq!(same.status.code(), Some(0), "{}", stderr(&same));
    assert_eq!(String::from_utf8_lossy(&same.stdout).lines().count(), 1);

    let perturbed = examples().join("crossed_product_perturbed.json");
    let moved = cli(&["compare", perturbed.to_str().unwrap(), baseline.to_str().unwrap(), "--window", "3"]);
    assert_eq!(moved.status.code(), Some(1));
    let text = String::from_utf8_lossy(&moved.stdout);
    assert!(text.lines().count() > 1);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 4));

    let bad = write_config(dir.path(), "bad.csv", "window,block\n1,x\n");
    let o = cli(&["compare", cfg.to_str().unwrap(), &bad, "--window", "3"]);
    assert_eq!(o.status.code(), Some(2));
}
