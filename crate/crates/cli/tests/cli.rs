//! End-to-end runs of the `gibbsfree` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gibbsfree::acceptance::AcceptanceReport;

fn gibbsfree(out: &Path, args: &[&str]) -> Output {
    let output = Command::new(env!("CARGO_BIN_EXE_gibbsfree"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GIBBSFREE_THREADS")
        .output()
        .expect("binary runs");
    output
}

fn ok(out: &Path, args: &[&str]) {
    let o = gibbsfree(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn convergence_is_reproducible_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["convergence", "--function", "h", "--ns", "16,32,64"];
    ok(a.path(), &args);
    ok(b.path(), &["--threads", "2", "convergence", "--function", "h", "--ns", "16,32,64"]);
    for file in ["convergence.csv", "convergence.svg"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn convergence_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["convergence", "--ns", "16,32,64,128"]);
    assert_eq!(
        header(&dir.path().join("convergence.csv")),
        "N,error_standard,error_edge_true,error_edge_prony,error_edge_conc"
    );
    let svg = fs::read_to_string(dir.path().join("convergence.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(svg.contains(">N</text>") && svg.contains(">L2 error</text>"));
    assert!(svg.contains("standard (slope -0."));
}

#[test]
fn zero_function_skips_the_plot() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["convergence", "--function", "zero", "--ns", "16,32"]);
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "16,0.0,0.0,0.0,0.0");
    assert!(!dir.path().join("convergence.svg").exists());
}

#[test]
fn reconstruct1d_and_detect_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["reconstruct1d", "--band", "50"]);
    assert_eq!(header(&dir.path().join("reconstruct1d.csv")), "x,exact,standard,edge_true,edge_estimated");
    assert_eq!(header(&dir.path().join("jumps.csv")), "location,height");
    assert!(dir.path().join("reconstruct1d.svg").exists());

    ok(dir.path(), &["detect", "--ns", "50,100", "--detector", "conc"]);
    assert_eq!(header(&dir.path().join("jump_errors.csv")), "N,estimator,eps,delta");
    assert_eq!(header(&dir.path().join("concentration_sum.csv")), "x,value");
    let jumps = fs::read_to_string(dir.path().join("jumps.csv")).unwrap();
    assert_eq!(jumps.lines().count(), 7, "six jumps of h plus the header");

    ok(dir.path(), &["detect", "--band", "64", "--detector", "prony", "--prony-J", "6"]);
}

#[test]
fn noise_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["noise-sweep", "--ns", "50,100", "--trials", "3", "--snr-db", "70"]);
    let csv = fs::read_to_string(dir.path().join("noise_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "N,estimator,snr_db,mean_eps,mean_delta,skip_fraction");
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(dir.path().join("noise_sweep.svg").exists());
}

#[test]
fn recon2d_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["recon2d", "--function", "f1", "--band", "10", "--grid", "64"]);
    assert_eq!(header(&dir.path().join("recon2d_psnr.csv")), "method,psnr_db");
    let g2d = fs::read(dir.path().join("recon2d_proposed.g2d")).unwrap();
    assert_eq!(&g2d[..4], b"G2D1");
    assert_eq!(g2d.len(), 16 + 8 * 64 * 64);
    assert!(dir.path().join("recon2d_reference.pgm").exists());
}

#[test]
fn acceptance_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["acceptance", "--only", "1,8"]);
    let text = fs::read_to_string(dir.path().join("acceptance.json")).unwrap();
    let report: AcceptanceReport = serde_json::from_str(&text).unwrap();
    assert!(report.all_passed);
    assert_eq!(report.criteria.iter().map(|c| c.id).collect::<Vec<_>>(), [1, 8]);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap(), text);
}

#[test]
fn tampered_tolerance_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"acceptance": {"standard_slope": 0.5}}"#).unwrap();
    let o = gibbsfree(dir.path(), &["--config", cfg.to_str().unwrap(), "acceptance", "--only", "1,8"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion 1: FAIL"), "{stdout}");
    assert!(stdout.contains("criterion 8: PASS"), "{stdout}");
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gibbsfree(dir.path(), &["convergence", "--ns", "32,16"]).status.code(), Some(2));
    assert!(!gibbsfree(dir.path(), &["convergence", "--function", "nope"]).status.success());
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"bogus": true}"#).unwrap();
    assert_eq!(gibbsfree(dir.path(), &["--config", cfg.to_str().unwrap(), "convergence"]).status.code(), Some(2));
}
