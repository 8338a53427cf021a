use std::path::Path;
use std::process::{Command, Output};

use gamma_models::io::{self, TupleDocument};
use gamma_models::models::DilationModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma-models"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_is_byte_stable() {
    let a = run(&["--seed", "7", "gen", "random_commuting", "--n", "3", "--dim", "3"]);
    let b = run(&["--seed", "7", "gen", "random_commuting", "--n", "3", "--dim", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "8", "gen", "random_commuting", "--n", "3", "--dim", "3"]);
    assert_ne!(a.stdout, c.stdout);

    // Parse and re-emit reproduces the bytes.
    let text = String::from_utf8(a.stdout).unwrap();
    let doc: TupleDocument = io::from_str(&text).unwrap();
    assert_eq!(io::to_string(&doc).unwrap(), text.trim_end());
}

#[test]
fn scalar_gen_and_certify() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let out = run(&["gen", "scalar", "--z", "0.5,0 0.5,0", p(&t)]);
    assert!(out.status.success());
    let doc: TupleDocument = io::read_file(&t).unwrap();
    assert_eq!(doc.n, 2);
    assert_eq!(doc.matrices[0][(0, 0)].re, 1.0);
    assert_eq!(doc.matrices[1][(0, 0)].re, 0.25);

    let out = run(&["certify", p(&t)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["label"], "contraction");
}

#[test]
fn dilate_factorize_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let sc = dir.path().join("sc.json");
    let dg = dir.path().join("dg.json");
    let fx = dir.path().join("fx.json");
    assert!(run(&["gen", "scalar", "--z", "0.4,0.1 -0.3,0.2", p(&t)]).status.success());

    let out = run(&["--degree", "5", "dilate", p(&t), p(&sc), "--kind", "schaffer"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["--degree", "40", "--grid", "81", "dilate", p(&t), p(&dg), "--kind", "douglas"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let m: DilationModel = io::read_file(&sc).unwrap();
    assert!(m.report.passed());

    let out = run(&["--degree", "5", "verify", p(&sc), p(&t)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    let out = run(&["factorize", p(&dg), p(&sc), p(&fx)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["report", p(&fx)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("isometry"));
    assert!(text.trim_end().ends_with("overall: pass"));
}

#[test]
fn library_error_exit_code_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    assert!(run(&["gen", "scalar", "--z", "0.5,0 0.5,0", p(&t)]).status.success());
    let out = run(&["wold", p(&t)]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "not_an_isometry");
    assert_eq!(err["code"], 14);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["dilate"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "nonsense"]).status.code(), Some(2));
}

#[test]
fn outside_point_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    assert!(run(&["gen", "scalar", "--z", "1.02,0 0.1,0", p(&t)]).status.success());
    let out = run(&["certify", p(&t)]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "spectrum_outside_domain");
}

#[test]
fn grid_too_small_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    assert!(run(&["gen", "scalar", "--z", "0.5,0 0.5,0", p(&t)]).status.success());
    let out = run(&["--degree", "16", "--grid", "20", "dilate", p(&t), "--kind", "nf"]);
    assert_eq!(out.status.code(), Some(3));
}
