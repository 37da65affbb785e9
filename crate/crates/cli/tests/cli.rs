//! End-to-end runs of the `freeact` binary: exit codes, report shape, and
//! the build → verify round trip on a persisted pair file.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn orbits_passes_with_stable_report() {
    let a = run(&["orbits", "--oracle", "randomgraph", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let text = stdout(&a);
    assert!(text.starts_with("REPORT/1 command=orbits"));
    assert!(text.contains("check orbits-n2 pass"));
    assert!(text.contains("result pass"));
    let b = run(&["orbits", "--oracle", "randomgraph", "--seed", "42"]);
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("timing"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&text), strip(&stdout(&b)));
}

#[test]
fn unknown_oracle_is_a_usage_error() {
    let out = run(&["orbits", "--oracle", "octonion"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_without_pair_is_a_usage_error() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_then_verify_reproduces_certification_lines() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.fp");
    let pair = pair.to_str().unwrap();
    let built = run(&[
        "build", "--oracle", "pureset", "--rounds", "2", "--rmax", "3", "--out", pair,
    ]);
    assert_eq!(built.status.code(), Some(0), "{}", stdout(&built));
    let verified = run(&[
        "verify", "--oracle", "pureset", "--rounds", "2", "--rmax", "3", "--pair", pair,
    ]);
    assert_eq!(verified.status.code(), Some(0), "{}", stdout(&verified));
    let checks = |s: &str| {
        s.lines()
            .filter(|l| l.starts_with("check ") && !l.starts_with("check persisted"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(checks(&stdout(&built)), checks(&stdout(&verified)));
}

#[test]
fn corrupt_pair_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fp");
    std::fs::write(&path, "FREEPAIR/9 nonsense\n").unwrap();
    let out = run(&["verify", "--pair", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectra_small_run_passes() {
    let out = run(&["spectra", "--rmax", "4", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("check displacement pass"));
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[run]\noracle=pureset\nseed=5\nlevel=6\n").unwrap();
    let out = run(&["orbits", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("oracle=pureset"));
    assert!(text.contains("seed=9"));
    assert!(text.contains("level=6"));
}
