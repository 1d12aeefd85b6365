use std::path::Path;
use std::process::{Command, Output};

fn noslip(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noslip"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NOSLIP_OUT_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const DISC: &str = "mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradius = 1.0\n[inertia]\ngamma = 0.7071067811865476\n[initial]\nx = [0.1, 0.2]\nu = [1.0, 0.3]\nspin = [0.2]\n[run]\nn_events = 20\n";

#[test]
fn simulate_writes_trace_whose_header_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disc.toml"), DISC).unwrap();
    let out = noslip(&["--out", "a", "simulate", "disc.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(dir.path().join("a/disc.csv")).unwrap();
    assert_eq!(first.lines().filter(|l| !l.starts_with('#')).count(), 1 + 21);
    let out = noslip(&["--out", "b", "simulate", "a/disc.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("b/disc.csv")).unwrap(), first);
}

#[test]
fn check_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disc.toml"), DISC).unwrap();
    let out = noslip(&["--seedless", "check", "disc.toml"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("involution (n=4)"));
    assert!(noslip(&["--out", ".", "simulate", "disc.toml"], dir.path()).status.success());
    let out = noslip(&["plot", "disc.csv", "--x", "x1", "--y", "x2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(dir.path().join("disc.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn experiment_output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_noslip"))
        .args(["experiment", "limit-check"])
        .current_dir(dir.path())
        .env("NOSLIP_OUT_DIR", "env_out")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("env_out/limit-check_summary.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(noslip(&["simulate", "missing.toml"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.toml"), "mode = \"noslip\"\nwat = 3\n").unwrap();
    assert_eq!(noslip(&["simulate", "bad.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(noslip(&["experiment", "no-such-thing"], dir.path()).status.code(), Some(2));
    // a starting point outside the table cannot be simulated
    std::fs::write(dir.path().join("out.toml"), DISC.replace("x = [0.1, 0.2]", "x = [3.0, 0.0]")).unwrap();
    let code = noslip(&["simulate", "out.toml"], dir.path()).status.code();
    assert!(matches!(code, Some(2) | Some(3)), "{code:?}");
}
