use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tdsr_cli::output::{read_ledger, read_snapshot};

const SMALL_AC: &str = r#"
[model]
kind = "allen-cahn"
epsilon_sq = 0.01
theta = 10

[domain]
type = "periodic"
length = "2pi"
nodes = 16

[time]
final_time = 0.2
order = 3
dt = 0.05
snapshots = [0.1, 0.2]

[initial]
type = "profile"
name = "sin2x-cos3y"
"#;

fn tdsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdsr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_ledger_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ac.toml", SMALL_AC);
    let out = dir.path().join("out");
    let o = tdsr(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_ledger(&out.join("ledger.csv")).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows
        .windows(2)
        .all(|w| w[1].modified_energy <= w[0].modified_energy + 1e-6));
    let (h, field) = read_snapshot(&out.join("snap_0001")).unwrap();
    assert_eq!((h.t, field.dim()), (0.2, (16, 16)));
    assert_eq!(h.model, "allen-cahn");
    assert!(out.join("config.toml").exists());
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ac.toml", SMALL_AC);
    let out = dir.path().join("out");
    let o = tdsr(&[
        "run",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--dt",
        "0.1",
        "--order",
        "1",
        "--theta",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_ledger(&out.join("ledger.csv")).unwrap().len(), 3);
    let echoed = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(
        echoed.contains("theta = 100.0") && echoed.contains("order = 1"),
        "{echoed}"
    );
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.toml", &SMALL_AC.replace("theta = 10", "thetta = 10"));
    let o = tdsr(&["run", &typo]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("did you mean `theta`"), "{}", stderr(&o));

    let bad = write(
        dir.path(),
        "bad.toml",
        &SMALL_AC
            .replace("order = 3", "order = 4")
            .replace("nodes = 16", "nodes = 7"),
    );
    let o = tdsr(&["run", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("time.order") && msg.contains("domain.nodes"), "{msg}");

    let o = tdsr(&["converge", &write(dir.path(), "nostudy.toml", SMALL_AC)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_4() {
    let o = tdsr(&["run", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solver_failure_exits_with_3_and_keeps_the_partial_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL_AC}\n[solver]\nmax_picard = 2\npicard_tol = 1e-12\n");
    let path = write(dir.path(), "fail.toml", &cfg);
    let out = dir.path().join("out");
    let o = tdsr(&["run", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(read_ledger(&out.join("ledger.csv")).unwrap().len(), 1);
}

#[test]
fn converge_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let study = format!("{SMALL_AC}\n[study]\nladder = [0.05, 0.025, 0.0125]\nreference_dt = 0.003125\n");
    let cfg = write(dir.path(), "study.toml", &study);
    let out = dir.path().join("out");
    let o = tdsr(&["converge", &cfg, "--out", out.to_str().unwrap(), "--order", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("fitted slopes"));
}

#[test]
fn coeffs_prints_weights() {
    let o = tdsr(&["coeffs", "--order", "2", "--dt", "0.5", "--symbol", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    // trapezoid rule at L = 0
    assert!(
        text.contains("0e0,-1,2.5000000000000000e-1,2.5000000000000000e-1"),
        "{text}"
    );
    assert_eq!(tdsr(&["coeffs", "--order", "5"]).status.code(), Some(2));
}

#[test]
fn presets_list_and_show() {
    let o = tdsr(&["presets", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ch-coarsening"));
    let o = tdsr(&["presets", "show", "pfc-crystallites", "--scale", "paper"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("nodes = 1024"));
    assert_eq!(tdsr(&["presets", "run", "nope"]).status.code(), Some(2));
}
