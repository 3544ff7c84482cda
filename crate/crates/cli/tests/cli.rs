use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/t1");

fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    for entry in fs::read_dir(FIXTURE).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    dir
}

fn shockgrid(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shockgrid"))
        .current_dir(cwd)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn run_writes_reports() {
    let dir = fixture();
    let out = shockgrid(dir.path(), &["run", "--config", "t1.conf"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("employment -0.218750"), "{stdout}");
    let json = fs::read_to_string(dir.path().join("out/aggregates.json")).unwrap();
    assert!(json.contains("\"value_added\": -0.175"));
}

#[test]
fn flag_overrides_apply() {
    let dir = fixture();
    let out = shockgrid(
        dir.path(),
        &[
            "run",
            "--config",
            "t1.conf",
            "--health-growth",
            "--consensus-threshold",
            "2",
            "--output-dir",
            "elsewhere",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = fs::read_to_string(dir.path().join("elsewhere/aggregates.json")).unwrap();
    assert!(json.contains("\"headline\": \"total_health\""));
    assert!(json.contains("\"consensus_threshold\": \"2\""));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn validate_prints_diagnostics() {
    let dir = fixture();
    let out = shockgrid(dir.path(), &["validate", "--config", "t1.conf"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"coverage\""), "{stdout}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn validation_failures_exit_2() {
    let dir = fixture();
    fs::write(
        dir.path().join("employment.csv"),
        "industry_code,occupation_code,employment\n",
    )
    .unwrap();
    let out = shockgrid(dir.path(), &["run", "--config", "t1.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());

    let out = shockgrid(dir.path(), &["validate", "--config", "missing.conf"]);
    assert_eq!(out.status.code(), Some(2));
    let out = shockgrid(dir.path(), &["run", "--config", "t1.conf", "--scenario", "nowhere.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = shockgrid(dir.path(), &["run"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn write_failures_exit_3() {
    let dir = fixture();
    fs::create_dir(dir.path().join("out")).unwrap();
    fs::write(dir.path().join("out/plotdata"), "").unwrap();
    let out = shockgrid(dir.path(), &["run", "--config", "t1.conf"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_writes_table() {
    let dir = fixture();
    let mut conf = fs::read_to_string(dir.path().join("t1.conf")).unwrap();
    conf.push_str("sweep_scenarios = cbo_severe, cbo_mild\nsweep_health_growth = false, true\n");
    fs::write(dir.path().join("t1.conf"), conf).unwrap();
    let out = shockgrid(dir.path(), &["sweep", "--config", "t1.conf"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("cbo_severe,false,3,total,ok,"));
}
