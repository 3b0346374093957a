use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pmelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmelab"))
        .args(args)
        .current_dir(dir)
        .env_remove("PMELAB_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = r#"
name = "small"
[mesh]
half_width = 4.0
cells = 64
[initial]
kind = "gaussian_bump"
center = 0.5
width = 0.4
mass = 1.0
[time]
horizon = 1.0
output_count = 11
[checks]
run = ["mass", "envelope", "contraction", "comparison", "scaling"]
"#;

#[test]
fn lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmelab(&["list-presets"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["gaussian_reference", "subexp_alpha1", "double_well", "peaked_L1_only", "contraction_pair", "cascade_demo"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn run_writes_both_tables_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let first = pmelab(&["run", "small.toml", "--out", "a"], dir.path());
    assert!(first.status.success(), "{}", stdout(&first));
    let second = pmelab(&["run", "small.toml", "--out", "b"], dir.path());
    assert!(second.status.success());

    let summary = fs::read_to_string(dir.path().join("a/small/summary.csv")).unwrap();
    assert!(summary.starts_with("check,status,measured,bound,slack\n"), "{summary}");
    assert_eq!(summary.lines().count(), 6);
    assert!(summary.lines().skip(1).all(|l| l.contains(",pass,")), "{summary}");

    let traj = fs::read_to_string(dir.path().join("a/small/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 12);
    for file in ["summary.csv", "trajectory.csv"] {
        let a = fs::read(dir.path().join("a/small").join(file)).unwrap();
        let b = fs::read(dir.path().join("b/small").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pmelab"))
        .args(["preset", "stationary"])
        .current_dir(dir.path())
        .env("PMELAB_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(dir.path().join("from_env/stationary/summary.csv").exists());
}

#[test]
fn printed_preset_config_runs_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let printed = pmelab(&["preset", "stationary", "--print-config"], dir.path());
    assert!(printed.status.success());
    fs::write(dir.path().join("s.toml"), printed.stdout).unwrap();
    let out = pmelab(&["run", "s.toml", "--out", "."], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(dir.path().join("stationary/trajectory.csv").exists());
}

#[test]
fn unstable_step_fails_with_a_stability_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
name = "unstable"
[mesh]
half_width = 5.0
cells = 256
[solver]
cfl_safety = 5.0
[initial]
kind = "gaussian_bump"
center = 0.0
width = 0.5
mass = 1.0
[time]
horizon = 1.0
output_count = 3
"#;
    fs::write(dir.path().join("u.toml"), cfg).unwrap();
    let out = pmelab(&["run", "u.toml", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    let summary = fs::read_to_string(dir.path().join("unstable/summary.csv")).unwrap();
    assert!(summary.contains("solver_stability,fail"), "{summary}");
    assert!(summary.contains("mass,skipped"), "{summary}");
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[model]\nbeta = 0.5\np = 1.2\n").unwrap();
    let out = pmelab(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.p"));

    let out = pmelab(&["preset", "no_such_preset"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poincare_check_passes_on_random_vectors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = pmelab(&["check-poincare", "small.toml", "--samples", "50"], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}
