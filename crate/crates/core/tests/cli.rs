use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twsched(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twsched"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("TWSCHED_SEED")
        .output()
        .expect("binary runs")
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

const SMALL: [&str; 6] = ["--preset", "fig1-2-3", "--reps", "3", "--n-range", "1..4"];

#[test]
fn missing_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = twsched(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn empty_policy_list_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("o");
    let out = twsched(&["--preset", "custom", "--policies", ""], &target);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!target.exists());
}

#[test]
fn unknown_policy_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = twsched(
        &["--preset", "custom", "--policies", "ours,lottery"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_writes_its_figures_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = twsched(&SMALL, dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        listing(dir.path()),
        [
            "aggregate.csv",
            "fig1_makespan.svg",
            "fig2_greedy_minus_ours.svg",
            "fig3_tcd.svg",
            "results.csv"
        ]
    );
    let results = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    // header plus 4 sizes x 3 replications x 4 policies
    assert_eq!(results.lines().count(), 1 + 4 * 3 * 4);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert!(twsched(&SMALL, a.path()).status.success());
    assert!(twsched(&SMALL, b.path()).status.success());
    let mut other = SMALL.to_vec();
    other.extend(["--seed", "99"]);
    assert!(twsched(&other, c.path()).status.success());
    for name in listing(a.path()) {
        let x = fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(&name)).unwrap(), "{name}");
        if name == "results.csv" {
            assert_ne!(x, fs::read(c.path().join(&name)).unwrap());
        }
    }
}

#[test]
fn poisson_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = twsched(
        &[
            "--preset",
            "fig4-5-6-7",
            "--runs",
            "2",
            "--reps",
            "2",
            "--steps",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        listing(dir.path())
            .iter()
            .filter(|n| n.ends_with(".svg"))
            .count(),
        4
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = twsched(&SMALL, &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(1));
}
