use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn radial(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_radial"));
    cmd.args(args).env_remove("RADIAL_OUT_DIR").env_remove("RADIAL_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    radial(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

const DEFAULT: [&str; 10] = ["-n", "3", "-p", "4", "-q", "4", "-a", "0.5", "-b", "0.5"];

fn solve_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve"];
    args.extend(DEFAULT);
    args.extend(["--k", "8"]);
    args.extend(extra);
    radial(&args).arg("--out-dir").arg(dir).output().expect("binary runs")
}

#[test]
fn check_accepts_default_instance() {
    let out = run(&["check", "-n", "3", "-p", "4", "-q", "4", "-a", "0.5", "-b", "0.5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("s=1 t=1"), "{text}");
    assert!(text.contains("(0.625, 1.375)"), "{text}");
}

#[test]
fn check_rejects_zero_weight() {
    assert_eq!(code(&run(&["check", "-n", "3", "-p", "4", "-q", "4", "-a", "0", "-b", "0"])), 1);
}

#[test]
fn check_covers_high_dimension() {
    let out = run(&["check", "-n", "6", "-p", "3", "-q", "3", "-a", "0.1", "-b", "0.1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("s=1 t=1"));
}

#[test]
fn parse_errors_exit_two() {
    assert_eq!(code(&run(&["check", "-n", "3", "-p", "four", "-q", "4", "-a", "0.5", "-b", "0.5"])), 2);
    assert_eq!(code(&run(&["check", "-n", "3"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.txt");
    fs::write(&path, "# default instance\nn = 3\np = 4\nq = 4\na = 0.5\nb = 0.5\n").unwrap();
    let from_file = run(&["check", "--config", path.to_str().unwrap()]);
    let from_flags = run(&["check", "-n", "3", "-p", "4", "-q", "4", "-a", "0.5", "-b", "0.5"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_flags.stdout);
    fs::write(&path, "n = 3\np = 4\n").unwrap();
    assert_eq!(code(&run(&["check", "--config", path.to_str().unwrap()])), 2);
}

#[test]
fn embed_check_exit_codes() {
    assert_eq!(code(&run(&["embed", "check", "-n", "3", "-s", "1", "-q", "4", "-c", "1"])), 0);
    assert_eq!(code(&run(&["embed", "check", "-n", "3", "-s", "1", "-q", "4", "-c", "2"])), 1);
}

#[test]
fn embed_sweep_writes_one_row_per_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "embed", "sweep", "-n", "3", "-s", "1", "--qs", "3,4", "--cs", "0,1,5", "--k", "6", "--size", "256",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,s,q,c,admissible,margin_low_c,margin_high_c,margin_q,C_est");
    assert_eq!(lines.len(), 7);
    // c = 5 fails c < (n-1)(q-2)/2 for both q, and c = 1 sits on it for q = 3
    assert_eq!(lines.iter().filter(|l| l.contains(",false,")).count(), 3, "{csv}");
}

#[test]
fn solve_writes_solution_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_into(dir.path(), &[]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("1,")).expect("summary row");
    let residual: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(residual < 1e-10, "{row}");
    let csv = fs::read_to_string(dir.path().join("solution_1.csv")).unwrap();
    assert!(csv.starts_with("r,u,v\n"));
    assert_eq!(csv.lines().count(), 513);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution_1.json")).unwrap()).unwrap();
    assert_eq!(meta["k"], 8);
    assert_eq!(meta["seed"], 0xC0FFEE);
    assert_eq!(meta["params"]["s"], 1.0);
    assert!(meta["phi_value"].as_f64().unwrap() > 0.0);
    assert!(!dir.path().join("solution_2.csv").exists());
}

#[test]
fn solve_is_deterministic_and_honours_environment() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = solve_into(first.path(), &[]);
    let mut args = vec!["solve"];
    args.extend(DEFAULT);
    args.extend(["--k", "8"]);
    let b = radial(&args).env("RADIAL_OUT_DIR", second.path()).env("RADIAL_THREADS", "1").output().unwrap();
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
    for name in ["solution_1.csv", "solution_1.json"] {
        assert_eq!(fs::read(first.path().join(name)).unwrap(), fs::read(second.path().join(name)).unwrap());
    }
}

#[test]
fn solve_reports_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_into(dir.path(), &["--oracle"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("index,phi,residual,iterations,oracle_sup"), "{text}");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution_1.json")).unwrap()).unwrap();
    assert!(meta["oracle_sup"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_rejects_inadmissible_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = radial(&["solve", "-n", "3", "-p", "4", "-q", "4", "-a", "0", "-b", "0"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn geometry_reports_sign_change() {
    let mut args = vec!["geometry"];
    args.extend(DEFAULT);
    args.extend(["--k", "6", "--samples", "5"]);
    let out = run(&args);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("negative at lambda = 549755813888: 5 of 5"), "{text}");
    // the z = 0 row is zero on every rung
    assert!(text.lines().filter(|l| l.starts_with("0,")).all(|l| l.ends_with(",0.0000000000e0")), "{text}");
    let minimum: f64 = text.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(minimum > 0.0);
}
