use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpolyuc")).args(args).env_remove("UC_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const DERIVED: &str = r#"{
  "horizon": {"T": 3, "step_hours": 1.0},
  "demand": [0, 0, 0],
  "units": [{"name": "g", "cost": [1, 3, 1], "p_min": [0, 0, 0], "p_max": [3, 3, 3]}],
  "ev_profiles": [
    {"count": 1, "p_min": [0, 0, 0], "p_max": [1, 0, 1], "s_min": [0, 0, 1], "s_max": [1, 1, 1]},
    {"count": 1, "p_min": [0, 0, 0], "p_max": [0, 1, 0], "s_min": [0, 1, 1], "s_max": [0, 1, 1]}
  ]
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn objective(path: &Path) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["objective"].as_f64().unwrap()
}

#[test]
fn solve_writes_report_and_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", DERIVED);
    let out = dir.path().join("r.json");
    let cuts = dir.path().join("c.csv");
    let o = run(&["solve", &inst, "--out", out.to_str().unwrap(), "--cuts-csv", cuts.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((objective(&out) - 4.0).abs() < 1e-9);
    let csv = std::fs::read_to_string(&cuts).unwrap();
    assert!(csv.starts_with("iteration,sense,bound,subset\n"));
}

#[test]
fn extensive_and_naive_modes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", DERIVED);
    let out = dir.path().join("r.json");
    let o = run(&["solve", &inst, "--extensive", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((objective(&out) - 4.0).abs() < 1e-9);
    let o = run(&["solve", &inst, "--no-separation", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((objective(&out) - 2.0).abs() < 1e-9);
}

#[test]
fn iteration_limit_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", DERIVED);
    let o = run(&["solve", &inst, "--max-iters", "1"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn infeasible_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", &DERIVED.replace(r#""demand": [0, 0, 0]"#, r#""demand": [9, 0, 0]"#));
    let o = run(&["solve", &inst]);
    assert_eq!(code(&o), 3);
}

#[test]
fn invalid_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "b.json", "{ not json");
    assert_eq!(code(&run(&["solve", &bad_json])), 2);
    let short = write(dir.path(), "s.json", &DERIVED.replace(r#""demand": [0, 0, 0]"#, r#""demand": [0, 0]"#));
    let o = run(&["check", &short]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("demand"));
    assert_eq!(code(&run(&["solve", "/nonexistent/x.json"])), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["solve"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn generate_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["generate", "-T", "24", "-N", "3", "--seed", "9", "--units", "4", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = run(&["check", a.to_str().unwrap(), "--samples", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok:"));
    let out = dir.path().join("r.json");
    assert_eq!(code(&run(&["solve", a.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", DERIVED);
    let o = Command::new(env!("CARGO_BIN_EXE_gpolyuc")).args(["solve", &inst]).env("UC_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["options"]["threads"], 2);
}

#[test]
fn bench_csv_columns() {
    let o = run(&["bench", "--T-list", "6,8", "--N-list", "2", "--runs", "1", "--units", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,N,run,iterations,cuts_added,objective,oracle_ms,master_ms,total_ms");
    assert_eq!(lines.len(), 3);
}
