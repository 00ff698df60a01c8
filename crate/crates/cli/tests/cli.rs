use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const K3_UNIT: &str = r#"{"nodes": 3, "k": 0, "edges": [
    {"id": 0, "u": 0, "v": 1, "C": 1, "c": 1, "d": 0},
    {"id": 1, "u": 0, "v": 2, "C": 1, "c": 1, "d": 0},
    {"id": 2, "u": 1, "v": 2, "C": 1, "c": 1, "d": 0}]}"#;

const K4: &str = r#"{"nodes": 4, "k": 1, "edges": [
    {"id": 0, "u": 0, "v": 1, "C": 3, "c": 1, "d": 2},
    {"id": 1, "u": 0, "v": 2, "C": 1, "c": 4, "d": 0},
    {"id": 2, "u": 0, "v": 3, "C": 2, "c": 2, "d": 1},
    {"id": 3, "u": 1, "v": 2, "C": 5, "c": 0, "d": 1},
    {"id": 4, "u": 1, "v": 3, "C": 1, "c": 3, "d": 3},
    {"id": 5, "u": 2, "v": 3, "C": 4, "c": 1, "d": 0}]}"#;

const U24: &str = r#"{"family": "uniform", "rank": 2, "k": 1, "costs": [
    {"id": 0, "C": 1, "c": 5, "d": 0},
    {"id": 1, "C": 2, "c": 4, "d": 1},
    {"id": 2, "C": 6, "c": 1, "d": 0},
    {"id": 3, "C": 3, "c": 2, "d": 2}]}"#;

fn rrst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrst")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn solve_json(input: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["solve", "--input", s(input)];
    args.extend_from_slice(extra);
    let o = rrst(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn solve_unit_triangle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k3.json", K3_UNIT);
    let sol = solve_json(&input, &[]);
    assert_eq!(sol["total"], "4");
    assert_eq!(sol["X"], sol["Y"]);
}

#[test]
fn solve_writes_output_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k3.json", K3_UNIT);
    let out = dir.path().join("sol.json");
    let o = rrst(&["solve", "--input", s(&input), "--output", s(&out)]);
    assert!(o.status.success());
    let sol: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(sol["total"], "4");
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"nodes": 3, "k": 0, "edges": [{"id": 0, "u": 0, "v": 5, "C": 1, "c": 1, "d": 0}]}"#,
    );
    let o = rrst(&["solve", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
    let missing = dir.path().join("missing.json");
    assert_eq!(rrst(&["solve", "--input", s(&missing)]).status.code(), Some(2));
    assert_eq!(rrst(&["gen", "--nodes", "4", "--density", "1.5"]).status.code(), Some(2));
    assert_eq!(rrst(&["solve"]).status.code(), Some(2));
}

#[test]
fn strict_and_batch_agree() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.json", K4);
    let strict = solve_json(&input, &["--mode", "strict"]);
    let batch = solve_json(&input, &["--mode", "batch"]);
    assert_eq!(strict["total"], batch["total"]);
    let exhaustive = solve_json(&input, &["--separation", "exhaustive", "--cuts", "all"]);
    assert_eq!(exhaustive["total"], batch["total"]);
}

#[test]
fn solve_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.json", K4);
    let sol = solve_json(&input, &[]);
    let o = rrst(&["oracle", "--input", s(&input)]);
    assert!(o.status.success());
    let best: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(sol["total"], best["total"]);
    let oracle_file = write(&dir, "oracle.json", &stdout(&o));
    assert!(rrst(&["verify", "--instance", s(&input), "--solution", s(&oracle_file)]).status.success());
}

#[test]
fn matroid_inputs() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "k4.json", K4);
    let as_graph = solve_json(&graph, &[]);
    let as_matroid = solve_json(&graph, &["--matroid"]);
    assert_eq!(as_graph["total"], as_matroid["total"]);

    let uniform = write(&dir, "u24.json", U24);
    let sol = solve_json(&uniform, &[]);
    let o = rrst(&["oracle", "--input", s(&uniform)]);
    let best: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(sol["total"], best["total"]);
    let sol_file = write(&dir, "sol.json", &sol.to_string());
    assert!(rrst(&["verify", "--instance", s(&uniform), "--solution", s(&sol_file)]).status.success());
}

#[test]
fn gen_is_deterministic_and_respects_density() {
    let a = rrst(&["gen", "--nodes", "8", "--density", "0.4", "--k", "2", "--cost-max", "5", "--seed", "11"]);
    let b = rrst(&["gen", "--nodes", "8", "--density", "0.4", "--k", "2", "--cost-max", "5", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let edges = |density: &str| {
        let o = rrst(&["gen", "--nodes", "9", "--density", density, "--seed", "4"]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["edges"].as_array().unwrap().len()
    };
    assert_eq!(edges("0"), 8);
    assert_eq!(edges("1"), 36);
}

#[test]
fn verify_names_the_failed_check() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.json", K4);
    let sol = solve_json(&input, &[]);
    let good = write(&dir, "good.json", &sol.to_string());
    let o = rrst(&["verify", "--instance", s(&input), "--solution", s(&good)]);
    assert_eq!(o.status.code(), Some(0));

    let mut short = sol.clone();
    short["X"].as_array_mut().unwrap().pop();
    let short = write(&dir, "short.json", &short.to_string());
    let o = rrst(&["verify", "--instance", s(&input), "--solution", s(&short)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("X not spanning"), "{}", stderr(&o));

    let mut tampered = sol.clone();
    tampered["total"] = Value::from("1");
    let tampered = write(&dir, "tampered.json", &tampered.to_string());
    let o = rrst(&["verify", "--instance", s(&input), "--solution", s(&tampered)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cost mismatch"), "{}", stderr(&o));

    let garbage = write(&dir, "garbage.json", "{\"X\": []}");
    let o = rrst(&["verify", "--instance", s(&input), "--solution", s(&garbage)]);
    assert_eq!(o.status.code(), Some(2));
}

fn reports(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn compare_builtin_suite_agrees() {
    let o = rrst(&["compare", "--suite", "builtin-small"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rs = reports(&o);
    assert_eq!(rs.len(), 414);
    assert!(rs.iter().all(|r| r["agree"] == true && r["error"].is_null()));
    assert_eq!(rs[0]["name"], "n1-g0-unit-k0");
}

#[test]
fn compare_seeds_are_reproducible() {
    let run = || {
        let o = rrst(&["compare", "--seeds", "1..50", "--nodes", "6", "--jobs", "2"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut rs = reports(&o);
        for r in &mut rs {
            r.as_object_mut().unwrap().remove("wall_ms");
        }
        rs
    };
    let first = run();
    assert_eq!(first.len(), 50);
    assert_eq!(first[0]["name"], "seed-1");
    assert_eq!(first[49]["name"], "seed-50");
    assert_eq!(first, run());
}

#[test]
fn compare_directory_reports_corrupt_file() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.json", K3_UNIT);
    write(&dir, "b.json", "{not json");
    write(&dir, "c.json", K4);
    write(&dir, "notes.txt", "ignored");
    let o = rrst(&["compare", "--suite", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let rs = reports(&o);
    let names: Vec<&str> = rs.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["a.json", "b.json", "c.json"]);
    assert_eq!(rs[0]["agree"], true);
    assert!(rs[1]["error"].is_string());
    assert_eq!(rs[1]["agree"], false);
    assert_eq!(rs[2]["agree"], true);
}

#[test]
fn compare_needs_a_source() {
    assert_eq!(rrst(&["compare"]).status.code(), Some(2));
    assert_eq!(rrst(&["compare", "--seeds", "5..2", "--nodes", "4"]).status.code(), Some(2));
}
