use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn drmdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drmdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn emit(dir: &TempDir, name: &str) -> PathBuf {
    let path = dir.path().join(format!("{}.json", name.replace(':', "-")));
    let o = drmdp(&["examples", "emit", name, "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_real_time_conspiracy() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let o = drmdp(&["solve", s(&f), "--objective", "rt", "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("value: 100"), "{out}");
    assert!(out.contains("optimal classes: 1"));
    assert!(!out.contains("=noop"));
}

#[test]
fn solve_constrained_conspiracy_is_inaction() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let o = drmdp(&[
        "--format",
        "json",
        "solve",
        s(&f),
        "--objective",
        "crt",
        "--horizon",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let members = v["members"].as_array().unwrap();
    assert_eq!(members.len(), 1);
    assert!(!members[0].as_str().unwrap().contains("influence"));
}

#[test]
fn reduce_method_agrees() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "ai-trainer");
    let a = drmdp(&[
        "--format",
        "json",
        "solve",
        s(&f),
        "--objective",
        "final",
        "--horizon",
        "4",
    ]);
    let b = drmdp(&[
        "--format",
        "json",
        "solve",
        s(&f),
        "--objective",
        "final",
        "--horizon",
        "4",
        "--method",
        "reduce",
    ]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = drmdp(&[
        "solve",
        "/nonexistent/x.json",
        "--objective",
        "rt",
        "--horizon",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn invalid_instance_lists_violations() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let text =
        std::fs::read_to_string(&f)
            .unwrap()
            .replacen("\"prob\": \"1\"", "\"prob\": \"1/2\"", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let o = drmdp(&["validate", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid"));
}

#[test]
fn policy_cap_is_a_guard_refusal() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let o = drmdp(&[
        "--cap-policies",
        "2",
        "solve",
        s(&f),
        "--objective",
        "rt",
        "--horizon",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_flexible_eight_boundaries() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "flexible:8");
    let o = drmdp(&[
        "sweep",
        s(&f),
        "--objective",
        "rt",
        "--towards",
        "theta_delta",
        "--h-max",
        "20",
        "--premise",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("boundaries: 2, 6, 16"), "{out}");
    assert!(out.contains("condition holds: false"));
}

#[test]
fn pareto_career_choice() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "career-choice");
    let o = drmdp(&["--format", "csv", "pareto", s(&f), "--horizon", "1"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3, "{out}");
    assert!(out.contains("encourage_cook") && out.contains("encourage_teacher"));
}

#[test]
fn influence_incentive_conspiracy() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let o = drmdp(&["influence", s(&f), "--objective", "rt", "--horizon", "3"]);
    assert!(stdout(&o).contains("incentive for influence: true"));
    let o = drmdp(&["influence", s(&f), "--objective", "crt", "--horizon", "3"]);
    assert!(stdout(&o).contains("incentive for influence: false"));
}

#[test]
fn learn_round_trip() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data.json");
    let decl = dir.path().join("declared.json");
    let out = dir.path().join("learned.json");
    let o = drmdp(&[
        "examples",
        "dataset",
        "dehydration",
        "-o",
        s(&data),
        "--declared",
        s(&decl),
    ]);
    assert!(o.status.success());
    let o = drmdp(&["learn", s(&data), "--thetas", s(&decl), "-o", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let original = emit(&dir, "dehydration");
    let strip = |p: &Path| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("\"description\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&out), strip(&original));
}

#[test]
fn report_is_deterministic() {
    let a = drmdp(&["--format", "csv", "report", "conspiracy"]);
    let b = drmdp(&["--format", "csv", "report", "conspiracy"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("episode length,conspiracy,Real-time reward,3..5,influence,✓"));
    assert!(stdout(&a).contains("planning depth,conspiracy"));
}

#[test]
fn replanning_clickbait_real_time() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "clickbait");
    let one = stdout(&drmdp(&[
        "solve",
        s(&f),
        "--objective",
        "rt",
        "--horizon",
        "1",
        "--method",
        "replan",
    ]));
    assert!(one.contains("(s0, normal) -> clickbait"), "{one}");
    let three = stdout(&drmdp(&[
        "solve",
        s(&f),
        "--objective",
        "rt",
        "--horizon",
        "3",
        "--method",
        "replan",
    ]));
    assert!(
        three.contains("(s0, normal) -> news") && three.contains("(s0, disillusioned) -> news")
    );
}

#[test]
fn examples_list_names_every_builtin() {
    let out = stdout(&drmdp(&["examples", "list"]));
    assert_eq!(out.lines().count(), 17);
    assert!(out.contains("flexible:9"));
}

#[test]
fn unknown_objective_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = emit(&dir, "conspiracy");
    let o = drmdp(&["solve", s(&f), "--objective", "nope", "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(1));
}
