use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hitasym_core::distributions::rat;
use hitasym_core::json::{parse_document, Document};
use tempfile::TempDir;

const WORKED: &str =
    r#"{"alpha":"5/27","betas":["5/27","5/27","5/27","3/27","3/27","3/27","3/27"]}"#;
const WORKED_SYSTEM: &str = r#"{"q":27,"marked":[1,4,7,14,21]}"#;

fn hitasym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hitasym"))
        .args(args)
        .env_remove("HITASYM_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn stamp_verify_on_worked_example() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.json", WORKED);
    let o = hitasym(&["stamp", "--verify", arg(&f)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verified"], true);
    assert_eq!(v["system"]["marked"], serde_json::json!([1, 4, 7, 14, 21]));
    let system = parse_document(&v["system"].to_string()).unwrap();
    assert_eq!(system.kind(), "cyclic");
}

#[test]
fn realize_exp1_shrinks_distances() {
    let dir = TempDir::new().unwrap();
    let sets = dir.path().join("sets");
    let csv = dir.path().join("csv");
    let o = hitasym(&[
        "realize",
        "--target",
        "exp1",
        "--eps-list",
        "1/4,1/8,1/16",
        "--emit-sets",
        arg(&sets),
        "--csv-dir",
        arg(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("eps-list=1/4,1/8,1/16 margin=2"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 3);
    let levy: Vec<_> = stages
        .iter()
        .map(|s| {
            hitasym_core::distributions::parse_rational(s["levy_distance"].as_str().unwrap())
                .unwrap()
        })
        .collect();
    assert!(levy.windows(2).all(|w| w[1] < w[0]), "{levy:?}");
    for i in 0..3 {
        let text = std::fs::read_to_string(sets.join(format!("stage_{i}.json"))).unwrap();
        assert!(matches!(parse_document(&text), Ok(Document::Cyclic(_))));
        let rows = std::fs::read_to_string(csv.join(format!("stage_{i}.csv"))).unwrap();
        assert!(rows.starts_with("t,F\n"));
    }
    assert!(sets.join("NOTE.txt").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(hitasym(&["hitting", "--bogus"]).status.code(), Some(2));
    assert_eq!(hitasym(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn decreasing_locations_exit_one_with_witness() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bad.json",
        r#"{"jumps":[{"t":"1","size":"1/2"},{"t":"1/2","size":"1/2"}]}"#,
    );
    let o = hitasym(&["check-cdf", arg(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1/2"), "{}", stderr(&o));
}

#[test]
fn schema_and_io_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "shape.json", r#"{"jumps":[{"t":"1"}]}"#);
    assert_eq!(hitasym(&["check-cdf", arg(&f)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(hitasym(&["hitting", arg(&missing)]).status.code(), Some(2));
    let sys = write(&dir, "c.json", WORKED_SYSTEM);
    assert_eq!(hitasym(&["check-classf", arg(&sys)]).status.code(), Some(2));
}

#[test]
fn check_cdf_passes_hitting_output_and_flags_violations() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "c.json", WORKED_SYSTEM);
    let h = dir.path().join("h.json");
    assert_eq!(
        hitasym(&["hitting", arg(&sys), "--out", arg(&h)])
            .status
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&h).unwrap();
    let Ok(Document::Step(f)) = parse_document(&text) else {
        panic!("{text}")
    };
    assert_eq!(f.len(), 7);
    let o = hitasym(&["check-cdf", arg(&h)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rational_f"]["alpha"], "5/27");

    // increasing jumps break conditions C
    let up = write(
        &dir,
        "up.json",
        r#"{"jumps":[{"t":"1/3","size":"1/3"},{"t":"2/3","size":"2/3"}]}"#,
    );
    let o = hitasym(&["check-cdf", arg(&up)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn check_classf_verdicts() {
    let dir = TempDir::new().unwrap();
    let linear = write(&dir, "lin.json", r#"{"breakpoints":[["0","0"],["1","1"]]}"#);
    assert_eq!(
        hitasym(&["check-classf", arg(&linear)]).status.code(),
        Some(0)
    );
    let convex = write(
        &dir,
        "convex.json",
        r#"{"breakpoints":[["0","0"],["1","1/4"],["2","1"]]}"#,
    );
    let o = hitasym(&["check-classf", arg(&convex)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("concave"), "{}", stdout(&o));
}

#[test]
fn csv_has_two_rows_per_jump() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "c.json", WORKED_SYSTEM);
    let o = hitasym(&["return", arg(&sys), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    // return times 3 (twice) and 7 (three times)
    assert_eq!(
        rows,
        [
            "t,F",
            "0.555555555556,0",
            "0.555555555556,0.4",
            "1.2962962963,0.4",
            "1.2962962963,1"
        ]
    );
}

#[test]
fn rationalize_linear_at_one_half() {
    let dir = TempDir::new().unwrap();
    let linear = write(&dir, "lin.json", r#"{"breakpoints":[["0","0"],["1","1"]]}"#);
    let o = hitasym(&["rationalize", arg(&linear), "--eps", "1/2", "--report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("N = 3, q = 3, K = 3"), "{}", stderr(&o));
    let Ok(Document::Rational(f)) = parse_document(&stdout(&o)) else {
        panic!()
    };
    assert_eq!(f.alpha(), &rat(1, 3));
    assert_eq!(
        hitasym(&["rationalize", arg(&linear), "--eps", "abc"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_is_seeded() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "c.json", WORKED_SYSTEM);
    let run = |seed: &str| {
        hitasym(&[
            "simulate",
            "--system",
            arg(&sys),
            "--samples",
            "2000",
            "--seed",
            seed,
        ])
    };
    let (a, b, c) = (run("5"), run("5"), run("6"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
    assert!(stderr(&a).contains("seed=5"));
    let Ok(Document::Empirical(e)) = parse_document(&stdout(&a)) else {
        panic!()
    };
    assert_eq!(e.count(), 2000);
    assert_eq!(e.run().unwrap().seed, 5);

    let from_env = Command::new(env!("CARGO_BIN_EXE_hitasym"))
        .args(["simulate", "--system", arg(&sys), "--samples", "2000"])
        .env("HITASYM_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(stdout(&from_env), stdout(&a));
}

#[test]
fn distance_between_sample_and_exact_curve() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "c.json", WORKED_SYSTEM);
    let e = dir.path().join("e.json");
    let o = hitasym(&[
        "simulate",
        "--system",
        arg(&sys),
        "--samples",
        "20000",
        "--seed",
        "1",
        "--out",
        arg(&e),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for metric in ["ks", "sup", "levy"] {
        let o = hitasym(&["distance", arg(&e), arg(&sys), "--metric", metric]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let d = v["distance"]["approx"].as_f64().unwrap();
        assert!((0.0..0.03).contains(&d), "{metric}: {d}");
    }
    let o = hitasym(&["distance", arg(&sys), arg(&sys)]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["distance"]["exact"], "0/1");
}
