//! End-to-end runs of the `landscape` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("landscape-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape")).arg("--out").arg(out).args(args).output().unwrap()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_type2_converges_and_writes_manifest() {
    let dir = out_dir("solve");
    let o = run(&dir, &["solve", "--type", "II", "--p", "1", "--m", "0", "--d", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(dir.join("solve.manifest.json"));
    assert_eq!(m["parameters"]["d"], 50.0);
    assert!(dir.join("solve.json").exists());
}

#[test]
fn solve_type1_p0_converges() {
    let dir = out_dir("solve1");
    let o = run(&dir, &["solve", "--type", "I", "--p", "0", "--m", "0", "--d", "30"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_2() {
    let dir = out_dir("usage");
    assert_eq!(run(&dir, &["solve", "--type", "II", "--p", "0", "--m", "0", "--d", "50"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["solve", "--type", "III", "--p", "1", "--m", "0", "--d", "50"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["interlace", "--d-grid", "abc"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_4() {
    let dir = out_dir("domain");
    assert_eq!(run(&dir, &["xavier", "--d", "3", "--samples", "10"]).status.code(), Some(4));
}

#[test]
fn fossil_reports_hexagon() {
    let dir = out_dir("fossil");
    let o = run(&dir, &["fossil", "--k", "3", "--d", "2", "--samples", "20"]);
    assert!(o.status.success());
    let r = json(dir.join("fossil.json"));
    assert_eq!(r["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(r["edges"].as_array().unwrap().len(), 6);
    assert_eq!(r["is_cycle"], true);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let (a, b) = (out_dir("det-a"), out_dir("det-b"));
    for dir in [&a, &b] {
        assert!(run(dir, &["xavier", "--d", "5", "--samples", "5000", "--seed", "3"]).status.success());
    }
    let read = |d: &PathBuf| std::fs::read(d.join("xavier.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn fps_direct_prints_type2_root() {
    let dir = out_dir("fps");
    let o = run(&dir, &["fps", "--type", "II", "--p", "1", "--m", "1", "--method", "direct"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("c3 = -0.5722878"), "{text}");
    assert!(text.contains("ϑ = 0.58416413506"), "{text}");
}

#[test]
fn interlace_small_grid_writes_csv() {
    let dir = out_dir("interlace");
    let o = run(&dir, &["interlace", "--d-grid", "100:200:3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("interlace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
