use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqp")).args(args).env_remove("LQP_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const MIDDLE: &str = r#"
[[model]]
name = "flat"
kind = "separable"
profile = "constant"
value = 2.0
domain = { start = 0.0, end = "inf" }

[[query]]
n = 2
k = 1
p = 2
q = "3/2"
model = "flat"
"#;

#[test]
fn show_defaults_prints_toml() {
    let out = lqp(&["--show-defaults"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: toml::Table = text.parse().unwrap();
    assert_eq!(parsed["lab"]["margin"].as_float(), Some(0.02));
    assert_eq!(parsed["lab_counts"]["ineq"].as_integer(), Some(1000));
}

#[test]
fn analyze_middle_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = lqp(&["analyze", &write_config(dir.path(), MIDDLE)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["queries"][0]["verdict"]["outcome"], "vanishes");
    assert_eq!(report["queries"][0]["verdict"]["criterion"], "middle-dimension");
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unsupported = MIDDLE.replace("q = \"3/2\"", "q = 3");
    assert_eq!(lqp(&["analyze", &write_config(dir.path(), &unsupported)]).status.code(), Some(2));
    let empty = lqp(&["analyze", &write_config(dir.path(), "")]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(json(&empty)["queries"].as_array().map(Vec::len), Some(0));
    let broken = lqp(&["analyze", &write_config(dir.path(), "[[query]]\nn = 1\nk = \"x\"\n")]);
    assert_eq!(broken.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&broken.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn output_path_from_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = lqp(&["analyze", &write_config(dir.path(), MIDDLE), "--output", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(report["command"], "analyze");
}

#[test]
fn tables_match_golden() {
    for family in ["exp", "power"] {
        let out = lqp(&["table", family, "--check", "golden"]);
        assert_eq!(out.status.code(), Some(0), "{family}");
        assert_eq!(json(&out)["golden"]["matches"], true);
    }
    let narrow = lqp(&["table", "power", "--n", "2", "--p", "2", "--s", "1", "--flavor", "absolute"]);
    assert!(narrow.status.success());
    // k = 0..3 with s1 = s2 = 1
    assert_eq!(json(&narrow)["table"]["rows"].as_array().map(Vec::len), Some(4));
}

#[test]
fn lab_runs() {
    let out = lqp(&["lab", "ddzero", "--count", "4", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["lab"][0]["check"], "ddzero");
    assert_eq!(report["lab"][0]["passed"], true);
    let small = lqp(&["lab", "homotopy", "--grids", "4,8"]);
    assert_eq!(small.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&small.stderr).contains("lab.grids"));
}

#[test]
fn thread_count_does_not_change_reports() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lqp"))
            .args(["lab", "norms", "--count", "8"])
            .env("LQP_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("many").status.code(), Some(1));
}

#[test]
fn cartan_hadamard_preset() {
    let out = lqp(&["presets", "cartan-hadamard", "--m", "5", "--p", "2", "--q", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["preset"]["vanishing_degrees"], serde_json::json!([2, 3]));
}
