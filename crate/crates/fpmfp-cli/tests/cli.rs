use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn fpmfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpmfp")).args(args).env_remove("FPMFP_LOG").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_fig2_interval_fpmfp() {
    let f = fixture("fig2.mir");
    let v = json_of(&fpmfp(&["analyze", "--program", &f, "--analysis", "interval", "--mode", "fpmfp", "--no-timing"]));
    assert_eq!(v["schema"], 1);
    let n6 = v["nodes"].as_array().unwrap().iter().find(|n| n["node"] == "n6").unwrap();
    assert_eq!(n6["in"]["a"], serde_json::json!([5, 5]));
    let mfp = json_of(&fpmfp(&["analyze", "--program", &f, "--analysis", "interval", "--mode", "mfp", "--no-timing"]));
    let n6 = mfp["nodes"].as_array().unwrap().iter().find(|n| n["node"] == "n6").unwrap();
    assert_eq!(n6["in"]["a"], serde_json::json!([0, 5]));
    assert!(mfp["edges"][0].get("pairs").is_none());
}

#[test]
fn analyze_reports_pairs_with_one_based_ids() {
    let v = json_of(&fpmfp(&["analyze", "--program", &fixture("fig2.mir"), "--analysis", "interval", "--no-timing"]));
    let e3 = v["edges"].as_array().unwrap().iter().find(|e| e["edge"] == "e3").unwrap();
    assert_eq!(e3["pairs"][0]["mips"], serde_json::json!([1]));
    assert_eq!(e3["pairs"][0]["value"]["x"], serde_json::json!(["-inf", -1]));
}

#[test]
fn detect_mips_fig12() {
    let v = json_of(&fpmfp(&["detect-mips", "--program", &fixture("fig12.mir")]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["mips"][0]["edges"], serde_json::json!(["e3", "e6", "e7", "e8"]));
}

#[test]
fn missing_file_exits_1() {
    let out = fpmfp(&["analyze", "--program", "/nonexistent/x.mir", "--analysis", "rd"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.mir"));
}

#[test]
fn usage_errors_exit_64_with_help() {
    for args in [
        &["analyze", "--program", "x.mir"][..],
        &["analyze", "--program", "x.mir", "--analysis", "liveness"],
        &["compare", "--program", "x.mir", "--opts", "4"],
        &["frobnicate"],
    ] {
        let out = fpmfp(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
    assert_eq!(fpmfp(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let f = fixture("fig4.mir");
    for args in [
        vec!["compare", "--program", &f, "--no-timing"],
        vec!["analyze", "--program", &f, "--analysis", "rd", "--no-timing"],
        vec!["compare", "--program", &f, "--format", "table", "--no-timing"],
    ] {
        let a = fpmfp(&args);
        let b = fpmfp(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("report.json");
    let d = dest.display().to_string();
    let out = fpmfp(&["compare", "--program", &fixture("nlkain_like.mir"), "--no-timing", "--output", &d]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    let uninit = v["analyses"].as_array().unwrap().iter().find(|a| a["analysis"] == "uninit").unwrap();
    assert_eq!(uninit["client"]["reduction"], "100.00");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn compare_timing_is_optional() {
    let f = fixture("fig2.mir");
    let with = json_of(&fpmfp(&["compare", "--program", &f, "--analysis", "interval"]));
    assert!(with["analyses"][0]["timing_ms"]["mfp"].is_number());
    let without = json_of(&fpmfp(&["compare", "--program", &f, "--analysis", "interval", "--no-timing"]));
    assert!(without["analyses"][0].get("timing_ms").is_none());
    assert_eq!(without["analyses"][0]["improved_nodes"], serde_json::json!(["n6"]));
}

#[test]
fn oracle_check_fixture_dir_passes_and_ignores_jobs() {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures"].iter().collect();
    let d = dir.display().to_string();
    let one = fpmfp(&["oracle-check", &d, "--jobs", "1", "--no-timing"]);
    let four = fpmfp(&["oracle-check", &d, "--jobs", "4", "--no-timing"]);
    let v = json_of(&one);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["failed"], 0);
    assert!(v["checked"].as_u64().unwrap() >= 13);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn oracle_check_generated_programs_by_seed() {
    let a = fpmfp(&["oracle-check", "--random", "4", "--seed", "100", "--no-timing"]);
    let v = json_of(&a);
    assert_eq!(v["checked"], 4);
    assert_eq!(v["programs"][0]["program"], "generated:acyclic:100");
    assert_eq!(a.stdout, fpmfp(&["oracle-check", "--random", "4", "--seed", "100", "--no-timing"]).stdout);
}

#[test]
fn dump_dot_annotates_edges() {
    let out = fpmfp(&["dump-dot", "--program", &fixture("fig2.mir"), "--analysis", "interval"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("digraph \"main\""));
    assert!(s.contains("µ1"));
}
