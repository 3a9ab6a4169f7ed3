use std::path::PathBuf;
use std::process::{Command, Output};

use halfplane::harness::StatReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfplane")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("halfplane-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn counts_are_printed() {
    let out = run(&["enum", "phi", "--n", "1", "--m", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4");
}

#[test]
fn exit_codes_follow_the_report() {
    assert_eq!(run(&["verify", "quad"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "order", "--trials", "300", "--peeking"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "polygon", "--m", "1", "--n", "0", "--seed", "0"]).status.code(), Some(2));
}

#[test]
fn report_exports_agree() {
    let dir = scratch("report");
    let (json, csv, csv2) = (dir.join("r.json"), dir.join("r.csv"), dir.join("r2.csv"));
    let out = run(&["verify", "enum", "--out", s(&json), "--csv", s(&csv)]);
    assert!(out.status.success());
    let rep = StatReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(rep.pass && rep.is_consistent());

    assert!(run(&["export", "--in", s(&json), "--format", "csv", "--out", s(&csv2)]).status.success());
    let (a, b) = (std::fs::read_to_string(&csv).unwrap(), std::fs::read_to_string(&csv2).unwrap());
    assert_eq!(a, b);
    let back = StatReport::from_csv(&a).unwrap();
    assert!(back.is_consistent());
    assert_eq!(back.checks.len(), rep.checks.len());
}

#[test]
fn peeled_map_replays_and_renders() {
    let dir = scratch("peel");
    let (map, replay, svg) = (dir.join("m.json"), dir.join("re.json"), dir.join("m.svg"));
    let out = run(&["sample", "peel", "--alpha", "4/5", "--steps", "30", "--seed", "3", "--out", s(&map)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run(&["sample", "replay", "--in", s(&map), "--out", s(&replay)]).status.success());
    assert!(run(&["export", "--in", s(&map), "--format", "svg", "--out", s(&svg)]).status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
