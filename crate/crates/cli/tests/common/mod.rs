#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ideofactor"));
    c.env("RUST_LOG", "error");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Generates a planted instance under `dir/data` with extra flags.
pub fn generate(dir: &Path, seed: u64, extra: &[&str]) -> PathBuf {
    let data = dir.join("data");
    let seed = seed.to_string();
    let mut args = vec!["generate", "--seed", &seed, "--out"];
    let d = s(&data);
    args.push(&d);
    args.extend_from_slice(extra);
    run_ok(&args);
    data
}

pub fn fit(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let edges = s(&data.join("edges.tsv"));
    let engagement = s(&data.join("engagement.tsv"));
    let out = s(out);
    let mut args = vec!["fit", "--edges", &edges, "--engagement", &engagement, "--out", &out];
    args.extend_from_slice(extra);
    run_ok(&args)
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
