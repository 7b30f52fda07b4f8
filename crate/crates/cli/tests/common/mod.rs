#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_algapprox"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// `(equations, inequalities)` per piece.
pub fn set(vars: &[&str], pieces: &[(&[&str], &[&str])]) -> Value {
    json!({
        "variables": vars,
        "pieces": pieces
            .iter()
            .map(|(e, h)| json!({"equations": e, "inequalities": h}))
            .collect::<Vec<_>>(),
    })
}

pub fn job(vars: &[&str], pieces: &[(&[&str], &[&str])], s: f64) -> Value {
    let mut v = set(vars, pieces);
    v["s"] = json!(s);
    v
}

pub fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Variables and `(equations, inequalities)` per piece.
pub type SetSpec = (
    &'static [&'static str],
    &'static [(&'static [&'static str], &'static [&'static str])],
);

pub const QUADRANT: SetSpec = (&["x", "y", "z"], &[(&["z"], &["x", "y"])]);
pub const HALF_LINE: SetSpec = (&["x1", "x2", "x3"], &[(&["x1", "x2"], &["x3"])]);
