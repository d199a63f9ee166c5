//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod gue;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

/// Run the binary with `args`; `threads_env` sets or clears `ZEROCORR_THREADS`.
pub fn zerocorr_with(args: &[&str], threads_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zerocorr"));
    cmd.args(args);
    match threads_env {
        Some(t) => cmd.env("ZEROCORR_THREADS", t),
        None => cmd.env_remove("ZEROCORR_THREADS"),
    };
    cmd.output().expect("spawn zerocorr")
}

pub fn zerocorr(args: &[&str]) -> Output {
    zerocorr_with(args, None)
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parse a CSV body with a header into (header, rows of floats).
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().expect("float cell")).collect()).collect();
    (header, rows)
}
