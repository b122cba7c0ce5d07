#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

/// Runs the binary from the fixtures directory so reported paths are
/// relative and stable.
pub fn mlguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlguard"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("MLGUARD_TIMESTAMP")
        .output()
        .expect("run mlguard")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Fixture programs (relative to the fixtures dir) whose check reports at
/// least one error.
pub fn error_fixtures() -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![fixtures().join("programs")];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if std::fs::read_to_string(&p).unwrap().lines().any(|l| l.starts_with("# expect: E-")) {
                out.push(p.strip_prefix(fixtures()).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}
