#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use mlguard_core::checker::CheckOptions;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// One `# expect:` header line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Expectation {
    pub code: String,
    pub line: usize,
}

pub struct Fixture {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub expected: Vec<Expectation>,
    pub contexts: BTreeSet<String>,
}

impl Fixture {
    pub fn options(&self) -> CheckOptions {
        CheckOptions { contexts: self.contexts.clone(), ..CheckOptions::default() }
    }
}

fn parse_header(source: &str) -> (Vec<Expectation>, BTreeSet<String>) {
    let mut expected = Vec::new();
    let mut contexts = BTreeSet::new();
    for line in source.lines() {
        let Some(rest) = line.strip_prefix("# expect:") else { continue };
        let words: Vec<&str> = rest.split_whitespace().collect();
        match words.as_slice() {
            ["none"] => {}
            [code, "at", line, tail @ ..] => {
                expected.push(Expectation { code: code.to_string(), line: line.parse().expect("line number") });
                if let ["with", ctx] = tail {
                    contexts.insert(ctx.to_string());
                }
            }
            other => panic!("bad expect header {other:?}"),
        }
    }
    expected.sort();
    (expected, contexts)
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect(&path, out);
        } else if path.extension().is_some_and(|e| e == "mlp") {
            out.push(path);
        }
    }
}

/// Every annotated program under `fixtures/programs`, sorted by path.
pub fn program_fixtures() -> Vec<Fixture> {
    let mut paths = Vec::new();
    collect(&fixtures_dir().join("programs"), &mut paths);
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let source = fs::read_to_string(&path).unwrap();
            let (expected, contexts) = parse_header(&source);
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            Fixture { name, path, source, expected, contexts }
        })
        .collect()
}

pub fn golden_source() -> String {
    fs::read_to_string(fixtures_dir().join("titanic.mlp")).unwrap()
}

/// The program corpus plus the golden pipeline, as (name, source).
pub fn corpus() -> Vec<(String, String)> {
    let mut all: Vec<(String, String)> = program_fixtures().into_iter().map(|f| (f.name, f.source)).collect();
    all.push(("titanic.mlp".to_string(), golden_source()));
    all
}
