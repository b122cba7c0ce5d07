//! End-to-end acceptance criteria. Runs without the libtest harness and
//! prints one PASS or FAIL line per criterion.

mod common;

#[path = "../../core/tests/support/typestate_replay.rs"]
mod replay;

use std::fs;
use std::process::ExitCode;

use common::{code, error_fixtures, fixture, fixtures, mlguard, stdout};
use mlguard_core::bundled;
use mlguard_core::checker::{check_source, CheckOptions, CheckReport};
use mlguard_core::dsl::{format, parse_source};
use mlguard_core::profiler::{audit_split, entropy, profile_reader, ColumnKind, ColumnMeta, SchemaMeta, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn read(rel: &str) -> String {
    fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn check(src: &str, contexts: &[&str]) -> CheckReport {
    let opts = CheckOptions { contexts: contexts.iter().map(|c| c.to_string()).collect(), ..CheckOptions::default() };
    check_source(src, "t.mlp", &bundled::spec(), &opts).1
}

fn misspelled_kernel() -> Outcome {
    let out = mlguard(&["check", "programs/misspelled_kernel.mlp", "--format", "records"]);
    ensure(code(&out) == 1, || format!("exit {}", code(&out)))?;
    let src = read("programs/misspelled_kernel.mlp");
    let (program, report) = check_source(&src, "misspelled_kernel.mlp", &bundled::spec(), &CheckOptions::default());
    ensure(report.codes() == ["E-TYPE-001"], || format!("codes {:?}", report.codes()))?;
    let d = &report.diagnostics[0];
    let decl = program.ast.statements.iter().find(|s| s.construct() == "model").ok_or("no model statement")?;
    let fit = program.ast.statements.iter().find(|s| s.construct() == "fit").ok_or("no fit statement")?;
    ensure(decl.span.contains(&d.span) && !fit.span.contains(&d.span), || format!("span {:?}", d.span))?;
    for lit in ["linear", "poly", "rbf", "sigmoid", "precomputed"] {
        ensure(d.message.contains(&format!("\"{lit}\"")), || format!("{lit} missing from {:?}", d.message))?;
    }
    let fixes: Vec<&str> = d.suggestions.iter().map(|s| s.replacement.as_str()).collect();
    ensure(fixes == ["\"linear\""], || format!("fixes {fixes:?}"))?;
    let records = stdout(&out);
    ensure(records.lines().count() == 1 && records.contains("\tE-TYPE-001\terror\t"), || records.clone())
}

fn dependency_relevance() -> Outcome {
    let rbf = check(&read("programs/dep_rbf_degree.mlp"), &[]);
    ensure(rbf.codes() == ["W-DEP-001"], || format!("rbf: {:?}", rbf.codes()))?;
    let poly = check(&read("programs/dep_poly_degree.mlp"), &[]);
    ensure(poly.diagnostics.is_empty(), || format!("poly: {:?}", poly.codes()))
}

fn probability_before_fit() -> Outcome {
    let golden = read("titanic.mlp");
    let clean = check(&golden, &[]);
    ensure(clean.diagnostics.is_empty(), || format!("golden: {:?}", clean.codes()))?;
    let lines: Vec<&str> = golden.lines().collect();
    let set = lines.iter().position(|l| l.trim() == "set model.probability = true").ok_or("no set line")?;
    let fit = lines.iter().position(|l| l.trim().starts_with("fit model")).ok_or("no fit line")?;
    let call_text = "preds = call model.predict_proba val";

    let mut deleted = lines.clone();
    deleted.remove(set);
    let deleted = deleted.join("\n") + "\n";
    let call_line = deleted.lines().position(|l| l.trim() == call_text).ok_or("no call")? + 1;
    let r = check(&deleted, &[]);
    ensure(r.codes() == ["E-TEMP-002"], || format!("deleted: {:?}", r.codes()))?;
    ensure(r.diagnostics[0].span.start_line == call_line, || format!("deleted: line {}", r.diagnostics[0].span.start_line))?;

    let mut moved = lines.clone();
    let set_text = moved.remove(set);
    moved.insert(fit, set_text);
    let moved = moved.join("\n") + "\n";
    let call_line = moved.lines().position(|l| l.trim() == call_text).ok_or("no call")? + 1;
    let r = check(&moved, &[]);
    ensure(
        r.diagnostics.iter().any(|d| d.code == "E-TEMP-002" && d.span.start_line == call_line),
        || format!("moved: {}", r.render_human()),
    )
}

fn context_warning() -> Outcome {
    let quiet = mlguard(&["check", "programs/context_verbose.mlp", "--format", "records"]);
    ensure(!stdout(&quiet).contains("W-CTX-001"), || stdout(&quiet))?;
    let loud = mlguard(&["check", "programs/context_verbose.mlp", "--context", "multithreaded", "--format", "records"]);
    ensure(stdout(&loud).contains("\tW-CTX-001\twarning\t"), || stdout(&loud))?;
    let other = mlguard(&["check", "programs/context_verbose.mlp", "--context", "gpu", "--format", "records"]);
    ensure(!stdout(&other).contains("W-CTX-001"), || stdout(&other))
}

fn fraction_range() -> Outcome {
    let src = "pipeline p {\n  data = load \"d.csv\"\n  a, b, c = split data ratios (1.5, 0.2, 0.1) seed 1\n}\n";
    let r = check(src, &[]);
    let d = r.diagnostics.iter().find(|d| d.code == "E-TYPE-002").ok_or_else(|| format!("{:?}", r.codes()))?;
    ensure(d.message.contains("between 0 and 1"), || d.message.clone())
}

fn practice_matrix() -> Outcome {
    for code in ["W-ML-001", "W-ML-002", "E-ML-003", "W-ML-004", "E-ML-005", "E-ML-006"] {
        let stem = code.to_lowercase();
        let fail = check(&read(&format!("programs/practices/{stem}-fail.mlp")), &[]);
        ensure(fail.codes() == [code], || format!("{stem}-fail: {:?}", fail.codes()))?;
        let pass = check(&read(&format!("programs/practices/{stem}-pass.mlp")), &[]);
        ensure(pass.diagnostics.is_empty(), || format!("{stem}-pass: {:?}", pass.codes()))?;
    }
    Ok(())
}

/// Shannon entropy in bits computed straight from the definition.
fn entropy_oracle(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / n as f64).map(|p| -p * p.log2()).sum()
}

fn entropy_bounds() -> Outcome {
    for (counts, expected) in [(vec![1, 1, 1, 1], 2.0), (vec![8, 4, 4], 1.5), (vec![5], 0.0)] {
        let h = entropy(&counts).map_err(|e| e.to_string())?;
        ensure((h - expected).abs() < 1e-9, || format!("entropy({counts:?}) = {h}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let k = rng.gen_range(1..=12);
        let uniform = rng.gen_bool(0.2);
        let c0 = rng.gen_range(1..50);
        let counts: Vec<u64> = (0..k).map(|_| if uniform { c0 } else { rng.gen_range(0..50) }).collect();
        if counts.iter().all(|&c| c == 0) {
            continue;
        }
        let h = entropy(&counts).map_err(|e| e.to_string())?;
        let positive = counts.iter().filter(|&&c| c > 0).count() as f64;
        ensure((h - entropy_oracle(&counts)).abs() < 1e-9, || format!("case {case}: {counts:?}"))?;
        ensure(h >= 0.0 && h <= positive.log2() + 1e-9, || format!("case {case}: H={h} for {counts:?}"))?;
        if uniform {
            ensure((h - positive.log2()).abs() < 1e-9, || format!("case {case}: uniform H={h}"))?;
        }
    }
    Ok(())
}

fn split_audit() -> Outcome {
    let meta = ColumnMeta { kind: Some(ColumnKind::Categorical), ..ColumnMeta::default() };
    let schema = SchemaMeta { columns: [("survived".to_string(), meta)].into() };
    let load = |name: &str| {
        let f = fs::File::open(fixtures().join("data").join(name)).map_err(|e| e.to_string())?;
        profile_reader(f, name, Some(&schema)).map_err(|e| e.to_string())
    };
    for (prefix, verdict) in [("strat", Verdict::Stratified), ("skew", Verdict::Skewed)] {
        let full = load(&format!("{prefix}_full.csv"))?;
        let splits = ["train", "val", "test"].map(|s| load(&format!("{prefix}_{s}.csv")));
        let splits: Vec<_> = splits.into_iter().collect::<Result<_, _>>()?;
        let audit = audit_split(&full, &splits, "survived", 0.05).map_err(|e| e.to_string())?;
        ensure(audit.verdict == verdict, || format!("{prefix}: {}", audit.verdict))?;
        let distances: Vec<f64> = audit.splits.iter().map(|s| s.tv_distance).collect();
        match verdict {
            Verdict::Stratified => ensure(distances.iter().all(|d| *d == 0.0), || format!("{distances:?}"))?,
            Verdict::Skewed => ensure((distances[2] - 0.4).abs() < 1e-9, || format!("{distances:?}"))?,
        }
        let paths = ["full", "train", "val", "test"].map(|s| format!("data/{prefix}_{s}.csv"));
        let mut args = vec!["profile", "--label", "survived", "--threshold", "0.05", "--audit-split"];
        args.extend(paths.iter().map(String::as_str));
        let out = mlguard(&args);
        let want = if verdict == Verdict::Stratified { 0 } else { 1 };
        ensure(code(&out) == want && stdout(&out).contains(&format!("verdict: {verdict}")), || stdout(&out))?;
    }
    Ok(())
}

fn typestate_oracle() -> Outcome {
    replay::compare(&bundled::spec(), 0x5eed, 500).map(|_| ())
}

fn determinism() -> Outcome {
    let mut corpus: Vec<String> = error_fixtures();
    corpus.extend(["titanic.mlp", "programs/dep_rbf_degree.mlp", "programs/context_quiet.mlp"].map(String::from));
    for rel in &corpus {
        let src = read(rel);
        let once = format(&parse_source(&src, rel).0);
        let twice = format(&parse_source(&once, rel).0);
        ensure(once == twice, || format!("{rel}: formatter not idempotent"))?;
    }
    let mut args = vec!["check", "--format=records", "--context", "multithreaded"];
    args.extend(corpus.iter().map(String::as_str));
    let (a, b) = (mlguard(&args), mlguard(&args));
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "records differ between runs".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_dir = dir.path().to_str().unwrap();
    let out = mlguard(&["build", "titanic.mlp", "--out-dir", out_dir, "--timestamp", "2020-01-01T00:00:00Z"]);
    ensure(code(&out) == 0, || format!("build exit {}", code(&out)))?;
    for ext in ["out", "manifest"] {
        let got = fs::read(dir.path().join(format!("titanic.{ext}"))).map_err(|e| e.to_string())?;
        let want = fs::read(fixture(&format!("golden/titanic.{ext}"))).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("titanic.{ext} differs from golden"))?;
    }
    Ok(())
}

fn gating() -> Outcome {
    let files = error_fixtures();
    ensure(files.len() >= 8, || format!("only {} error fixtures", files.len()))?;
    for rel in &files {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = mlguard(&["build", rel, "--out-dir", dir.path().to_str().unwrap(), "--timestamp", "t"]);
        let written = fs::read_dir(dir.path()).map_err(|e| e.to_string())?.count();
        ensure(code(&out) == 1 && written == 0, || format!("{rel}: exit {}, {written} files", code(&out)))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = mlguard(&["build", "titanic.mlp", "--out-dir", dir.path().to_str().unwrap(), "--timestamp", "t"]);
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    ensure(code(&out) == 0 && names == ["titanic.manifest", "titanic.out"], || format!("golden: {names:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("misspelled kernel: one E-TYPE-001 at the declaration, five literals, fix \"linear\", exit 1", misspelled_kernel),
        ("degree with rbf kernel warns W-DEP-001; with poly kernel is clean", dependency_relevance),
        ("golden pipeline clean; missing or late probability set gives E-TEMP-002 at predict_proba", probability_before_fit),
        ("verbose=true warns W-CTX-001 only under --context multithreaded", context_warning),
        ("ratio 1.5 against float(0,1) gives E-TYPE-002 mentioning \"between 0 and 1\"", fraction_range),
        ("best-practice pass/fail matrix for six codes", practice_matrix),
        ("entropy oracle values and bounds over 1000 random count vectors", entropy_bounds),
        ("split audit: stratified at distance 0, skewed at distance 0.4", split_audit),
        ("typestate pass equals replay interpreter on 500 random programs", typestate_oracle),
        ("formatter idempotence, byte-stable records, golden build output", determinism),
        ("build gating: error fixtures write nothing and exit 1; golden writes both files", gating),
    ];
    let mut failed = 0;
    for (i, (what, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(()) => println!("PASS {:>2} {what}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {what}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
