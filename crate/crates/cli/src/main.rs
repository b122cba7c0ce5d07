//! `mlguard`: check, build and profile ML pipeline programs.
//!
//! Exit codes: 0 success, 1 blocking findings, 2 usage or I/O failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mlguard_core::apispec::{merge_specs, parse_api_spec, ApiSpec, ProblemKind};
use mlguard_core::bundled;
use mlguard_core::checker::{check_source, CheckOptions, CheckReport};
use mlguard_core::codegen::{emit_run_manifest, generate, load_backend, BackendTemplate, HashedInput, SpecInput};
use mlguard_core::diagnostic::registry;
use mlguard_core::profiler::{
    advise, audit_split, parse_profile, parse_schema, profile_reader, write_profile, ColumnKind, ColumnMeta,
    DataProfile, SchemaMeta, SuggestionKind, DEFAULT_SPLIT_THRESHOLD,
};

/// Environment variable consulted for the manifest timestamp.
const TIMESTAMP_ENV: &str = "MLGUARD_TIMESTAMP";

#[derive(Parser)]
#[command(name = "mlguard", version, about = "Static checking and guidance for ML pipeline programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Records,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Task {
    Classification,
    Regression,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// API spec files; the bundled specs are used when none are given.
    #[arg(long = "spec", value_name = "FILE")]
    specs: Vec<PathBuf>,
    /// Data profiles written by `mlguard profile`.
    #[arg(long = "profile", value_name = "FILE")]
    profiles: Vec<PathBuf>,
    /// Execution contexts the pipeline will run in, e.g. `multithreaded`.
    #[arg(long = "context", value_name = "TAG")]
    contexts: Vec<String>,
    /// Treat warnings as blocking.
    #[arg(long)]
    deny_warnings: bool,
    /// Report rules that were skipped for lack of data profiles.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check pipeline programs and print diagnostics.
    Check {
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: CheckArgs,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Check a pipeline and, if it has no errors, generate code and a run manifest.
    Build {
        #[arg(value_name = "FILE")]
        file: PathBuf,
        #[command(flatten)]
        opts: CheckArgs,
        /// Backend template; the bundled reference backend by default.
        #[arg(long, value_name = "FILE")]
        backend: Option<PathBuf>,
        /// Directory for the outputs; defaults to the source's directory.
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Fixed manifest timestamp (also read from MLGUARD_TIMESTAMP).
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Profile a CSV file, or audit a train/validation/test split.
    Profile {
        #[arg(value_name = "CSV", required_unless_present = "audit_split")]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        schema: Option<PathBuf>,
        /// Label column; excluded from feature advice.
        #[arg(long)]
        label: Option<String>,
        /// Problem type used for metric and algorithm advice.
        #[arg(long, value_enum)]
        task: Option<Task>,
        /// Where to write the profile; defaults to `<csv stem>.profile` beside the input.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Compare the label distribution of each split with the full data.
        #[arg(long, num_args = 4, value_names = ["FULL", "TRAIN", "VAL", "TEST"], requires = "label")]
        audit_split: Option<Vec<PathBuf>>,
        /// Largest total variation distance still counted as stratified.
        #[arg(long, default_value_t = DEFAULT_SPLIT_THRESHOLD)]
        threshold: f64,
    },
    /// Print the long explanation of a diagnostic code.
    Explain {
        #[arg(value_name = "CODE")]
        code: String,
    },
}

/// A failure that ends the run with exit code 2.
struct Fatal(String);

type Run<T> = Result<T, Fatal>;

fn read(path: &Path) -> Run<Vec<u8>> {
    fs::read(path).map_err(|e| Fatal(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Run<String> {
    String::from_utf8(read(path)?).map_err(|_| Fatal(format!("{} is not valid UTF-8", path.display())))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Loads and merges the spec files, keeping each file's version and digest.
fn load_specs(paths: &[PathBuf]) -> Run<(ApiSpec, Vec<SpecInput>)> {
    let sources: Vec<(String, Vec<u8>)> = if paths.is_empty() {
        bundled::SPECS.iter().map(|(n, s)| (n.to_string(), s.as_bytes().to_vec())).collect()
    } else {
        paths.iter().map(|p| Ok((p.display().to_string(), read(p)?))).collect::<Run<_>>()?
    };
    let mut parsed = Vec::new();
    let mut inputs = Vec::new();
    for (name, bytes) in &sources {
        let text = std::str::from_utf8(bytes).map_err(|_| Fatal(format!("{name} is not valid UTF-8")))?;
        let spec = parse_api_spec(text).map_err(|errs| {
            Fatal(errs.iter().map(|e| format!("{name}: {e}")).collect::<Vec<_>>().join("\n"))
        })?;
        let short = file_name(Path::new(name));
        inputs.push(SpecInput { file: HashedInput::new(&short, bytes), version: spec.version.clone() });
        parsed.push((name.clone(), spec));
    }
    let refs: Vec<(&str, &ApiSpec)> = parsed.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let merged = merge_specs(&refs).map_err(|e| Fatal(e.to_string()))?;
    Ok((merged, inputs))
}

fn load_profiles(paths: &[PathBuf]) -> Run<(Option<Vec<DataProfile>>, Vec<HashedInput>)> {
    if paths.is_empty() {
        return Ok((None, Vec::new()));
    }
    let mut profiles = Vec::new();
    let mut inputs = Vec::new();
    for p in paths {
        let bytes = read(p)?;
        let text = String::from_utf8_lossy(&bytes);
        let profile = parse_profile(&text).map_err(|e| Fatal(format!("{}: {e}", p.display())))?;
        inputs.push(HashedInput::new(&file_name(p), &bytes));
        profiles.push(profile);
    }
    Ok((Some(profiles), inputs))
}

fn check_options(args: &CheckArgs, profiles: Option<Vec<DataProfile>>) -> CheckOptions {
    CheckOptions {
        contexts: args.contexts.iter().cloned().collect::<BTreeSet<_>>(),
        profiles,
        strict: args.strict,
        disabled: BTreeSet::new(),
    }
}

fn blocking(report: &CheckReport, deny_warnings: bool) -> bool {
    report.error_count > 0 || (deny_warnings && report.warning_count > 0)
}

fn summary(report: &CheckReport) -> String {
    let plural = |n: usize, w: &str| format!("{n} {w}{}", if n == 1 { "" } else { "s" });
    format!("{}, {}", plural(report.error_count, "error"), plural(report.warning_count, "warning"))
}

fn cmd_check(files: &[PathBuf], args: &CheckArgs, format: Format) -> Run<u8> {
    let (spec, _) = load_specs(&args.specs)?;
    let (profiles, _) = load_profiles(&args.profiles)?;
    let sources = files.iter().map(|f| read_text(f)).collect::<Run<Vec<_>>>()?;
    let opts = check_options(args, profiles);
    let mut blocked = false;
    for (path, src) in files.iter().zip(&sources) {
        let name = path.display().to_string();
        let (_, report) = check_source(src, &name, &spec, &opts);
        match format {
            Format::Human => {
                print!("{}", report.render_human());
                eprintln!("{name}: {}", summary(&report));
            }
            Format::Records => print!("{}", report.render_records()),
        }
        blocked |= blocking(&report, args.deny_warnings);
    }
    Ok(u8::from(blocked))
}

fn load_backend_file(path: Option<&Path>) -> Run<BackendTemplate> {
    let (name, text) = match path {
        Some(p) => (p.display().to_string(), read_text(p)?),
        None => ("reference.mlbackend".to_string(), bundled::REFERENCE_BACKEND.to_string()),
    };
    load_backend(&text)
        .map_err(|errs| Fatal(errs.iter().map(|e| format!("{name}: {e}")).collect::<Vec<_>>().join("\n")))
}

fn timestamp(flag: Option<&str>) -> String {
    match flag.map(str::to_string).or_else(|| std::env::var(TIMESTAMP_ENV).ok()) {
        Some(t) => t,
        None => chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

fn cmd_build(
    file: &Path,
    args: &CheckArgs,
    backend: Option<&Path>,
    out_dir: Option<&Path>,
    fixed_time: Option<&str>,
) -> Run<u8> {
    let (spec, spec_inputs) = load_specs(&args.specs)?;
    let (profiles, profile_inputs) = load_profiles(&args.profiles)?;
    let backend = load_backend_file(backend)?;
    let bytes = read(file)?;
    let src = String::from_utf8(bytes.clone()).map_err(|_| Fatal(format!("{} is not valid UTF-8", file.display())))?;
    let name = file.display().to_string();
    let (program, report) = check_source(&src, &name, &spec, &check_options(args, profiles));
    print!("{}", report.render_human());
    eprintln!("{name}: {}", summary(&report));
    let gate = if args.deny_warnings { report.clone().deny_warnings() } else { report };
    let code = match generate(&program, &gate, &backend) {
        Ok(code) => code,
        Err(refusal) => {
            eprintln!("{refusal}");
            return Ok(1);
        }
    };
    let manifest = emit_run_manifest(
        &program,
        HashedInput::new(&file_name(file), &bytes),
        spec_inputs,
        &backend,
        profile_inputs,
        &timestamp(fixed_time),
    );
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => file.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let stem = program.ast.name.name.clone();
    let out_path = dir.join(format!("{stem}.out"));
    let manifest_path = dir.join(format!("{stem}.manifest"));
    let write = |p: &Path, text: &str| fs::write(p, text).map_err(|e| Fatal(format!("cannot write {}: {e}", p.display())));
    write(&out_path, &code)?;
    if let Err(e) = write(&manifest_path, &manifest.to_string()) {
        let _ = fs::remove_file(&out_path);
        return Err(e);
    }
    eprintln!("wrote {} and {}", out_path.display(), manifest_path.display());
    Ok(0)
}

/// The schema with the label column forced to categorical, so its value
/// distribution is recorded.
fn schema_with_label(schema: Option<&SchemaMeta>, label: Option<&str>) -> Option<SchemaMeta> {
    let mut s = schema.cloned();
    if let Some(label) = label {
        let s = s.get_or_insert_with(SchemaMeta::default);
        let meta = s.columns.entry(label.to_string()).or_insert_with(ColumnMeta::default);
        meta.kind = Some(ColumnKind::Categorical);
    }
    s
}

fn profile_file(path: &Path, schema: Option<&SchemaMeta>, label: Option<&str>) -> Run<DataProfile> {
    let bytes = read(path)?;
    let mut p = profile_reader(bytes.as_slice(), &path.display().to_string(), schema)
        .map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    p.label_column = label.map(str::to_string);
    Ok(p)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn print_profile(p: &DataProfile) {
    println!("{}: {} rows, {} columns", p.source, p.row_count, p.columns.len());
    for c in &p.columns {
        let mut line = format!(
            "  {:<16} {:<11} missing {:>5}  distinct {:>5}  entropy {:.4}",
            c.name, c.kind, c.missing_count, c.distinct_count, c.entropy_bits
        );
        if c.kind == ColumnKind::Numeric {
            line.push_str(&format!(
                "  min {} max {} mean {} std {} ({})",
                fmt_opt(c.min),
                fmt_opt(c.max),
                fmt_opt(c.mean),
                fmt_opt(c.std),
                c.normalization
            ));
        }
        println!("{line}");
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_profile(
    csv: Option<&Path>,
    schema: Option<&Path>,
    label: Option<&str>,
    task: Option<Task>,
    out: Option<&Path>,
    audit: Option<&[PathBuf]>,
    threshold: f64,
) -> Run<u8> {
    let schema = match schema {
        Some(p) => Some(parse_schema(&read_text(p)?).map_err(|e| Fatal(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let forced = schema_with_label(schema.as_ref(), label);
    let mut status = 0;
    if let Some(csv) = csv {
        let profile = profile_file(csv, forced.as_ref(), label)?;
        let target = out.map(Path::to_path_buf).unwrap_or_else(|| csv.with_extension("profile"));
        fs::write(&target, write_profile(&profile))
            .map_err(|e| Fatal(format!("cannot write {}: {e}", target.display())))?;
        print_profile(&profile);
        let (spec, _) = load_specs(&[])?;
        let problem = match task {
            Some(Task::Regression) => ProblemKind::Regression,
            _ => ProblemKind::Classification,
        };
        let suggestions = advise(problem, &profile, schema.as_ref(), &spec);
        println!("advice:");
        for s in suggestions {
            if task.is_none() && matches!(s.kind, SuggestionKind::Metric | SuggestionKind::Algorithm) {
                continue;
            }
            println!("  {s}");
        }
        eprintln!("wrote {}", target.display());
    }
    if let (Some(paths), Some(label)) = (audit, label) {
        let profiles = paths.iter().map(|p| profile_file(p, forced.as_ref(), Some(label))).collect::<Run<Vec<_>>>()?;
        let audit = audit_split(&profiles[0], &profiles[1..], label, threshold)
            .map_err(|e| Fatal(format!("split audit: {e}")))?;
        for s in &audit.splits {
            println!("{}: tv distance {:.6}", s.source, s.tv_distance);
        }
        println!("verdict: {} (label {}, threshold {})", audit.verdict, audit.label, audit.threshold);
        if audit.verdict == mlguard_core::profiler::Verdict::Skewed {
            status = 1;
        }
    }
    Ok(status)
}

fn cmd_explain(code: &str) -> Run<u8> {
    match registry().render(code) {
        Some(text) => {
            print!("{text}");
            Ok(0)
        }
        None => Err(Fatal(format!("unknown diagnostic code `{code}`"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { files, opts, format } => cmd_check(files, opts, *format),
        Command::Build { file, opts, backend, out_dir, timestamp } => {
            cmd_build(file, opts, backend.as_deref(), out_dir.as_deref(), timestamp.as_deref())
        }
        Command::Profile { csv, schema, label, task, out, audit_split, threshold } => cmd_profile(
            csv.as_deref(),
            schema.as_deref(),
            label.as_deref(),
            *task,
            out.as_deref(),
            audit_split.as_deref(),
            *threshold,
        ),
        Command::Explain { code } => cmd_explain(code),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
