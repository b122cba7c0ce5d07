//! Static checking of resolved pipelines.

mod context;
mod deps;
mod practices;
mod resolve;
mod suggest;
mod temporal;
mod types;

use std::collections::BTreeSet;

pub use context::check_context;
pub use deps::check_dependencies;
pub use practices::{check_best_practices, RATIO_SUM_TOLERANCE};
pub use resolve::{resolve, Binding, BindingId, BindingKind, DatasetRole, ResolvedProgram};
pub use suggest::{damerau_levenshtein, suggest_fix, MAX_SUGGESTION_DISTANCE};
pub use temporal::{check_temporal, simulate, ModelTypestate, APPLY_METHOD, EVALUATE_METHOD};
pub use types::{check_types, seed_type, split_ratio_type};

use crate::apispec::ApiSpec;
use crate::diagnostic::{Diagnostic, Severity};
use crate::dsl::{parse_source, Pipeline};
use crate::profiler::DataProfile;

/// The analysis passes that run after name resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pass {
    Types,
    Dependencies,
    Temporal,
    Context,
    Practices,
}

impl Pass {
    pub const ALL: [Pass; 5] = [Pass::Types, Pass::Dependencies, Pass::Temporal, Pass::Context, Pass::Practices];

    /// Code prefix of the diagnostics this pass emits.
    pub fn code_prefixes(self) -> &'static [&'static str] {
        match self {
            Pass::Types => &["E-TYPE-"],
            Pass::Dependencies => &["W-DEP-"],
            Pass::Temporal => &["E-TEMP-"],
            Pass::Context => &["W-CTX-"],
            Pass::Practices => &["W-ML-", "E-ML-"],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    /// Declared execution contexts, e.g. `multithreaded`.
    pub contexts: BTreeSet<String>,
    /// Data profiles; profile-dependent rules are skipped when `None`.
    pub profiles: Option<Vec<DataProfile>>,
    /// Report skipped rules as an info diagnostic.
    pub strict: bool,
    /// Passes to leave out. Used by tests.
    pub disabled: BTreeSet<Pass>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub diagnostics: Vec<Diagnostic>,
    pub error_count: usize,
    pub warning_count: usize,
    pub info_count: usize,
}

impl CheckReport {
    /// Sorts by file, start offset, code and message, drops exact
    /// duplicates and recounts.
    pub fn new(mut diagnostics: Vec<Diagnostic>) -> CheckReport {
        diagnostics.sort_by(|a, b| {
            (&a.span.file, a.span.start_byte, a.code, &a.message, a.span.end_byte).cmp(&(
                &b.span.file,
                b.span.start_byte,
                b.code,
                &b.message,
                b.span.end_byte,
            ))
        });
        diagnostics.dedup();
        let count = |s: Severity| diagnostics.iter().filter(|d| d.severity == s).count();
        CheckReport {
            error_count: count(Severity::Error),
            warning_count: count(Severity::Warning),
            info_count: count(Severity::Info),
            diagnostics,
        }
    }

    /// Turns every warning into an error, for `--deny-warnings`.
    pub fn deny_warnings(self) -> CheckReport {
        let diagnostics = self
            .diagnostics
            .into_iter()
            .map(|mut d| {
                if d.severity == Severity::Warning {
                    d.severity = Severity::Error;
                }
                d
            })
            .collect();
        CheckReport::new(diagnostics)
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }

    pub fn render_human(&self) -> String {
        self.diagnostics.iter().map(Diagnostic::render_human).collect()
    }

    pub fn render_records(&self) -> String {
        self.diagnostics.iter().map(Diagnostic::render_record).collect()
    }
}

/// Resolves `ast` and runs every enabled pass. `syntax` carries the
/// diagnostics from lexing and parsing, which are merged into the report.
pub fn check_program(
    ast: &Pipeline,
    syntax: Vec<Diagnostic>,
    spec: &ApiSpec,
    opts: &CheckOptions,
) -> (ResolvedProgram, CheckReport) {
    let (program, mut diags) = resolve(ast, spec);
    diags.extend(syntax);
    let on = |pass: Pass| !opts.disabled.contains(&pass);
    if on(Pass::Types) {
        diags.extend(check_types(&program, spec));
    }
    if on(Pass::Dependencies) {
        diags.extend(check_dependencies(&program, spec));
    }
    if on(Pass::Temporal) {
        diags.extend(check_temporal(&program, spec));
    }
    if on(Pass::Context) {
        diags.extend(check_context(&program, spec, &opts.contexts));
    }
    if on(Pass::Practices) {
        diags.extend(check_best_practices(&program, spec, opts.profiles.as_deref(), opts.strict));
    }
    (program, CheckReport::new(diags))
}

/// Parses and checks one source file.
pub fn check_source(source: &str, file: &str, spec: &ApiSpec, opts: &CheckOptions) -> (ResolvedProgram, CheckReport) {
    let (ast, syntax) = parse_source(source, file);
    check_program(&ast, syntax, spec, opts)
}
