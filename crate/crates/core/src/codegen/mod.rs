//! Template-based code generation and run manifests.

mod backend;

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

pub use backend::{load_backend, placeholders, BackendError, BackendTemplate, Template, REQUIRED_KEYS};

use crate::apispec::Literal;
use crate::checker::{BindingKind, CheckReport, ResolvedProgram};
use crate::dsl::{Arg, Lit, StmtKind};
use crate::lexer::quote;

/// Generation was refused because the report has errors.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct Refusal {
    pub error_count: usize,
    /// Distinct blocking codes, sorted.
    pub codes: Vec<&'static str>,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "refusing to generate code: {} error{} ({})",
            self.error_count,
            if self.error_count == 1 { "" } else { "s" },
            self.codes.join(", ")
        )
    }
}

fn literal(b: &BackendTemplate, lit: &Literal) -> String {
    match lit {
        Literal::Bool(true) => b.true_literal.clone(),
        Literal::Bool(false) => b.false_literal.clone(),
        Literal::Text(t) => quote(t),
        other => other.to_string(),
    }
}

fn opt_literal(b: &BackendTemplate, lit: Option<&Lit>) -> String {
    lit.map_or_else(|| b.none_literal.clone(), |l| literal(b, &l.value))
}

fn args(b: &BackendTemplate, args: &[Arg]) -> String {
    args.iter().map(|a| format!("{}={}", a.name.name, literal(b, &a.value.value))).collect::<Vec<_>>().join(", ")
}

/// Renders the program through `backend`. Refuses when the report
/// carries any error; warnings do not block.
pub fn generate(program: &ResolvedProgram, report: &CheckReport, backend: &BackendTemplate) -> Result<String, Refusal> {
    if report.error_count > 0 {
        let mut codes: Vec<&'static str> = report.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.code).collect();
        codes.sort();
        codes.dedup();
        return Err(Refusal { error_count: report.error_count, codes });
    }
    let pipeline = program.ast.name.name.clone();
    let common = |step: usize| -> BTreeMap<&'static str, String> {
        BTreeMap::from([("pipeline", pipeline.clone()), ("step", step.to_string())])
    };
    let mut out = backend.template("preamble", &[]).render(&common(0));
    for (i, stmt) in program.ast.statements.iter().enumerate() {
        let mut v = common(i + 1);
        let mut qualifiers: Vec<&str> = Vec::new();
        match &stmt.kind {
            StmtKind::Load { var, path, schema } => {
                v.insert("var", var.name.clone());
                v.insert("path", literal(backend, &path.value));
                v.insert("schema", opt_literal(backend, schema.as_ref()));
            }
            StmtKind::Split { train, val, test, source, ratios, stratify, seed } => {
                v.insert("train", train.name.clone());
                v.insert("val", val.name.clone());
                v.insert("test", test.name.clone());
                v.insert("source", source.name.clone());
                for (key, r) in ["train_ratio", "val_ratio", "test_ratio"].into_iter().zip(&ratios.values) {
                    v.insert(key, literal(backend, &r.value));
                }
                v.insert("stratify", opt_literal(backend, stratify.as_ref()));
                v.insert("seed", opt_literal(backend, seed.as_ref()));
            }
            StmtKind::TransformDecl { var, entity, args: a, fit_on } => {
                v.insert("var", var.name.clone());
                v.insert("entity", entity.name.clone());
                v.insert("args", args(backend, a));
                v.insert("dataset", fit_on.name.clone());
                qualifiers.push(&entity.name);
            }
            StmtKind::Apply { var, transform, dataset } => {
                v.insert("var", var.name.clone());
                v.insert("transform", transform.name.clone());
                v.insert("dataset", dataset.name.clone());
                if let Some(e) = program.use_of(i, 0).and_then(|t| entity_name(program, t)) {
                    qualifiers.push(e);
                }
            }
            StmtKind::ModelDecl { var, entity, args: a } => {
                v.insert("var", var.name.clone());
                v.insert("entity", entity.name.clone());
                v.insert("args", args(backend, a));
                qualifiers.push(&entity.name);
            }
            StmtKind::SetParam { model, param, value } => {
                v.insert("model", model.name.clone());
                v.insert("param", param.name.clone());
                v.insert("value", literal(backend, &value.value));
            }
            StmtKind::Fit { model, dataset, label } => {
                v.insert("model", model.name.clone());
                v.insert("dataset", dataset.name.clone());
                v.insert("label", literal(backend, &label.value));
            }
            StmtKind::Call { var, model, method, dataset } => {
                v.insert("assign", var.as_ref().map_or_else(String::new, |x| format!("{} = ", x.name)));
                v.insert("var", var.as_ref().map_or_else(String::new, |x| x.name.clone()));
                v.insert("model", model.name.clone());
                v.insert("method", method.name.clone());
                v.insert("dataset", dataset.name.clone());
                qualifiers.push(&method.name);
            }
            StmtKind::Evaluate { var, metric, model, dataset } => {
                v.insert("var", var.name.clone());
                v.insert("metric", metric.name.clone());
                v.insert("model", model.name.clone());
                v.insert("dataset", dataset.name.clone());
                qualifiers.push(&metric.name);
            }
            StmtKind::Require { metric, op, threshold } => {
                v.insert("metric", metric.name.clone());
                v.insert("op", op.symbol().to_string());
                v.insert("threshold", literal(backend, &threshold.value));
            }
        }
        out.push_str(&backend.template(stmt.construct(), &qualifiers).render(&v));
    }
    out.push_str(&backend.template("postamble", &[]).render(&common(program.ast.statements.len() + 1)));
    Ok(out)
}

fn entity_name(program: &ResolvedProgram, id: usize) -> Option<&str> {
    match &program.binding(id).kind {
        BindingKind::Transform { entity, .. } | BindingKind::Model { entity, .. } => Some(entity),
        _ => None,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A named input file and the digest of its exact bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashedInput {
    pub name: String,
    pub sha256: String,
}

impl HashedInput {
    pub fn new(name: &str, bytes: &[u8]) -> HashedInput {
        HashedInput { name: name.to_string(), sha256: sha256_hex(bytes) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecInput {
    pub file: HashedInput,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub metric: String,
    pub op: String,
    pub threshold: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunManifest {
    pub pipeline: String,
    pub source: HashedInput,
    pub specs: Vec<SpecInput>,
    pub backend_name: String,
    pub backend_version: String,
    pub profiles: Vec<HashedInput>,
    pub seed: Option<String>,
    pub requirements: Vec<Requirement>,
    pub created: String,
}

/// Collects the reproducibility record of a build. The seed is taken
/// from the first split that declares one.
pub fn emit_run_manifest(
    program: &ResolvedProgram,
    source: HashedInput,
    specs: Vec<SpecInput>,
    backend: &BackendTemplate,
    profiles: Vec<HashedInput>,
    created: &str,
) -> RunManifest {
    let seed = program.ast.statements.iter().find_map(|s| match &s.kind {
        StmtKind::Split { seed: Some(seed), .. } => Some(seed.value.to_string()),
        _ => None,
    });
    let requirements = program
        .ast
        .statements
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Require { metric, op, threshold } => Some(Requirement {
                metric: metric.name.clone(),
                op: op.symbol().to_string(),
                threshold: threshold.value.to_string(),
            }),
            _ => None,
        })
        .collect();
    RunManifest {
        pipeline: program.ast.name.name.clone(),
        source,
        specs,
        backend_name: backend.name.clone(),
        backend_version: backend.version.clone(),
        profiles,
        seed,
        requirements,
        created: created.to_string(),
    }
}

impl fmt::Display for RunManifest {
    /// One `key = value` per line, keys in a fixed order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pipeline = {}", self.pipeline)?;
        writeln!(f, "source = {}", self.source.name)?;
        writeln!(f, "source_sha256 = {}", self.source.sha256)?;
        for (i, s) in self.specs.iter().enumerate() {
            writeln!(f, "spec.{} = {} {} {}", i + 1, s.file.name, s.version, s.file.sha256)?;
        }
        writeln!(f, "backend = {} {}", self.backend_name, self.backend_version)?;
        for (i, p) in self.profiles.iter().enumerate() {
            writeln!(f, "profile.{} = {} {}", i + 1, p.name, p.sha256)?;
        }
        writeln!(f, "seed = {}", self.seed.as_deref().unwrap_or("none"))?;
        for (i, r) in self.requirements.iter().enumerate() {
            writeln!(f, "requirement.{} = {} {} {}", i + 1, r.metric, r.op, r.threshold)?;
        }
        writeln!(f, "created = {}", self.created)
    }
}
