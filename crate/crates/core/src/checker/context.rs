//! Execution-context constraints.

use std::collections::BTreeSet;

use super::resolve::ResolvedProgram;
use crate::apispec::{ApiSpec, EntitySpec};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::{Lit, StmtKind};
use crate::span::SourceSpan;

fn check_value(entity: &EntitySpec, param: &str, lit: &Lit, span: &SourceSpan, contexts: &BTreeSet<String>, out: &mut Vec<Diagnostic>) {
    let Some(p) = entity.param(param) else { return };
    let Some(w) = &p.context_warning else { return };
    if !contexts.contains(&w.tag) || p.ty.check(&lit.value).is_err() {
        return;
    }
    // Writing the default value changes nothing at runtime.
    if p.default.as_ref().is_some_and(|d| d.same_value(&lit.value)) {
        return;
    }
    out.push(Diagnostic::new(
        codes::CONTEXT,
        span.clone(),
        format!("{param}={} in a {} context: {}", lit.value, w.tag, w.message),
    ));
}

/// Reports explicit values whose parameter carries a warning for one of
/// the declared execution contexts.
pub fn check_context(p: &ResolvedProgram, spec: &ApiSpec, contexts: &BTreeSet<String>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if contexts.is_empty() {
        return out;
    }
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        match &stmt.kind {
            StmtKind::ModelDecl { var, args, .. } | StmtKind::TransformDecl { var, args, .. } => {
                let Some(id) = p.defined_by(i, &var.name) else { continue };
                let Some(e) = p.entity(spec, id) else { continue };
                for a in args {
                    check_value(e, &a.name.name, &a.value, &a.span, contexts, &mut out);
                }
            }
            StmtKind::SetParam { param, value, .. } => {
                let Some(id) = p.use_of(i, 0) else { continue };
                let Some(e) = p.entity(spec, id) else { continue };
                check_value(e, &param.name, value, &stmt.span, contexts, &mut out);
            }
            _ => {}
        }
    }
    out
}
