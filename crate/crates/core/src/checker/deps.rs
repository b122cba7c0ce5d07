//! Dependency constraints: arguments that only matter when another
//! parameter has a particular value.

use super::resolve::{BindingId, ResolvedProgram};
use crate::apispec::{ApiSpec, EntitySpec, Literal};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::{Lit, StmtKind};
use crate::span::SourceSpan;

/// First statement that consumes the model or transform: `fit`, `call`,
/// `evaluate` or `apply`.
pub(crate) fn first_use(p: &ResolvedProgram, id: BindingId) -> Option<usize> {
    p.ast.statements.iter().enumerate().position(|(i, s)| {
        matches!(s.kind, StmtKind::Fit { .. } | StmtKind::Call { .. } | StmtKind::Evaluate { .. } | StmtKind::Apply { .. })
            && p.use_of(i, 0) == Some(id)
    })
}

/// Explicit assignments to the binding's parameters in program order:
/// constructor arguments first, then `set` statements.
fn assignments(p: &ResolvedProgram, id: BindingId) -> Vec<(usize, &str, &Lit, SourceSpan)> {
    let mut out = Vec::new();
    let def = p.binding(id).stmt;
    match &p.ast.statements[def].kind {
        StmtKind::ModelDecl { args, .. } | StmtKind::TransformDecl { args, .. } => {
            for a in args {
                out.push((def, a.name.name.as_str(), &a.value, a.span.clone()));
            }
        }
        _ => {}
    }
    for (i, s) in p.ast.statements.iter().enumerate().skip(def + 1) {
        if let StmtKind::SetParam { param, value, .. } = &s.kind {
            if p.use_of(i, 0) == Some(id) {
                out.push((i, param.name.as_str(), value, s.span.clone()));
            }
        }
    }
    out
}

/// Value of `param` when the binding is first used: the last explicit
/// assignment before that point, else the spec default.
pub(crate) fn effective_value<'a>(
    p: &'a ResolvedProgram,
    entity: &'a EntitySpec,
    id: BindingId,
    param: &str,
) -> Option<&'a Literal> {
    let limit = first_use(p, id).unwrap_or(usize::MAX);
    let explicit = assignments(p, id)
        .into_iter()
        .rfind(|(stmt, name, _, _)| *stmt < limit && *name == param)
        .map(|(_, _, lit, _)| &lit.value);
    explicit.or_else(|| entity.param(param)?.default.as_ref())
}

pub fn check_dependencies(p: &ResolvedProgram, spec: &ApiSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for id in 0..p.bindings.len() {
        let Some(entity) = p.entity(spec, id) else { continue };
        for (_, name, lit, span) in assignments(p, id) {
            let Some(param) = entity.param(name) else { continue };
            let Some(cond) = &param.relevant_when else { continue };
            if param.ty.check(&lit.value).is_err() {
                continue;
            }
            let Some(ctrl) = entity.param(&cond.param) else { continue };
            let Some(actual) = effective_value(p, entity, id, &cond.param) else { continue };
            if ctrl.ty.check(actual).is_err() || cond.holds(actual) {
                continue;
            }
            out.push(Diagnostic::new(
                codes::IRRELEVANT_ARG,
                span,
                format!("{name} is only relevant when {cond} ({} is {actual})", cond.param),
            ));
        }
    }
    out
}
