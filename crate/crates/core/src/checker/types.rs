//! Refined-type checking of literal arguments.

use super::resolve::{BindingKind, ResolvedProgram};
use super::suggest::suggest_fix;
use crate::apispec::{ApiSpec, EntitySpec, RefinedType, TypeMismatch};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::{Lit, StmtKind};
use crate::lexer::quote;

/// Type of each split fraction.
pub fn split_ratio_type() -> RefinedType {
    RefinedType::float_range(0.0, 1.0)
}

/// Type of a split seed.
pub fn seed_type() -> RefinedType {
    RefinedType::int_at_least(0)
}

/// Builds the diagnostic for a literal that failed `ty`. `subject` names
/// what the value is for, e.g. ``` `kernel` of SVC ```.
pub(crate) fn mismatch_diagnostic(subject: &str, lit: &Lit, ty: &RefinedType, mismatch: TypeMismatch) -> Diagnostic {
    match mismatch {
        TypeMismatch::NotInEnum { allowed, others } => {
            let quoted: Vec<String> = allowed.iter().map(|v| quote(v)).collect();
            let mut expected = format!("one of {}", quoted.join(", "));
            for o in &others {
                expected.push_str(" or ");
                expected.push_str(o);
            }
            let offending = lit.as_text().unwrap_or_default();
            let near = suggest_fix(offending, &allowed);
            let mut message = format!("invalid value {} for {subject}: expected {expected}", lit.value);
            if near.is_empty() {
                message.push_str("; no close match among the valid values");
            }
            let mut d = Diagnostic::new(codes::NOT_IN_ENUM, lit.span.clone(), message);
            for n in near {
                d = d.with_fix(lit.span.clone(), quote(&n), format!("replace with {}", quote(&n)));
            }
            d
        }
        TypeMismatch::OutOfRange { expected } => Diagnostic::new(
            codes::OUT_OF_RANGE,
            lit.span.clone(),
            format!("value {} for {subject} is out of range: must be {expected}", lit.value),
        ),
        TypeMismatch::WrongKind { expected } => {
            let mut d = Diagnostic::new(
                codes::WRONG_KIND,
                lit.span.clone(),
                format!(
                    "value {} for {subject} has the wrong kind: expected {expected}, found {}",
                    lit.value,
                    lit.value.kind()
                ),
            );
            // A single-literal enum has an obvious replacement.
            if let [only] = ty.enum_literals()[..] {
                d = d.with_fix(lit.span.clone(), quote(only), format!("replace with {}", quote(only)));
            }
            d
        }
    }
}

fn check_arg(entity: &EntitySpec, param: &str, lit: &Lit, out: &mut Vec<Diagnostic>) {
    let Some(p) = entity.param(param) else { return };
    if let Err(m) = p.ty.check(&lit.value) {
        out.push(mismatch_diagnostic(&format!("`{param}` of {}", entity.name), lit, &p.ty, m));
    }
}

/// Checks every literal against the refined type it is bound to.
pub fn check_types(p: &ResolvedProgram, spec: &ApiSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        match &stmt.kind {
            StmtKind::ModelDecl { entity, args, .. } | StmtKind::TransformDecl { entity, args, .. } => {
                let Some(e) = spec.entities.get(&entity.name) else { continue };
                let declared_kind_ok = matches!(
                    (&stmt.kind, e.kind),
                    (StmtKind::ModelDecl { .. }, crate::apispec::EntityKind::Model)
                        | (StmtKind::TransformDecl { .. }, crate::apispec::EntityKind::Transform)
                );
                if !declared_kind_ok {
                    continue;
                }
                for a in args {
                    check_arg(e, &a.name.name, &a.value, &mut out);
                }
            }
            StmtKind::SetParam { param, value, .. } => {
                let Some(m) = p.use_of(i, 0) else { continue };
                if let BindingKind::Model { entity, .. } = &p.binding(m).kind {
                    if let Some(e) = spec.entities.get(entity) {
                        check_arg(e, &param.name, value, &mut out);
                    }
                }
            }
            StmtKind::Split { ratios, seed, .. } => {
                let ty = split_ratio_type();
                for r in &ratios.values {
                    if let Err(m) = ty.check(&r.value) {
                        out.push(mismatch_diagnostic("split ratio", r, &ty, m));
                    }
                }
                if let Some(s) = seed {
                    let ty = seed_type();
                    if let Err(m) = ty.check(&s.value) {
                        out.push(mismatch_diagnostic("split seed", s, &ty, m));
                    }
                }
            }
            _ => {}
        }
    }
    out
}
