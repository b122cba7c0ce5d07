use std::collections::HashSet;

use super::*;

/// Structural invariants of a refined type.
pub(crate) fn check_type_shape(ty: &RefinedType) -> Result<(), String> {
    match ty {
        RefinedType::EnumLiterals(values) => {
            if values.is_empty() {
                return Err("enum must list at least one literal".into());
            }
            let mut seen = HashSet::new();
            for v in values {
                if !seen.insert(v) {
                    return Err(format!("enum lists {} more than once", crate::lexer::quote(v)));
                }
            }
            Ok(())
        }
        RefinedType::NumericRange { min: Some(lo), max: Some(hi), min_inclusive, max_inclusive, .. } => {
            if lo > hi || (lo == hi && !(*min_inclusive && *max_inclusive)) {
                Err(format!("empty range: lower bound {} exceeds upper bound {}", fmt_number(*lo), fmt_number(*hi)))
            } else {
                Ok(())
            }
        }
        RefinedType::Union(members) => {
            if members.len() < 2 {
                return Err("union needs at least two members".into());
            }
            for (i, m) in members.iter().enumerate() {
                if matches!(m, RefinedType::Union(_)) {
                    return Err("union members must not be unions".into());
                }
                if members[..i].contains(m) {
                    return Err(format!("union lists `{}` more than once", m.describe()));
                }
                check_type_shape(m)?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Invariants local to one entity. Errors name the entity and, where
/// applicable, the offending member in `field`.
pub(crate) fn validate_entity(e: &EntitySpec) -> Vec<SpecError> {
    let mut errors = Vec::new();
    let err = |field: Option<&str>, msg: String| {
        let mut se = SpecError::new(msg).in_entity(&e.name);
        if let Some(f) = field {
            se = se.field(f);
        }
        se
    };

    let mut names = HashSet::new();
    for p in &e.params {
        if !names.insert(&p.name) {
            errors.push(err(Some(&p.name), format!("duplicate param `{}`", p.name)));
        }
    }
    let mut names = HashSet::new();
    for m in &e.methods {
        if !names.insert(&m.name) {
            errors.push(err(Some(&m.name), format!("duplicate method `{}`", m.name)));
        }
    }
    if e.kind == EntityKind::Model && e.method("fit").is_none() {
        errors.push(err(None, "model entity must declare a `fit` method".into()));
    }

    for p in &e.params {
        if let Err(msg) = check_type_shape(&p.ty) {
            errors.push(err(Some(&p.name), msg));
            continue;
        }
        if let Some(default) = &p.default {
            match p.ty.check(default) {
                Ok(()) => {}
                Err(TypeMismatch::OutOfRange { expected }) => errors.push(err(
                    Some(&p.name),
                    format!("default violates declared range ({default} is not {expected})"),
                )),
                Err(_) => errors.push(err(
                    Some(&p.name),
                    format!("default violates declared type ({default} is not {})", p.ty.describe()),
                )),
            }
        }
        if let Some(cond) = &p.relevant_when {
            match e.param(&cond.param) {
                None => errors.push(err(
                    Some(&p.name),
                    format!("relevant_when refers to unknown param `{}`", cond.param),
                )),
                Some(ctrl) if ctrl.name == p.name => {
                    errors.push(err(Some(&p.name), "relevant_when must refer to a different param".into()))
                }
                Some(ctrl) => {
                    if ctrl.ty.check(&cond.value).is_err() {
                        errors.push(err(
                            Some(&p.name),
                            format!(
                                "relevant_when value {} does not match `{}` ({})",
                                cond.value,
                                ctrl.name,
                                ctrl.ty.describe()
                            ),
                        ));
                    }
                }
            }
        }
        if let Some(cw) = &p.context_warning {
            if cw.tag.is_empty() {
                errors.push(err(Some(&p.name), "context_warning needs a context tag".into()));
            }
        }
    }

    for rule in &e.temporal {
        match rule {
            TemporalRule::MustPrecede { first, second } => {
                for m in [first, second] {
                    if e.method(m).is_none() {
                        errors.push(err(Some("order"), format!("order refers to unknown method `{m}`")));
                    }
                }
            }
            TemporalRule::RequireSetBefore { param, required_value, method } => {
                match e.param(param) {
                    None => errors.push(err(
                        Some("requires_set"),
                        format!("requires_set refers to unknown param `{param}`"),
                    )),
                    Some(p) if p.ty.check(required_value).is_err() => errors.push(err(
                        Some("requires_set"),
                        format!("requires_set value {required_value} does not match `{param}` ({})", p.ty.describe()),
                    )),
                    Some(_) => {}
                }
                if e.method(method).is_none() {
                    errors.push(err(Some("requires_set"), format!("requires_set refers to unknown method `{method}`")));
                }
                if e.method("fit").is_none() {
                    errors.push(err(Some("requires_set"), "requires_set needs a `fit` method".into()));
                }
            }
        }
    }
    errors
}

/// Checks every invariant of a spec value. Returns an empty list iff the
/// spec is well formed.
pub fn validate_spec(spec: &ApiSpec) -> Vec<SpecError> {
    let mut errors = Vec::new();
    for (key, e) in &spec.entities {
        if key != &e.name {
            errors.push(SpecError::new(format!("entity registered as `{key}` but named `{}`", e.name)).in_entity(key));
        }
        errors.extend(validate_entity(e));
    }
    for (key, m) in &spec.metrics {
        if key != &m.name {
            errors.push(SpecError::new(format!("metric registered as `{key}` but named `{}`", m.name)));
        }
    }
    errors
}
