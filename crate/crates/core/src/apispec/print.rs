use std::fmt::Write;

use super::*;
use crate::lexer::quote;

/// Canonical `.mlspec` rendering. `parse_api_spec(&print_spec(s))` yields `s`
/// for every valid spec.
pub fn print_spec(spec: &ApiSpec) -> String {
    let mut out = String::new();
    if !spec.version.is_empty() {
        writeln!(out, "version {}", quote(&spec.version)).unwrap();
    }
    for e in spec.entities.values() {
        write!(out, "entity {} {} task {}", e.name, e.kind.keyword(), e.task.keyword()).unwrap();
        if !e.provides.is_empty() {
            let caps: Vec<&str> = e.provides.iter().map(|c| c.keyword()).collect();
            write!(out, " provides {}", caps.join(", ")).unwrap();
        }
        out.push_str(" {\n");
        for p in &e.params {
            write!(out, "  param {}: {}", p.name, type_source(&p.ty)).unwrap();
            if let Some(d) = &p.default {
                write!(out, " = {d}").unwrap();
            }
            if let Some(c) = &p.relevant_when {
                write!(out, " relevant_when {c}").unwrap();
            }
            if let Some(cw) = &p.context_warning {
                write!(out, " context_warning({}, {})", cw.tag, quote(&cw.message)).unwrap();
            }
            out.push('\n');
        }
        for m in &e.methods {
            let params: Vec<&str> = m.params.iter().map(|k| k.keyword()).collect();
            write!(out, "  method {}({})", m.name, params.join(", ")).unwrap();
            if let Some(r) = m.returns {
                write!(out, " -> {r}").unwrap();
            }
            out.push('\n');
        }
        for rule in &e.temporal {
            match rule {
                TemporalRule::MustPrecede { first, second } => writeln!(out, "  order {first} before {second}"),
                TemporalRule::RequireSetBefore { param, required_value, method } => {
                    writeln!(out, "  requires_set {param} == {required_value} before {method}")
                }
            }
            .unwrap();
        }
        out.push_str("}\n");
    }
    for m in spec.metrics.values() {
        writeln!(out, "metric {} task {}", m.name, m.task.keyword()).unwrap();
    }
    out
}

fn bound_source(kind: NumKind, v: f64) -> String {
    match kind {
        NumKind::Int => format!("{}", v as i64),
        NumKind::Float => fmt_number(v),
    }
}

pub(crate) fn type_source(ty: &RefinedType) -> String {
    match ty {
        RefinedType::Primitive(k) => k.keyword().to_string(),
        RefinedType::EnumLiterals(values) => {
            let quoted: Vec<String> = values.iter().map(|v| quote(v)).collect();
            format!("enum({})", quoted.join(","))
        }
        RefinedType::NumericRange { kind, min, max, min_inclusive, max_inclusive } => {
            let mut opts = Vec::new();
            if let Some(lo) = min {
                opts.push(format!("{}={}", if *min_inclusive { "min" } else { "gt" }, bound_source(*kind, *lo)));
            }
            if let Some(hi) = max {
                opts.push(format!("{}={}", if *max_inclusive { "max" } else { "lt" }, bound_source(*kind, *hi)));
            }
            let name = match kind {
                NumKind::Int => "int",
                NumKind::Float => "float",
            };
            format!("{name}({})", opts.join(", "))
        }
        RefinedType::CallableSig { arity, note } if note.is_empty() => format!("callable(arity={arity})"),
        RefinedType::CallableSig { arity, note } => format!("callable(arity={arity}, note={})", quote(note)),
        RefinedType::Union(members) => members.iter().map(type_source).collect::<Vec<_>>().join(" | "),
    }
}
