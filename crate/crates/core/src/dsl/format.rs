use std::fmt::Write;

use super::ast::*;

/// Canonical source text: two-space indentation, one statement per line,
/// single spaces between tokens. Comments are not preserved.
pub fn format(ast: &Pipeline) -> String {
    let mut out = format!("pipeline {} {{\n", ast.name.name);
    for stmt in &ast.statements {
        out.push_str("  ");
        out.push_str(&format_stmt(stmt));
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

fn args_source(args: &[Arg]) -> String {
    args.iter().map(|a| format!("{}={}", a.name.name, a.value.value)).collect::<Vec<_>>().join(", ")
}

pub fn format_stmt(stmt: &Stmt) -> String {
    let mut s = String::new();
    match &stmt.kind {
        StmtKind::Load { var, path, schema } => {
            write!(s, "{} = load {}", var.name, path.value).unwrap();
            if let Some(sc) = schema {
                write!(s, " schema {}", sc.value).unwrap();
            }
        }
        StmtKind::Split { train, val, test, source, ratios, stratify, seed } => {
            let [a, b, c] = &ratios.values;
            write!(
                s,
                "{}, {}, {} = split {} ratios ({}, {}, {})",
                train.name, val.name, test.name, source.name, a.value, b.value, c.value
            )
            .unwrap();
            if let Some(st) = stratify {
                write!(s, " stratify {}", st.value).unwrap();
            }
            if let Some(sd) = seed {
                write!(s, " seed {}", sd.value).unwrap();
            }
        }
        StmtKind::TransformDecl { var, entity, args, fit_on } => {
            write!(s, "{} = {}({}) fit on {}", var.name, entity.name, args_source(args), fit_on.name).unwrap();
        }
        StmtKind::Apply { var, transform, dataset } => {
            write!(s, "{} = apply {} {}", var.name, transform.name, dataset.name).unwrap();
        }
        StmtKind::ModelDecl { var, entity, args } => {
            write!(s, "{} = {}({})", var.name, entity.name, args_source(args)).unwrap();
        }
        StmtKind::SetParam { model, param, value } => {
            write!(s, "set {}.{} = {}", model.name, param.name, value.value).unwrap();
        }
        StmtKind::Fit { model, dataset, label } => {
            write!(s, "fit {} on {} label {}", model.name, dataset.name, label.value).unwrap();
        }
        StmtKind::Call { var, model, method, dataset } => {
            if let Some(v) = var {
                write!(s, "{} = ", v.name).unwrap();
            }
            write!(s, "call {}.{} {}", model.name, method.name, dataset.name).unwrap();
        }
        StmtKind::Evaluate { var, metric, model, dataset } => {
            write!(s, "{} = evaluate {} {} on {}", var.name, metric.name, model.name, dataset.name).unwrap();
        }
        StmtKind::Require { metric, op, threshold } => {
            write!(s, "require {} {} {}", metric.name, op, threshold.value).unwrap();
        }
    }
    s
}
