//! ML best-practice rules: split hygiene, test-set hiding, leakage,
//! metric compatibility and, when data profiles are available, data
//! preparation.

use std::collections::BTreeSet;

use super::resolve::{BindingId, BindingKind, DatasetRole, ResolvedProgram};
use crate::apispec::{fmt_number, ApiSpec, Capability, EntityTask, ProblemKind};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::StmtKind;
use crate::lexer::quote;
use crate::profiler::{ColumnKind, DataProfile, Normalization};

/// Tolerance on the sum of split ratios.
pub const RATIO_SUM_TOLERANCE: f64 = 1e-9;

pub fn check_best_practices(p: &ResolvedProgram, spec: &ApiSpec, profiles: Option<&[DataProfile]>, strict: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    ratio_sums(p, &mut out);
    stratification(p, spec, &mut out);
    test_set_hiding(p, &mut out);
    transform_coverage(p, &mut out);
    leakage(p, &mut out);
    metric_tasks(p, spec, &mut out);
    unevaluated_requirements(p, &mut out);
    match profiles {
        Some(profiles) => profile_rules(p, spec, profiles, &mut out),
        None if strict => out.push(Diagnostic::new(
            codes::PROFILES_SKIPPED,
            p.ast.name.span.clone(),
            format!(
                "no data profile supplied; skipped {}, {} and {}",
                codes::MISSING_VALUES,
                codes::NOT_NORMALIZED,
                codes::NOT_ENCODED
            ),
        )),
        None => {}
    }
    out
}

fn role(p: &ResolvedProgram, id: Option<BindingId>) -> Option<DatasetRole> {
    p.dataset(id?).map(|(r, _, _)| r)
}

fn ratio_sums(p: &ResolvedProgram, out: &mut Vec<Diagnostic>) {
    for stmt in &p.ast.statements {
        let StmtKind::Split { ratios, .. } = &stmt.kind else { continue };
        let Some(values) = ratios.values.iter().map(|l| l.value.as_f64()).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > RATIO_SUM_TOLERANCE {
            let shown = (sum * 1e9).round() / 1e9;
            out.push(Diagnostic::new(
                codes::RATIO_SUM,
                ratios.span.clone(),
                format!("split ratios sum to {}, expected 1", fmt_number(shown)),
            ));
        }
    }
}

/// True when the program predicts a categorical label: a classification
/// model, or a classification metric evaluated or required.
fn classification_context(p: &ResolvedProgram, spec: &ApiSpec) -> bool {
    let model = p.bindings.iter().enumerate().any(|(id, b)| {
        matches!(b.kind, BindingKind::Model { .. })
            && p.entity(spec, id).is_some_and(|e| e.task == EntityTask::Classification)
    });
    let metric = p.ast.statements.iter().any(|s| match &s.kind {
        StmtKind::Evaluate { metric, .. } | StmtKind::Require { metric, .. } => {
            spec.metrics.get(&metric.name).is_some_and(|m| m.task == ProblemKind::Classification)
        }
        _ => false,
    });
    model || metric
}

fn stratification(p: &ResolvedProgram, spec: &ApiSpec, out: &mut Vec<Diagnostic>) {
    if !classification_context(p, spec) {
        return;
    }
    let label = p.ast.statements.iter().find_map(|s| match &s.kind {
        StmtKind::Fit { label, .. } => label.as_text().map(str::to_string),
        _ => None,
    });
    for stmt in &p.ast.statements {
        let StmtKind::Split { ratios, stratify: None, .. } = &stmt.kind else { continue };
        let mut d = Diagnostic::new(
            codes::NOT_STRATIFIED,
            stmt.span.clone(),
            "split is not stratified; label distributions of train, validation and test may differ",
        );
        if let Some(label) = &label {
            d = d.with_fix(
                ratios.span.end_point(),
                format!(" stratify {}", quote(label)),
                format!("stratify by {}", quote(label)),
            );
        }
        out.push(d);
    }
}

fn test_set_hiding(p: &ResolvedProgram, out: &mut Vec<Diagnostic>) {
    let last_eval = p.ast.statements.iter().rposition(|s| matches!(s.kind, StmtKind::Evaluate { .. }));
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        let (var, what) = match &stmt.kind {
            StmtKind::Fit { dataset, .. } => (p.use_of(i, 1), format!("fit on `{}`", dataset.name)),
            StmtKind::Call { method, dataset, .. } => (p.use_of(i, 1), format!("call of {} on `{}`", method.name, dataset.name)),
            StmtKind::Evaluate { dataset, .. } if Some(i) != last_eval => {
                (p.use_of(i, 1), format!("evaluation on `{}` before the final one", dataset.name))
            }
            StmtKind::Split { source, .. } => (p.use_of(i, 0), format!("split of `{}`", source.name)),
            _ => continue,
        };
        if role(p, var) == Some(DatasetRole::Test) {
            out.push(Diagnostic::new(
                codes::TEST_SET_USED,
                stmt.span.clone(),
                format!("test data is read here ({what}); only the final evaluate may read the test set"),
            ));
        }
    }
}

fn transform_coverage(p: &ResolvedProgram, out: &mut Vec<Diagnostic>) {
    let mut reported: BTreeSet<(BindingId, BindingId)> = BTreeSet::new();
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        let dataset = match &stmt.kind {
            StmtKind::Call { dataset, .. } | StmtKind::Evaluate { dataset, .. } => dataset,
            _ => continue,
        };
        let (Some(model), Some(ds)) = (p.use_of(i, 0), p.use_of(i, 1)) else { continue };
        let Some((r, provenance, _)) = p.dataset(ds) else { continue };
        if !matches!(r, DatasetRole::Val | DatasetRole::Test) {
            continue;
        }
        // Training provenance of the most recent fit of this model.
        let fitted = p.ast.statements[..i].iter().enumerate().rev().find_map(|(j, s)| match s.kind {
            StmtKind::Fit { .. } if p.use_of(j, 0) == Some(model) => p.use_of(j, 1),
            _ => None,
        });
        let Some((_, train_prov, _)) = fitted.and_then(|f| p.dataset(f)) else { continue };
        for t in train_prov {
            if provenance.contains(t) || !reported.insert((*t, ds)) {
                continue;
            }
            let tname = &p.binding(*t).var;
            let dname = &dataset.name;
            out.push(
                Diagnostic::new(
                    codes::TRANSFORM_MISSING,
                    stmt.span.clone(),
                    format!("transform `{tname}` was applied to the training data of `{}` but not to `{dname}`", p.binding(model).var),
                )
                .with_fix(
                    stmt.span.start_point(),
                    format!("{dname} = apply {tname} {dname}\n  "),
                    format!("apply `{tname}` to `{dname}` first"),
                ),
            );
        }
    }
}

fn leakage(p: &ResolvedProgram, out: &mut Vec<Diagnostic>) {
    let split_origins: BTreeSet<usize> = p
        .ast
        .statements
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.kind, StmtKind::Split { .. }))
        .filter_map(|(i, _)| p.dataset(p.use_of(i, 0)?)?.2)
        .collect();
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        let StmtKind::TransformDecl { var, fit_on, .. } = &stmt.kind else { continue };
        let Some((r, _, origin)) = p.use_of(i, 0).and_then(|d| p.dataset(d)) else { continue };
        let msg = match r {
            DatasetRole::Val | DatasetRole::Test => format!(
                "transform `{}` is fitted on {} data `{}`; fit transforms on the training split only",
                var.name,
                r.as_str(),
                fit_on.name
            ),
            DatasetRole::Raw if origin.is_some_and(|o| split_origins.contains(&o)) => format!(
                "transform `{}` is fitted on `{}` before it is split, so validation and test rows influence training",
                var.name, fit_on.name
            ),
            _ => continue,
        };
        out.push(Diagnostic::new(codes::LEAKAGE, stmt.span.clone(), msg));
    }
}

fn metric_tasks(p: &ResolvedProgram, spec: &ApiSpec, out: &mut Vec<Diagnostic>) {
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        let StmtKind::Evaluate { metric, .. } = &stmt.kind else { continue };
        let Some(m) = spec.metrics.get(&metric.name) else { continue };
        let Some(model) = p.use_of(i, 0) else { continue };
        let Some(e) = p.entity(spec, model) else { continue };
        if e.task.supports(m.task) {
            continue;
        }
        let mut d = Diagnostic::new(
            codes::METRIC_TASK,
            metric.span.clone(),
            format!(
                "metric `{}` is for {} but `{}` is a {} model",
                m.name,
                m.task.keyword(),
                e.name,
                e.task.keyword()
            ),
        );
        for alt in spec.metrics.values().filter(|alt| e.task.supports(alt.task)) {
            d = d.with_fix(metric.span.clone(), alt.name.clone(), format!("use `{}`", alt.name));
        }
        out.push(d);
    }
}

fn unevaluated_requirements(p: &ResolvedProgram, out: &mut Vec<Diagnostic>) {
    let evaluated: BTreeSet<&str> = p
        .ast
        .statements
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Evaluate { metric, .. } => Some(metric.name.as_str()),
            _ => None,
        })
        .collect();
    for stmt in &p.ast.statements {
        let StmtKind::Require { metric, .. } = &stmt.kind else { continue };
        if !evaluated.contains(metric.name.as_str()) {
            out.push(Diagnostic::new(
                codes::REQUIRE_UNEVALUATED,
                stmt.span.clone(),
                format!("requirement on `{}` can never be checked: the metric is never evaluated", metric.name),
            ));
        }
    }
}

fn basename(path: &str) -> &str {
    path.rsplit(['/', '\\']).next().unwrap_or(path)
}

/// The profile describing the data a load statement reads: matched by file
/// name, or the only profile when the program has a single load.
fn profile_for<'a>(p: &ResolvedProgram, load: usize, profiles: &'a [DataProfile]) -> Option<&'a DataProfile> {
    let StmtKind::Load { path, .. } = &p.ast.statements[load].kind else { return None };
    let name = basename(path.as_text()?);
    if let Some(found) = profiles.iter().find(|pr| basename(&pr.source) == name) {
        return Some(found);
    }
    let loads = p.ast.statements.iter().filter(|s| matches!(s.kind, StmtKind::Load { .. })).count();
    match (loads, profiles) {
        (1, [only]) => Some(only),
        _ => None,
    }
}

fn profile_rules(p: &ResolvedProgram, spec: &ApiSpec, profiles: &[DataProfile], out: &mut Vec<Diagnostic>) {
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        let StmtKind::Fit { dataset, label, .. } = &stmt.kind else { continue };
        let Some((_, provenance, Some(origin))) = p.use_of(i, 1).and_then(|d| p.dataset(d)) else { continue };
        let Some(profile) = profile_for(p, origin, profiles) else { continue };
        let provides = |cap: Capability| provenance.iter().any(|t| p.entity(spec, *t).is_some_and(|e| e.provides(cap)));
        let label = label.as_text();
        let features: Vec<_> = profile
            .columns
            .iter()
            .filter(|c| Some(c.name.as_str()) != label && Some(&c.name) != profile.label_column.as_ref())
            .collect();

        if !provides(Capability::Imputation) {
            let missing: Vec<String> = features
                .iter()
                .filter(|c| c.missing_count > 0)
                .map(|c| format!("{} ({} of {} missing)", c.name, c.missing_count, c.row_count))
                .collect();
            if !missing.is_empty() {
                out.push(Diagnostic::new(
                    codes::MISSING_VALUES,
                    stmt.span.clone(),
                    format!("`{}` has missing values and no imputation is applied before fit: {}", dataset.name, missing.join(", ")),
                ));
            }
        }
        if !provides(Capability::Scaling) {
            let raw: Vec<&str> = features
                .iter()
                .filter(|c| c.kind == ColumnKind::Numeric && c.normalization == Normalization::None)
                .map(|c| c.name.as_str())
                .collect();
            if !raw.is_empty() {
                out.push(Diagnostic::new(
                    codes::NOT_NORMALIZED,
                    stmt.span.clone(),
                    format!("numeric features of `{}` are not normalized and no scaling is applied: {}", dataset.name, raw.join(", ")),
                ));
            }
        }
        if !provides(Capability::Encoding) {
            let cats: Vec<String> = features
                .iter()
                .filter(|c| c.kind == ColumnKind::Categorical)
                .map(|c| {
                    let how = if c.ordered == Some(true) { "label encoding" } else { "one-hot encoding" };
                    format!("{} (use {how})", c.name)
                })
                .collect();
            if !cats.is_empty() {
                out.push(Diagnostic::new(
                    codes::NOT_ENCODED,
                    stmt.span.clone(),
                    format!("categorical features of `{}` reach fit without encoding: {}", dataset.name, cats.join(", ")),
                ));
            }
        }
    }
}
