//! Rule-table advisor: metrics, algorithms, conversions and validation
//! strategy suggested from a profile.

use std::fmt;

use super::{ColumnKind, DataProfile, Normalization, SchemaMeta};
use crate::apispec::{ApiSpec, EntityKind, ProblemKind};

/// Datasets smaller than this get a cross-validation suggestion.
pub const CROSS_VALIDATION_ROWS: usize = 1000;
/// Columns missing more than this fraction of values may be dropped.
pub const HIGH_MISSING_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SuggestionKind {
    Metric,
    Algorithm,
    Encoding,
    Scaling,
    DropColumn,
    OrderGap,
    Validation,
    SplitRatios,
}

impl SuggestionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            SuggestionKind::Metric => "metric",
            SuggestionKind::Algorithm => "algorithm",
            SuggestionKind::Encoding => "encoding",
            SuggestionKind::Scaling => "scaling",
            SuggestionKind::DropColumn => "drop",
            SuggestionKind::OrderGap => "order",
            SuggestionKind::Validation => "validation",
            SuggestionKind::SplitRatios => "split",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    /// The metric, entity or column the suggestion is about.
    pub subject: Option<String>,
    pub message: String,
}

impl fmt::Display for Suggestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.keyword(), self.message)
    }
}

fn push(out: &mut Vec<Suggestion>, kind: SuggestionKind, subject: Option<&str>, message: String) {
    out.push(Suggestion { kind, subject: subject.map(str::to_string), message });
}

pub fn advise(task: ProblemKind, profile: &DataProfile, schema: Option<&SchemaMeta>, spec: &ApiSpec) -> Vec<Suggestion> {
    let mut out = Vec::new();
    for m in spec.metrics.values().filter(|m| m.task == task) {
        push(&mut out, SuggestionKind::Metric, Some(&m.name), format!("`{}` suits {} problems", m.name, task.keyword()));
    }
    for e in spec.entities.values().filter(|e| e.kind == EntityKind::Model && e.task.supports(task)) {
        push(&mut out, SuggestionKind::Algorithm, Some(&e.name), format!("`{}` supports {}", e.name, task.keyword()));
    }
    let label = profile.label_column.as_deref();
    for c in profile.columns.iter().filter(|c| Some(c.name.as_str()) != label) {
        let meta = schema.and_then(|s| s.column(&c.name));
        match c.kind {
            ColumnKind::Categorical => {
                let ordered = meta.map_or(c.ordered == Some(true), |m| m.ordered);
                let msg = if ordered {
                    format!("`{}` is an ordered category: use label encoding", c.name)
                } else {
                    format!("`{}` is an unordered category: use one-hot encoding", c.name)
                };
                push(&mut out, SuggestionKind::Encoding, Some(&c.name), msg);
                if let Some(order) = meta.and_then(|m| m.order.as_ref()) {
                    let gaps: Vec<&str> =
                        c.value_counts.keys().filter(|v| !order.contains(v)).map(String::as_str).collect();
                    if !gaps.is_empty() {
                        push(
                            &mut out,
                            SuggestionKind::OrderGap,
                            Some(&c.name),
                            format!("`{}` has values missing from the schema order: {}", c.name, gaps.join(", ")),
                        );
                    }
                }
            }
            ColumnKind::Numeric if c.normalization == Normalization::None && c.present() >= 2 => {
                push(&mut out, SuggestionKind::Scaling, Some(&c.name), format!("`{}` is not normalized: consider scaling", c.name));
            }
            _ => {}
        }
        if c.missing_fraction() > HIGH_MISSING_FRACTION {
            push(
                &mut out,
                SuggestionKind::DropColumn,
                Some(&c.name),
                format!("`{}` is missing {} of {} values: consider dropping it", c.name, c.missing_count, c.row_count),
            );
        }
    }
    let validation = if profile.row_count < CROSS_VALIDATION_ROWS {
        format!("{} rows: prefer cross-validation over a single held-out validation set", profile.row_count)
    } else {
        format!("{} rows: a held-out validation set is enough", profile.row_count)
    };
    push(&mut out, SuggestionKind::Validation, None, validation);
    push(
        &mut out,
        SuggestionKind::SplitRatios,
        None,
        "a 70/15/15 train/validation/test split is a common convention to start from".to_string(),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiler::{parse_schema, profile_reader};

    fn subjects(s: &[Suggestion], kind: SuggestionKind) -> Vec<String> {
        s.iter().filter(|x| x.kind == kind).filter_map(|x| x.subject.clone()).collect()
    }

    #[test]
    fn metrics_follow_task() {
        let spec = crate::bundled::spec();
        let p = profile_reader("x\n1\n".as_bytes(), "t", None).unwrap();
        let s = advise(ProblemKind::Classification, &p, None, &spec);
        assert_eq!(subjects(&s, SuggestionKind::Metric), vec!["accuracy"]);
        assert_eq!(subjects(&s, SuggestionKind::Algorithm), vec!["SVC"]);
        let r = advise(ProblemKind::Regression, &p, None, &spec);
        assert_eq!(subjects(&r, SuggestionKind::Metric), vec!["rmse"]);
    }

    #[test]
    fn encoding_depends_on_order() {
        let spec = crate::bundled::spec();
        let schema = parse_schema(
            "column class { kind = categorical; ordered = true; order = (\"poor\",\"middle class\",\"rich\") }",
        )
        .unwrap();
        let p = profile_reader("class,colour\npoor,red\nrich,blue\nbillionaire,red\n".as_bytes(), "t", Some(&schema)).unwrap();
        let s = advise(ProblemKind::Classification, &p, Some(&schema), &spec);
        let enc: Vec<&str> = s.iter().filter(|x| x.kind == SuggestionKind::Encoding).map(|x| x.message.as_str()).collect();
        assert!(enc[0].contains("label encoding"));
        assert!(enc[1].contains("one-hot encoding"));
        assert!(s.iter().any(|x| x.kind == SuggestionKind::OrderGap && x.message.contains("billionaire")));
    }

    #[test]
    fn missing_and_validation_rules() {
        let spec = crate::bundled::spec();
        let p = profile_reader("a,b\n,1\n,2\nx,3\n".as_bytes(), "t", None).unwrap();
        let s = advise(ProblemKind::Regression, &p, None, &spec);
        assert_eq!(subjects(&s, SuggestionKind::DropColumn), vec!["a"]);
        assert!(s.iter().any(|x| x.kind == SuggestionKind::Validation && x.message.contains("cross-validation")));
        assert!(s.iter().any(|x| x.kind == SuggestionKind::SplitRatios && x.message.contains("convention")));
    }
}
