//! The `.profile` file: one block per column, fields in a fixed order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::blocks::{parse_blocks, Entry, Value};
use super::{ColumnKind, ColumnProfile, DataProfile, Normalization};
use crate::lexer::quote;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ProfileFileError {
    pub line: usize,
    pub message: String,
}

/// Renders a profile. Floats use their shortest round-trip form, so
/// reading the file back yields an identical profile.
pub fn write_profile(p: &DataProfile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "source = {}", quote(&p.source));
    let _ = writeln!(s, "rows = {}", p.row_count);
    if let Some(l) = &p.label_column {
        let _ = writeln!(s, "label = {}", quote(l));
    }
    for c in &p.columns {
        let _ = writeln!(s, "\ncolumn {} {{", quote(&c.name));
        let _ = writeln!(s, "  kind = {}", c.kind);
        let _ = writeln!(s, "  rows = {}", c.row_count);
        let _ = writeln!(s, "  missing = {}", c.missing_count);
        let _ = writeln!(s, "  distinct = {}", c.distinct_count);
        for (k, v) in [("min", c.min), ("max", c.max), ("mean", c.mean), ("std", c.std)] {
            if let Some(v) = v {
                let _ = writeln!(s, "  {k} = {v:?}");
            }
        }
        let _ = writeln!(s, "  entropy = {:?}", c.entropy_bits);
        let _ = writeln!(s, "  normalization = {}", c.normalization);
        if let Some(o) = c.ordered {
            let _ = writeln!(s, "  ordered = {o}");
        }
        for (v, n) in &c.value_counts {
            let _ = writeln!(s, "  count {} = {n}", quote(v));
        }
        s.push_str("}\n");
    }
    s
}

fn bad(line: usize, message: impl Into<String>) -> ProfileFileError {
    ProfileFileError { line, message: message.into() }
}

fn count(e: &Entry) -> Result<usize, ProfileFileError> {
    e.value.as_count().ok_or_else(|| bad(e.line, format!("`{}` expects a non-negative integer", e.key)))
}

fn number(e: &Entry) -> Result<f64, ProfileFileError> {
    e.value.as_f64().ok_or_else(|| bad(e.line, format!("`{}` expects a number", e.key)))
}

fn word(e: &Entry) -> Result<&str, ProfileFileError> {
    e.value.as_str().ok_or_else(|| bad(e.line, format!("`{}` expects a name", e.key)))
}

pub fn parse_profile(source: &str) -> Result<DataProfile, ProfileFileError> {
    let file = parse_blocks(source).map_err(|e| bad(e.line, e.message))?;
    let mut profile = DataProfile { source: String::new(), row_count: 0, columns: Vec::new(), label_column: None };
    let mut seen_source = false;
    for e in &file.top {
        match e.key.as_str() {
            "source" => {
                profile.source = word(e)?.to_string();
                seen_source = true;
            }
            "rows" => profile.row_count = count(e)?,
            "label" => profile.label_column = Some(word(e)?.to_string()),
            other => return Err(bad(e.line, format!("unknown profile field `{other}`"))),
        }
    }
    if !seen_source {
        return Err(bad(1, "profile has no `source`"));
    }
    for b in &file.blocks {
        if b.kind != "column" {
            return Err(bad(b.line, format!("expected `column`, found `{}`", b.kind)));
        }
        let mut c = ColumnProfile {
            name: b.name.clone(),
            kind: ColumnKind::Unknown,
            row_count: profile.row_count,
            missing_count: 0,
            distinct_count: 0,
            min: None,
            max: None,
            mean: None,
            std: None,
            value_counts: BTreeMap::new(),
            entropy_bits: 0.0,
            normalization: Normalization::None,
            ordered: None,
        };
        for e in &b.entries {
            match e.key.as_str() {
                "kind" => {
                    c.kind = ColumnKind::from_keyword(word(e)?).ok_or_else(|| bad(e.line, "unknown column kind"))?
                }
                "rows" => c.row_count = count(e)?,
                "missing" => c.missing_count = count(e)?,
                "distinct" => c.distinct_count = count(e)?,
                "min" => c.min = Some(number(e)?),
                "max" => c.max = Some(number(e)?),
                "mean" => c.mean = Some(number(e)?),
                "std" => c.std = Some(number(e)?),
                "entropy" => c.entropy_bits = number(e)?,
                "normalization" => {
                    c.normalization =
                        Normalization::from_keyword(word(e)?).ok_or_else(|| bad(e.line, "unknown normalization"))?
                }
                "ordered" => match e.value {
                    Value::Bool(o) => c.ordered = Some(o),
                    _ => return Err(bad(e.line, "`ordered` expects true or false")),
                },
                "count" => {
                    let key = e.qualifier.clone().ok_or_else(|| bad(e.line, "`count` needs a quoted value"))?;
                    c.value_counts.insert(key, count(e)?);
                }
                other => return Err(bad(e.line, format!("unknown column field `{other}`"))),
            }
        }
        if c.missing_count > c.row_count {
            return Err(bad(b.line, format!("column `{}` has more missing values than rows", c.name)));
        }
        profile.columns.push(c);
    }
    Ok(profile)
}
