//! `.schema` metadata files.

use std::collections::BTreeMap;

use super::blocks::{parse_blocks, Value};
use super::ColumnKind;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ColumnMeta {
    pub kind: Option<ColumnKind>,
    pub ordered: bool,
    /// Category order, lowest first. Only present for ordered columns.
    pub order: Option<Vec<String>>,
    pub semantic_category: Option<String>,
    pub unit: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SchemaMeta {
    pub columns: BTreeMap<String, ColumnMeta>,
}

impl SchemaMeta {
    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns.get(name)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

fn text(v: &Value, key: &str, line: usize) -> Result<String, SchemaError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| SchemaError { line, message: format!("`{key}` expects a name or text") })
}

pub fn parse_schema(source: &str) -> Result<SchemaMeta, SchemaError> {
    let file = parse_blocks(source).map_err(|e| SchemaError { line: e.line, message: e.message })?;
    if let Some(e) = file.top.first() {
        return Err(SchemaError { line: e.line, message: format!("`{}` must appear inside a column block", e.key) });
    }
    let mut schema = SchemaMeta::default();
    for block in file.blocks {
        let err = |line: usize, message: String| SchemaError { line, message };
        if block.kind != "column" {
            return Err(err(block.line, format!("expected `column`, found `{}`", block.kind)));
        }
        if schema.columns.contains_key(&block.name) {
            return Err(err(block.line, format!("column `{}` is described twice", block.name)));
        }
        let mut meta = ColumnMeta::default();
        let mut order_line = None;
        for e in &block.entries {
            match e.key.as_str() {
                "kind" => {
                    let k = text(&e.value, "kind", e.line)?;
                    meta.kind = Some(ColumnKind::from_keyword(&k).ok_or_else(|| {
                        err(e.line, format!("unknown kind `{k}`; expected numeric or categorical"))
                    })?);
                }
                "ordered" => match e.value {
                    Value::Bool(b) => meta.ordered = b,
                    _ => return Err(err(e.line, "`ordered` expects true or false".into())),
                },
                "order" => {
                    let Value::List(items) = &e.value else {
                        return Err(err(e.line, "`order` expects a parenthesised list".into()));
                    };
                    let order = items.iter().map(|v| text(v, "order", e.line)).collect::<Result<Vec<_>, _>>()?;
                    meta.order = Some(order);
                    order_line = Some(e.line);
                }
                "category" => meta.semantic_category = Some(text(&e.value, "category", e.line)?),
                "unit" => meta.unit = Some(text(&e.value, "unit", e.line)?),
                other => return Err(err(e.line, format!("unknown column property `{other}`"))),
            }
        }
        if let (Some(line), false) = (order_line, meta.ordered) {
            return Err(err(line, format!("column `{}` has an order but is not marked `ordered = true`", block.name)));
        }
        schema.columns.insert(block.name, meta);
    }
    Ok(schema)
}
