//! `.mlbackend` template files.
//!
//! ```text
//! backend "reference" version "1.0"
//! true = "True"
//! template model
//! {var} = {entity}({args})
//! end
//! ```
//!
//! A template key is a construct name (`model`, `fit`, ...), optionally
//! narrowed to an entity (`model.SVC`) or, for `call`, a method
//! (`call.predict_proba`). Lines between `template` and `end` are copied
//! verbatim apart from `{placeholder}` substitution; `{{` and `}}` stand for
//! literal braces.

use std::collections::BTreeMap;

use crate::lexer::{tokenize_plain, TokenKind};

/// Template keys every backend must define.
pub const REQUIRED_KEYS: &[&str] = &[
    "preamble", "load", "split", "transform", "apply", "model", "set", "fit", "call", "evaluate", "require",
    "postamble",
];

/// Placeholders available in every template.
const COMMON: &[&str] = &["pipeline", "step"];

/// Placeholders a construct's template may use, besides [`COMMON`].
pub fn placeholders(construct: &str) -> Option<&'static [&'static str]> {
    Some(match construct {
        "preamble" | "postamble" => &[],
        "load" => &["var", "path", "schema"],
        "split" => &["train", "val", "test", "source", "train_ratio", "val_ratio", "test_ratio", "stratify", "seed"],
        "transform" => &["var", "entity", "args", "dataset"],
        "apply" => &["var", "transform", "dataset"],
        "model" => &["var", "entity", "args"],
        "set" => &["model", "param", "value"],
        "fit" => &["model", "dataset", "label"],
        "call" => &["assign", "var", "model", "method", "dataset"],
        "evaluate" => &["var", "metric", "model", "dataset"],
        "require" => &["metric", "op", "threshold"],
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Piece {
    Text(String),
    Hole(String),
}

/// A parsed template body.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pieces: Vec<Piece>,
}

impl Template {
    /// Substitutes placeholders; every placeholder was validated at load.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Hole(h) => out.push_str(values.get(h.as_str()).map_or("", String::as_str)),
            }
        }
        out
    }

    fn holes(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Hole(h) => Some(h.as_str()),
            Piece::Text(_) => None,
        })
    }
}

fn parse_template(body: &str) -> Result<Template, String> {
    let mut pieces = Vec::new();
    let mut text = String::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                text.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) if c.is_ascii_alphanumeric() || c == '_' => name.push(c),
                        _ => return Err(format!("malformed placeholder `{{{name}`")),
                    }
                }
                if name.is_empty() {
                    return Err("empty placeholder `{}`".to_string());
                }
                if !text.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut text)));
                }
                pieces.push(Piece::Hole(name));
            }
            '}' => return Err("unmatched `}`; write `}}` for a literal brace".to_string()),
            c => text.push(c),
        }
    }
    if !text.is_empty() {
        pieces.push(Piece::Text(text));
    }
    Ok(Template { pieces })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackendTemplate {
    pub name: String,
    pub version: String,
    /// Target spellings of `true`, `false` and the absent value.
    pub true_literal: String,
    pub false_literal: String,
    pub none_literal: String,
    pub templates: BTreeMap<String, Template>,
}

impl BackendTemplate {
    /// The most specific template for `construct`, trying each qualifier in
    /// turn before the plain construct key.
    pub fn template(&self, construct: &str, qualifiers: &[&str]) -> &Template {
        qualifiers
            .iter()
            .find_map(|q| self.templates.get(&format!("{construct}.{q}")))
            .unwrap_or_else(|| &self.templates[construct])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, thiserror::Error)]
#[error("{}{message}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct BackendError {
    /// `None` for whole-file problems such as a missing template.
    pub line: Option<usize>,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> BackendError {
    BackendError { line: Some(line), message: message.into() }
}

/// Words and text values of one header line, or `None` if it has other tokens.
fn line_words(line: &str) -> Option<Vec<(bool, String)>> {
    let toks = tokenize_plain(line, "").ok()?;
    toks.iter()
        .filter(|t| t.kind != TokenKind::Eof)
        .map(|t| match t.kind {
            TokenKind::Text => t.text_value().map(|v| (true, v)),
            TokenKind::Punct if t.lexeme == "=" => Some((false, "=".to_string())),
            TokenKind::Bool => Some((false, t.lexeme.clone())),
            _ if t.is_word() => Some((false, t.lexeme.clone())),
            _ => None,
        })
        .collect()
}

/// Parses and validates a backend. Errors are reported in file order,
/// followed by missing templates in [`REQUIRED_KEYS`] order.
pub fn load_backend(source: &str) -> Result<BackendTemplate, Vec<BackendError>> {
    let mut errors = Vec::new();
    let mut b = BackendTemplate {
        name: String::new(),
        version: String::new(),
        true_literal: "true".into(),
        false_literal: "false".into(),
        none_literal: "none".into(),
        templates: BTreeMap::new(),
    };
    let mut header = false;
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((n, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let template_key = trimmed.strip_prefix("template ").map(str::trim).filter(|k| {
            !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        });
        let words = line_words(trimmed).unwrap_or_default();
        let plain: Vec<&str> = words.iter().map(|(_, w)| w.as_str()).collect();
        if let Some(key) = template_key {
            let key = key.to_string();
            let mut body = String::new();
            let mut closed = false;
            for (_, l) in lines.by_ref() {
                if l.trim() == "end" {
                    closed = true;
                    break;
                }
                body.push_str(l);
                body.push('\n');
            }
            if !closed {
                errors.push(err(n, format!("template `{key}` has no `end`")));
            }
            let construct = key.split('.').next().unwrap_or_default();
            let Some(allowed) = placeholders(construct) else {
                errors.push(err(n, format!("unknown template key `{key}`")));
                continue;
            };
            if key.contains('.') && matches!(construct, "preamble" | "postamble") {
                errors.push(err(n, format!("`{construct}` cannot be specialised")));
                continue;
            }
            if b.templates.contains_key(&key) {
                errors.push(err(n, format!("template `{key}` is defined twice")));
                continue;
            }
            match parse_template(&body) {
                Ok(t) => {
                    for h in t.holes() {
                        if !allowed.contains(&h) && !COMMON.contains(&h) {
                            errors.push(err(n, format!("unknown placeholder `{{{h}}}` in template `{key}`")));
                        }
                    }
                    b.templates.insert(key, t);
                }
                Err(m) => errors.push(err(n, format!("template `{key}`: {m}"))),
            }
            continue;
        }
        match plain.as_slice() {
            ["backend", name, "version", version] if words[1].0 && words[3].0 => {
                if header {
                    errors.push(err(n, "duplicate `backend` header"));
                }
                header = true;
                b.name = name.to_string();
                b.version = version.to_string();
            }
            [lit @ ("true" | "false" | "none"), "=", value] if words[2].0 => {
                let slot = match *lit {
                    "true" => &mut b.true_literal,
                    "false" => &mut b.false_literal,
                    _ => &mut b.none_literal,
                };
                *slot = value.to_string();
            }
            _ => errors.push(err(n, format!("unrecognised line `{trimmed}`"))),
        }
    }
    if !header {
        errors.push(BackendError { line: None, message: "missing `backend \"name\" version \"v\"` header".into() });
    }
    for key in REQUIRED_KEYS {
        if !b.templates.contains_key(*key) {
            errors.push(BackendError { line: None, message: format!("missing template for `{key}`") });
        }
    }
    if errors.is_empty() {
        Ok(b)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "backend \"t\" version \"0\"\n";

    fn with_all(extra: &str, skip: &str) -> String {
        let mut s = MINIMAL.to_string();
        for k in REQUIRED_KEYS.iter().filter(|k| **k != skip) {
            s.push_str(&format!("template {k}\n{k} {{step}}\nend\n"));
        }
        s.push_str(extra);
        s
    }

    #[test]
    fn bundled_backend_loads() {
        let b = load_backend(crate::bundled::REFERENCE_BACKEND).unwrap();
        assert_eq!(b.name, "reference");
        assert_eq!(b.true_literal, "True");
    }

    #[test]
    fn missing_split_is_named() {
        let errs = load_backend(&with_all("", "split")).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("\"split\"") || errs[0].message.contains("`split`"));
    }

    #[test]
    fn unknown_placeholder_is_named() {
        let errs = load_backend(&with_all("template fit.SVC\n{modle}.fit()\nend\n", "")).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("{modle}"));
        assert_eq!(errs[0].line, Some(2 + 3 * REQUIRED_KEYS.len()));
    }

    #[test]
    fn braces_escape_and_render() {
        let t = parse_template("d = {{{var}: 1}}\n").unwrap();
        let values = BTreeMap::from([("var", "x".to_string())]);
        assert_eq!(t.render(&values), "d = {x: 1}\n");
        assert!(parse_template("{open").is_err());
        assert!(parse_template("a } b").is_err());
    }

    #[test]
    fn specific_template_wins() {
        let b = load_backend(&with_all("template model.SVC\nsvc\nend\n", "")).unwrap();
        assert_eq!(b.template("model", &["SVC"]).render(&BTreeMap::new()), "svc\n");
        assert_eq!(b.template("model", &["impute"]).render(&BTreeMap::new()), "model \n");
    }
}
