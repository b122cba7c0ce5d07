//! Diagnostics, quickfixes, the code registry and the two output formats.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::span::SourceSpan;

/// Diagnostic codes emitted by the toolchain. Each one has a registry entry.
pub mod codes {
    pub const LEX_UNTERMINATED: &str = "E-LEX-001";
    pub const LEX_ILLEGAL_CHAR: &str = "E-LEX-002";
    pub const SYNTAX: &str = "E-SYNTAX-001";
    pub const UNKNOWN_ENTITY: &str = "E-NAME-001";
    pub const UNBOUND_VAR: &str = "E-NAME-002";
    pub const UNKNOWN_METRIC: &str = "E-NAME-003";
    pub const UNKNOWN_METHOD: &str = "E-NAME-004";
    pub const UNKNOWN_PARAM: &str = "E-NAME-005";
    pub const WRONG_BINDING: &str = "E-NAME-006";
    pub const DUPLICATE_ARG: &str = "E-NAME-007";
    pub const NOT_IN_ENUM: &str = "E-TYPE-001";
    pub const OUT_OF_RANGE: &str = "E-TYPE-002";
    pub const WRONG_KIND: &str = "E-TYPE-003";
    pub const IRRELEVANT_ARG: &str = "W-DEP-001";
    pub const CALL_ORDER: &str = "E-TEMP-001";
    pub const SET_BEFORE_FIT: &str = "E-TEMP-002";
    pub const CONTEXT: &str = "W-CTX-001";
    pub const PROFILES_SKIPPED: &str = "W-ML-000";
    pub const RATIO_SUM: &str = "W-ML-001";
    pub const NOT_STRATIFIED: &str = "W-ML-002";
    pub const TEST_SET_USED: &str = "E-ML-003";
    pub const TRANSFORM_MISSING: &str = "W-ML-004";
    pub const LEAKAGE: &str = "E-ML-005";
    pub const METRIC_TASK: &str = "E-ML-006";
    pub const REQUIRE_UNEVALUATED: &str = "W-ML-007";
    pub const MISSING_VALUES: &str = "W-ML-008";
    pub const NOT_NORMALIZED: &str = "W-ML-009";
    pub const NOT_ENCODED: &str = "W-ML-010";

    pub const ALL: &[&str] = &[
        LEX_UNTERMINATED, LEX_ILLEGAL_CHAR, SYNTAX, UNKNOWN_ENTITY, UNBOUND_VAR, UNKNOWN_METRIC,
        UNKNOWN_METHOD, UNKNOWN_PARAM, WRONG_BINDING, DUPLICATE_ARG, NOT_IN_ENUM, OUT_OF_RANGE,
        WRONG_KIND, IRRELEVANT_ARG, CALL_ORDER, SET_BEFORE_FIT, CONTEXT, PROFILES_SKIPPED, RATIO_SUM,
        NOT_STRATIFIED, TEST_SET_USED, TRANSFORM_MISSING, LEAKAGE, METRIC_TASK, REQUIRE_UNEVALUATED,
        MISSING_VALUES, NOT_NORMALIZED, NOT_ENCODED,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }

    fn parse(s: &str) -> Option<Severity> {
        match s {
            "error" => Some(Severity::Error),
            "warning" => Some(Severity::Warning),
            "info" => Some(Severity::Info),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A machine-applicable edit: replace the text under `span` with `replacement`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quickfix {
    pub span: SourceSpan,
    pub replacement: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    pub explanation: String,
    pub suggestions: Vec<Quickfix>,
}

impl Diagnostic {
    /// Builds a diagnostic whose severity and explanation come from the
    /// registry entry for `code`.
    ///
    /// Panics if `code` is not registered; codes are compile-time constants.
    pub fn new(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Diagnostic {
        let entry = registry().get(code).unwrap_or_else(|| panic!("unregistered diagnostic code {code}"));
        Diagnostic {
            code,
            severity: entry.severity,
            span,
            message: message.into(),
            explanation: entry.explanation.clone(),
            suggestions: Vec::new(),
        }
    }

    pub fn with_fix(mut self, span: SourceSpan, replacement: impl Into<String>, description: impl Into<String>) -> Self {
        self.suggestions.push(Quickfix { span, replacement: replacement.into(), description: description.into() });
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `<file>:<line>:<col>: <severity>[<CODE>]: <message>` plus one
    /// `  help:` line per suggestion.
    pub fn render_human(&self) -> String {
        let mut out = format!(
            "{}:{}:{}: {}[{}]: {}\n",
            self.span.file, self.span.start_line, self.span.start_col, self.severity, self.code, self.message
        );
        for s in &self.suggestions {
            out.push_str("  help: ");
            out.push_str(&s.description);
            out.push('\n');
        }
        out
    }

    /// One tab-separated record terminated by `\n`.
    pub fn render_record(&self) -> String {
        let mut fields = vec![
            escape_field(&self.span.file),
            self.span.start_line.to_string(),
            self.span.start_col.to_string(),
            self.span.end_line.to_string(),
            self.span.end_col.to_string(),
            self.code.to_string(),
            self.severity.to_string(),
            escape_field(&self.message),
            self.suggestions.len().to_string(),
        ];
        fields.extend(self.suggestions.iter().map(|s| escape_field(&s.replacement)));
        let mut line = fields.join("\t");
        line.push('\n');
        line
    }
}

/// Escapes backslash, tab, newline and carriage return for record output.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistryEntry {
    pub code: String,
    pub severity: Severity,
    pub summary: String,
    pub explanation: String,
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    entries: BTreeMap<String, RegistryEntry>,
}

impl Registry {
    pub fn parse(source: &str) -> Result<Registry, String> {
        let mut entries = BTreeMap::new();
        let mut current: Option<(String, Vec<&str>, usize)> = None;
        let finish = |cur: Option<(String, Vec<&str>, usize)>,
                          entries: &mut BTreeMap<String, RegistryEntry>|
         -> Result<(), String> {
            let Some((code, body, line)) = cur else { return Ok(()) };
            let mut severity = None;
            let mut summary = None;
            let mut rest = body.as_slice();
            while let Some((first, tail)) = rest.split_first() {
                if let Some(v) = first.strip_prefix("severity = ") {
                    severity = Severity::parse(v.trim());
                } else if let Some(v) = first.strip_prefix("summary = ") {
                    summary = Some(v.trim().to_string());
                } else {
                    break;
                }
                rest = tail;
            }
            let explanation = rest.join("\n").trim().to_string();
            let entry = RegistryEntry {
                code: code.clone(),
                severity: severity.ok_or(format!("line {line}: {code} lacks a valid severity"))?,
                summary: summary.ok_or(format!("line {line}: {code} lacks a summary"))?,
                explanation,
            };
            if entries.insert(code.clone(), entry).is_some() {
                return Err(format!("line {line}: duplicate code {code}"));
            }
            Ok(())
        };
        for (i, line) in source.lines().enumerate() {
            if let Some(code) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                finish(current.take(), &mut entries)?;
                current = Some((code.to_string(), Vec::new(), i + 1));
            } else if let Some((_, body, _)) = current.as_mut() {
                body.push(line);
            } else if !line.trim().is_empty() && !line.starts_with('#') {
                return Err(format!("line {}: text outside an entry", i + 1));
            }
        }
        finish(current, &mut entries)?;
        Ok(Registry { entries })
    }

    pub fn get(&self, code: &str) -> Option<&RegistryEntry> {
        self.entries.get(code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Text printed by `explain`.
    pub fn render(&self, code: &str) -> Option<String> {
        let e = self.get(code)?;
        Some(format!("{} ({}): {}\n\n{}\n", e.code, e.severity, e.summary, e.explanation))
    }
}

/// The registry bundled with the toolchain.
pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(|| Registry::parse(crate::bundled::REGISTRY).expect("bundled registry is well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_code_is_registered_with_matching_severity_prefix() {
        let reg = registry();
        for code in codes::ALL {
            let entry = reg.get(code).unwrap_or_else(|| panic!("{code} missing"));
            let prefix_ok = match entry.severity {
                Severity::Error => code.starts_with("E-"),
                Severity::Warning => code.starts_with("W-"),
                Severity::Info => code.starts_with("W-") || code.starts_with("I-"),
            };
            assert!(prefix_ok, "{code}");
            assert!(!entry.explanation.is_empty());
        }
        assert_eq!(reg.codes().count(), codes::ALL.len());
    }

    #[test]
    fn human_and_record_rendering() {
        let span = SourceSpan { file: "a.mlp".into(), start_line: 3, start_col: 21, end_line: 3, end_col: 27, start_byte: 40, end_byte: 46 };
        let d = Diagnostic::new(codes::NOT_IN_ENUM, span.clone(), "bad\tvalue")
            .with_fix(span, "\"linear\"", "replace with \"linear\"");
        assert_eq!(d.render_human(), "a.mlp:3:21: error[E-TYPE-001]: bad\tvalue\n  help: replace with \"linear\"\n");
        assert_eq!(d.render_record(), "a.mlp\t3\t21\t3\t27\tE-TYPE-001\terror\tbad\\tvalue\t1\t\"linear\"\n");
    }

    #[test]
    fn registry_rejects_malformed_entries() {
        assert!(Registry::parse("[X]\nsummary = s\n").is_err());
        assert!(Registry::parse("stray\n").is_err());
        let r = Registry::parse("[X]\nseverity = info\nsummary = s\n\nbody\n").unwrap();
        assert_eq!(r.render("X").unwrap(), "X (info): s\n\nbody\n");
    }
}
