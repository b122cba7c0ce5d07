//! Declarative API constraint specifications (`.mlspec`).
//!
//! A spec describes the entities a pipeline may instantiate (models and
//! transforms), the refined types of their parameters, the dependencies and
//! ordering rules between parameters and methods, and the quality metrics
//! available for evaluation.

pub(crate) mod parse;
mod print;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::parse_api_spec;
pub use print::print_spec;
pub use validate::validate_spec;

/// Primitive value kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimKind {
    Bool,
    Int,
    Float,
    Text,
    Table,
    Column,
}

impl PrimKind {
    pub fn keyword(self) -> &'static str {
        match self {
            PrimKind::Bool => "bool",
            PrimKind::Int => "int",
            PrimKind::Float => "float",
            PrimKind::Text => "text",
            PrimKind::Table => "table",
            PrimKind::Column => "column",
        }
    }

    pub fn from_keyword(word: &str) -> Option<PrimKind> {
        Some(match word {
            "bool" => PrimKind::Bool,
            "int" => PrimKind::Int,
            "float" => PrimKind::Float,
            "text" => PrimKind::Text,
            "table" => PrimKind::Table,
            "column" => PrimKind::Column,
            _ => return None,
        })
    }
}

impl fmt::Display for PrimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumKind {
    Int,
    Float,
}

impl NumKind {
    fn article(self) -> &'static str {
        match self {
            NumKind::Int => "an int",
            NumKind::Float => "a float",
        }
    }
}

/// A literal value, as written in a spec or a pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Literal {
    pub fn kind(&self) -> PrimKind {
        match self {
            Literal::Bool(_) => PrimKind::Bool,
            Literal::Int(_) => PrimKind::Int,
            Literal::Float(_) => PrimKind::Float,
            Literal::Text(_) => PrimKind::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Literal::Int(i) => Some(i as f64),
            Literal::Float(f) => Some(f),
            _ => None,
        }
    }

    /// Value equality with int/float widening.
    pub fn same_value(&self, other: &Literal) -> bool {
        match (self, other) {
            (Literal::Int(_) | Literal::Float(_), Literal::Int(_) | Literal::Float(_)) => {
                self.as_f64() == other.as_f64()
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Text(s) => f.write_str(&crate::lexer::quote(s)),
        }
    }
}

/// Formats a bound or statistic without a trailing `.0` for integral values.
pub fn fmt_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// A type narrowed beyond its primitive kind.
#[derive(Clone, Debug, PartialEq)]
pub enum RefinedType {
    Primitive(PrimKind),
    EnumLiterals(Vec<String>),
    NumericRange {
        kind: NumKind,
        min: Option<f64>,
        max: Option<f64>,
        min_inclusive: bool,
        max_inclusive: bool,
    },
    /// Accepted by specs but opaque to the checker: the pipeline language has
    /// no callable literals.
    CallableSig { arity: u32, note: String },
    Union(Vec<RefinedType>),
}

/// Why a literal does not inhabit a [`RefinedType`].
#[derive(Clone, Debug, PartialEq)]
pub enum TypeMismatch {
    /// A text value outside an enumerated set. `others` describes further
    /// accepted alternatives of a union.
    NotInEnum { allowed: Vec<String>, others: Vec<String> },
    /// A number of the right kind outside its bounds.
    OutOfRange { expected: String },
    WrongKind { expected: String },
}

impl RefinedType {
    pub fn float_range(min: f64, max: f64) -> RefinedType {
        RefinedType::NumericRange {
            kind: NumKind::Float,
            min: Some(min),
            max: Some(max),
            min_inclusive: true,
            max_inclusive: true,
        }
    }

    pub fn int_at_least(min: i64) -> RefinedType {
        RefinedType::NumericRange {
            kind: NumKind::Int,
            min: Some(min as f64),
            max: None,
            min_inclusive: true,
            max_inclusive: false,
        }
    }

    /// Human description used in messages, e.g. `a float between 0 and 1`.
    pub fn describe(&self) -> String {
        match self {
            RefinedType::Primitive(k) => k.keyword().to_string(),
            RefinedType::EnumLiterals(values) => {
                let quoted: Vec<String> = values.iter().map(|v| crate::lexer::quote(v)).collect();
                format!("one of {}", quoted.join(", "))
            }
            RefinedType::NumericRange { kind, min, max, min_inclusive, max_inclusive } => {
                let lo = |v: f64| format!("{} {}", if *min_inclusive { ">=" } else { ">" }, fmt_number(v));
                let hi = |v: f64| format!("{} {}", if *max_inclusive { "<=" } else { "<" }, fmt_number(v));
                match (min, max) {
                    (Some(a), Some(b)) if *min_inclusive && *max_inclusive => {
                        format!("{} between {} and {}", kind.article(), fmt_number(*a), fmt_number(*b))
                    }
                    (Some(a), Some(b)) => format!("{} {} and {}", kind.article(), lo(*a), hi(*b)),
                    (Some(a), None) => format!("{} {}", kind.article(), lo(*a)),
                    (None, Some(b)) => format!("{} {}", kind.article(), hi(*b)),
                    (None, None) => kind.article().to_string(),
                }
            }
            RefinedType::CallableSig { arity, .. } => format!("a callable of arity {arity}"),
            RefinedType::Union(members) => {
                members.iter().map(RefinedType::describe).collect::<Vec<_>>().join(" or ")
            }
        }
    }

    /// Whether values of `kind` can inhabit this type at all.
    pub fn admits_kind(&self, kind: PrimKind) -> bool {
        match self {
            RefinedType::Primitive(k) => *k == kind || (*k == PrimKind::Float && kind == PrimKind::Int),
            RefinedType::EnumLiterals(_) => kind == PrimKind::Text,
            RefinedType::NumericRange { kind: NumKind::Int, .. } => kind == PrimKind::Int,
            RefinedType::NumericRange { kind: NumKind::Float, .. } => {
                matches!(kind, PrimKind::Int | PrimKind::Float)
            }
            RefinedType::CallableSig { .. } => false,
            RefinedType::Union(members) => members.iter().any(|m| m.admits_kind(kind)),
        }
    }

    pub fn check(&self, value: &Literal) -> Result<(), TypeMismatch> {
        match self {
            RefinedType::Union(members) => {
                let mut failures = Vec::new();
                for m in members {
                    match m.check(value) {
                        Ok(()) => return Ok(()),
                        Err(e) => failures.push(e),
                    }
                }
                if let Some(allowed) = failures.iter().find_map(|f| match f {
                    TypeMismatch::NotInEnum { allowed, .. } => Some(allowed.clone()),
                    _ => None,
                }) {
                    let others = members
                        .iter()
                        .filter(|m| !matches!(m, RefinedType::EnumLiterals(_)))
                        .map(RefinedType::describe)
                        .collect();
                    return Err(TypeMismatch::NotInEnum { allowed, others });
                }
                if let Some(range) = failures.into_iter().find(|f| matches!(f, TypeMismatch::OutOfRange { .. })) {
                    return Err(range);
                }
                Err(TypeMismatch::WrongKind { expected: self.describe() })
            }
            _ if !self.admits_kind(value.kind()) => Err(TypeMismatch::WrongKind { expected: self.describe() }),
            RefinedType::EnumLiterals(values) => match value {
                Literal::Text(s) if values.contains(s) => Ok(()),
                _ => Err(TypeMismatch::NotInEnum { allowed: values.clone(), others: Vec::new() }),
            },
            RefinedType::NumericRange { min, max, min_inclusive, max_inclusive, .. } => {
                let v = value.as_f64().unwrap_or(f64::NAN);
                let above = match min {
                    Some(m) if *min_inclusive => v >= *m,
                    Some(m) => v > *m,
                    None => true,
                };
                let below = match max {
                    Some(m) if *max_inclusive => v <= *m,
                    Some(m) => v < *m,
                    None => true,
                };
                if above && below {
                    Ok(())
                } else {
                    Err(TypeMismatch::OutOfRange { expected: self.describe() })
                }
            }
            RefinedType::Primitive(_) | RefinedType::CallableSig { .. } => Ok(()),
        }
    }

    /// The enumerated literals of this type, including those of union members.
    pub fn enum_literals(&self) -> Vec<&str> {
        match self {
            RefinedType::EnumLiterals(v) => v.iter().map(String::as_str).collect(),
            RefinedType::Union(m) => m.iter().flat_map(RefinedType::enum_literals).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondOp {
    Eq,
    Ne,
}

impl CondOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CondOp::Eq => "==",
            CondOp::Ne => "!=",
        }
    }
}

/// `param op value`, used by `relevant_when`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub param: String,
    pub op: CondOp,
    pub value: Literal,
}

impl Condition {
    pub fn holds(&self, actual: &Literal) -> bool {
        let eq = actual.same_value(&self.value);
        match self.op {
            CondOp::Eq => eq,
            CondOp::Ne => !eq,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.param, self.op.symbol(), self.value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextWarning {
    pub tag: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSpec {
    pub name: String,
    pub ty: RefinedType,
    pub default: Option<Literal>,
    pub relevant_when: Option<Condition>,
    pub context_warning: Option<ContextWarning>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TemporalRule {
    /// `first` must have been called before any call of `second`.
    MustPrecede { first: String, second: String },
    /// Calling `method` requires `param` to have held `required_value` when
    /// the model was first fitted.
    RequireSetBefore { param: String, required_value: Literal, method: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityKind {
    Model,
    Transform,
}

impl EntityKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityKind::Model => "model",
            EntityKind::Transform => "transform",
        }
    }
}

/// Supervised problem class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Classification,
    Regression,
}

impl ProblemKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ProblemKind::Classification => "classification",
            ProblemKind::Regression => "regression",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ProblemKind> {
        match word {
            "classification" => Some(ProblemKind::Classification),
            "regression" => Some(ProblemKind::Regression),
            _ => None,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// What problems an entity can be used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityTask {
    Classification,
    Regression,
    Both,
    None,
}

impl EntityTask {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityTask::Classification => "classification",
            EntityTask::Regression => "regression",
            EntityTask::Both => "both",
            EntityTask::None => "none",
        }
    }

    pub fn supports(self, problem: ProblemKind) -> bool {
        matches!(
            (self, problem),
            (EntityTask::Both, _)
                | (EntityTask::Classification, ProblemKind::Classification)
                | (EntityTask::Regression, ProblemKind::Regression)
        )
    }
}

/// Data-preparation capability a transform provides; drives the
/// profile-aware lints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Capability {
    Imputation,
    Encoding,
    Scaling,
}

impl Capability {
    pub fn keyword(self) -> &'static str {
        match self {
            Capability::Imputation => "imputation",
            Capability::Encoding => "encoding",
            Capability::Scaling => "scaling",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Capability> {
        match word {
            "imputation" => Some(Capability::Imputation),
            "encoding" => Some(Capability::Encoding),
            "scaling" => Some(Capability::Scaling),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub params: Vec<PrimKind>,
    pub returns: Option<PrimKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntitySpec {
    pub name: String,
    pub kind: EntityKind,
    pub task: EntityTask,
    pub provides: Vec<Capability>,
    pub params: Vec<ParameterSpec>,
    pub methods: Vec<MethodSpec>,
    pub temporal: Vec<TemporalRule>,
}

impl EntitySpec {
    pub fn param(&self, name: &str) -> Option<&ParameterSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodSpec> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn provides(&self, cap: Capability) -> bool {
        self.provides.contains(&cap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub task: ProblemKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ApiSpec {
    pub entities: BTreeMap<String, EntitySpec>,
    pub metrics: BTreeMap<String, MetricSpec>,
    pub version: String,
}

impl ApiSpec {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.metrics.is_empty()
    }
}

/// Case-sensitive entity lookup.
pub fn lookup_entity<'a>(spec: &'a ApiSpec, name: &str) -> Option<&'a EntitySpec> {
    spec.entities.get(name)
}

/// A problem in a spec file or spec value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    pub source: Option<String>,
    pub line: Option<usize>,
    pub entity: Option<String>,
    pub field: Option<String>,
    pub message: String,
}

impl SpecError {
    pub fn new(message: impl Into<String>) -> Self {
        SpecError { source: None, line: None, entity: None, field: None, message: message.into() }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }

    pub fn in_entity(mut self, entity: &str) -> Self {
        self.entity = Some(entity.to_string());
        self
    }

    pub fn field(mut self, field: &str) -> Self {
        self.field = Some(field.to_string());
        self
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(src) = &self.source {
            write!(f, "{src}:")?;
        }
        if let Some(line) = self.line {
            write!(f, "{line}:")?;
        }
        if self.source.is_some() || self.line.is_some() {
            f.write_str(" ")?;
        }
        match (&self.entity, &self.field) {
            (Some(e), Some(fd)) => write!(f, "{e}.{fd}: ")?,
            (Some(e), None) => write!(f, "{e}: ")?,
            (None, Some(fd)) => write!(f, "{fd}: ")?,
            (None, None) => {}
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for SpecError {}

/// Unions several specs. Each input is paired with a name used in collision
/// reports. The merged version lists every distinct input version.
pub fn merge_specs(specs: &[(&str, &ApiSpec)]) -> Result<ApiSpec, SpecError> {
    let mut merged = ApiSpec::default();
    let mut entity_origin: BTreeMap<&str, &str> = BTreeMap::new();
    let mut metric_origin: BTreeMap<&str, &str> = BTreeMap::new();
    let mut versions = BTreeSet::new();
    for (source, spec) in specs {
        for (name, entity) in &spec.entities {
            if let Some(first) = entity_origin.insert(name, source) {
                return Err(SpecError::new(format!(
                    "entity `{name}` is declared in both {first} and {source}"
                ))
                .in_entity(name));
            }
            merged.entities.insert(name.clone(), entity.clone());
        }
        for (name, metric) in &spec.metrics {
            if let Some(first) = metric_origin.insert(name, source) {
                return Err(SpecError::new(format!(
                    "metric `{name}` is declared in both {first} and {source}"
                )));
            }
            merged.metrics.insert(name.clone(), metric.clone());
        }
        versions.extend(spec.version.split('+').filter(|v| !v.is_empty()).map(str::to_string));
    }
    merged.version = versions.into_iter().collect::<Vec<_>>().join("+");
    Ok(merged)
}
