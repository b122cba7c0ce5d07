use std::collections::HashMap;

use super::validate::{check_type_shape, validate_entity};
use super::*;
use crate::lexer::{tokenize_plain, Cursor, Token, TokenKind};

/// Parses `.mlspec` text. Every error carries the line it was found on.
pub fn parse_api_spec(source: &str) -> Result<ApiSpec, Vec<SpecError>> {
    let toks = match tokenize_plain(source, "") {
        Ok(t) => t,
        Err(e) => {
            let line = e.span().start_line;
            let msg = match e {
                crate::lexer::LexError::UnterminatedText { .. } => "unterminated text literal".to_string(),
                crate::lexer::LexError::IllegalChar { ch, .. } => format!("illegal character {ch:?}"),
            };
            return Err(vec![SpecError::new(msg).at_line(line)]);
        }
    };
    let mut p = SpecParser { cur: Cursor::new(&toks), errors: Vec::new(), spec: ApiSpec::default() };
    p.file();
    if p.errors.is_empty() {
        Ok(p.spec)
    } else {
        Err(p.errors)
    }
}

struct SpecParser<'t> {
    cur: Cursor<'t>,
    errors: Vec<SpecError>,
    spec: ApiSpec,
}

/// Source lines of an entity's members, for attaching lines to validation errors.
#[derive(Default)]
struct MemberLines {
    params: HashMap<String, usize>,
    methods: HashMap<String, usize>,
    header: usize,
}

impl<'t> SpecParser<'t> {
    fn file(&mut self) {
        while !self.cur.at_eof() {
            let head = self.cur.peek();
            let line = head.span.start_line;
            let result = match head.lexeme.as_str() {
                "entity" if head.is_word() => {
                    self.entity();
                    continue;
                }
                "metric" if head.is_word() => self.metric(),
                "version" if head.is_word() => self.version(),
                _ => Err(format!("expected `entity`, `metric` or `version`, found {}", crate::lexer::describe(head))),
            };
            let result = result.and_then(|()| self.end_of_line(line));
            if let Err(msg) = result {
                self.errors.push(SpecError::new(msg).at_line(line));
                self.cur.skip_line(line);
            }
        }
    }

    fn end_of_line(&self, line: usize) -> Result<(), String> {
        if self.cur.at_line_end(line) {
            Ok(())
        } else {
            Err(format!("unexpected {} at end of declaration", crate::lexer::describe(self.cur.peek())))
        }
    }

    fn version(&mut self) -> Result<(), String> {
        self.cur.next();
        self.spec.version = self.cur.expect_text("version text")?;
        Ok(())
    }

    fn metric(&mut self) -> Result<(), String> {
        self.cur.next();
        let name = self.cur.expect_word("metric name")?.lexeme.clone();
        self.cur.expect_keyword("task")?;
        let task_tok = self.cur.expect_word("task")?;
        let task = ProblemKind::from_keyword(&task_tok.lexeme)
            .ok_or_else(|| format!("unknown metric task `{}` (expected classification or regression)", task_tok.lexeme))?;
        if self.spec.metrics.contains_key(&name) {
            return Err(format!("duplicate metric `{name}`"));
        }
        self.spec.metrics.insert(name.clone(), MetricSpec { name, task });
        Ok(())
    }

    fn entity(&mut self) {
        let header_line = self.cur.peek().span.start_line;
        let header = self.entity_header();
        let mut entity = match header {
            Ok(e) => Some(e),
            Err(msg) => {
                self.errors.push(SpecError::new(msg).at_line(header_line));
                // Members of a broken header are still parsed for their own errors.
                let mut opened = false;
                while !self.cur.at_line_end(header_line) {
                    opened = self.cur.next().is_punct("{");
                }
                if !opened {
                    return;
                }
                None
            }
        };
        let mut lines = MemberLines { header: header_line, ..Default::default() };
        loop {
            if self.cur.at_eof() {
                self.errors.push(SpecError::new("missing `}` to close entity").at_line(header_line));
                return;
            }
            let line = self.cur.peek().span.start_line;
            if self.cur.eat_punct("}") {
                if let Err(msg) = self.end_of_line(line) {
                    self.errors.push(SpecError::new(msg).at_line(line));
                    self.cur.skip_line(line);
                }
                break;
            }
            let result = self.member(entity.as_mut(), &mut lines).and_then(|()| self.end_of_line(line));
            if let Err(msg) = result {
                let mut err = SpecError::new(msg).at_line(line);
                if let Some(e) = &entity {
                    err = err.in_entity(&e.name);
                }
                self.errors.push(err);
                self.cur.skip_line(line);
            }
        }
        let Some(entity) = entity else { return };
        for err in validate_entity(&entity) {
            let line = err
                .field
                .as_ref()
                .and_then(|f| lines.params.get(f).or_else(|| lines.methods.get(f)))
                .copied()
                .unwrap_or(lines.header);
            self.errors.push(err.at_line(line));
        }
        if self.spec.entities.contains_key(&entity.name) {
            self.errors.push(SpecError::new(format!("duplicate entity `{}`", entity.name)).at_line(header_line));
            return;
        }
        self.spec.entities.insert(entity.name.clone(), entity);
    }

    fn entity_header(&mut self) -> Result<EntitySpec, String> {
        self.cur.next();
        let name = self.cur.expect_word("entity name")?.lexeme.clone();
        let kind_tok = self.cur.expect_word("entity kind")?;
        let kind = match kind_tok.lexeme.as_str() {
            "model" => EntityKind::Model,
            "transform" => EntityKind::Transform,
            other => return Err(format!("unknown entity kind `{other}` (expected model or transform)")),
        };
        self.cur.expect_keyword("task")?;
        let task_tok = self.cur.expect_word("task")?;
        let task = match task_tok.lexeme.as_str() {
            "classification" => EntityTask::Classification,
            "regression" => EntityTask::Regression,
            "both" => EntityTask::Both,
            "none" => EntityTask::None,
            other => return Err(format!("unknown task `{other}`")),
        };
        let mut provides = Vec::new();
        if self.cur.eat_word("provides") {
            loop {
                let cap_tok = self.cur.expect_word("capability")?;
                let cap = Capability::from_keyword(&cap_tok.lexeme)
                    .ok_or_else(|| format!("unknown capability `{}`", cap_tok.lexeme))?;
                if !provides.contains(&cap) {
                    provides.push(cap);
                }
                if !self.cur.eat_punct(",") {
                    break;
                }
            }
        }
        self.cur.expect_punct("{")?;
        Ok(EntitySpec { name, kind, task, provides, params: Vec::new(), methods: Vec::new(), temporal: Vec::new() })
    }

    fn member(&mut self, entity: Option<&mut EntitySpec>, lines: &mut MemberLines) -> Result<(), String> {
        let head = self.cur.expect_word("`param`, `method`, `order`, `requires_set` or `}`")?;
        let line = head.span.start_line;
        let mut scratch = EntitySpec {
            name: String::new(),
            kind: EntityKind::Transform,
            task: EntityTask::None,
            provides: Vec::new(),
            params: Vec::new(),
            methods: Vec::new(),
            temporal: Vec::new(),
        };
        let entity = entity.unwrap_or(&mut scratch);
        match head.lexeme.as_str() {
            "param" => {
                let param = self.param()?;
                if entity.param(&param.name).is_some() {
                    return Err(format!("duplicate param `{}`", param.name));
                }
                lines.params.insert(param.name.clone(), line);
                entity.params.push(param);
            }
            "method" => {
                let method = self.method()?;
                if entity.method(&method.name).is_some() {
                    return Err(format!("duplicate method `{}`", method.name));
                }
                lines.methods.insert(method.name.clone(), line);
                entity.methods.push(method);
            }
            "order" => {
                let first = self.cur.expect_word("method name")?.lexeme.clone();
                self.cur.expect_keyword("before")?;
                let second = self.cur.expect_word("method name")?.lexeme.clone();
                entity.temporal.push(TemporalRule::MustPrecede { first, second });
            }
            "requires_set" => {
                let param = self.cur.expect_word("param name")?.lexeme.clone();
                self.cur.expect_punct("==")?;
                let required_value = self.literal()?;
                self.cur.expect_keyword("before")?;
                let method = self.cur.expect_word("method name")?.lexeme.clone();
                entity.temporal.push(TemporalRule::RequireSetBefore { param, required_value, method });
            }
            other => return Err(format!("unknown declaration `{other}`")),
        }
        Ok(())
    }

    fn param(&mut self) -> Result<ParameterSpec, String> {
        let name = self.cur.expect_word("param name")?.lexeme.clone();
        self.cur.expect_punct(":")?;
        let ty = self.refined_type()?;
        let default = if self.cur.eat_punct("=") { Some(self.literal()?) } else { None };
        let mut relevant_when = None;
        let mut context_warning = None;
        loop {
            if relevant_when.is_none() && self.cur.eat_word("relevant_when") {
                let param = self.cur.expect_word("param name")?.lexeme.clone();
                let op = if self.cur.eat_punct("==") {
                    CondOp::Eq
                } else if self.cur.eat_punct("!=") {
                    CondOp::Ne
                } else {
                    return Err(format!("expected `==` or `!=`, found {}", crate::lexer::describe(self.cur.peek())));
                };
                let value = self.literal()?;
                relevant_when = Some(Condition { param, op, value });
            } else if context_warning.is_none() && self.cur.eat_word("context_warning") {
                self.cur.expect_punct("(")?;
                let tag = self.cur.expect_word("context tag")?.lexeme.clone();
                self.cur.expect_punct(",")?;
                let message = self.cur.expect_text("warning message")?;
                self.cur.expect_punct(")")?;
                context_warning = Some(ContextWarning { tag, message });
            } else {
                break;
            }
        }
        Ok(ParameterSpec { name, ty, default, relevant_when, context_warning })
    }

    fn method(&mut self) -> Result<MethodSpec, String> {
        let name = self.cur.expect_word("method name")?.lexeme.clone();
        self.cur.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.cur.eat_punct(")") {
            loop {
                params.push(self.prim_kind()?);
                if self.cur.eat_punct(")") {
                    break;
                }
                self.cur.expect_punct(",")?;
            }
        }
        let returns = if self.cur.eat_punct("->") { Some(self.prim_kind()?) } else { None };
        Ok(MethodSpec { name, params, returns })
    }

    fn prim_kind(&mut self) -> Result<PrimKind, String> {
        let t = self.cur.expect_word("value kind")?;
        PrimKind::from_keyword(&t.lexeme).ok_or_else(|| format!("unknown type keyword `{}`", t.lexeme))
    }

    fn refined_type(&mut self) -> Result<RefinedType, String> {
        let mut members = vec![self.type_atom()?];
        while self.cur.eat_punct("|") {
            members.push(self.type_atom()?);
        }
        let ty = if members.len() == 1 { members.pop().unwrap() } else { RefinedType::Union(members) };
        check_type_shape(&ty)?;
        Ok(ty)
    }

    fn type_atom(&mut self) -> Result<RefinedType, String> {
        let t = self.cur.expect_word("type")?;
        match t.lexeme.as_str() {
            "enum" => {
                self.cur.expect_punct("(")?;
                let mut values = Vec::new();
                if !self.cur.eat_punct(")") {
                    loop {
                        values.push(self.cur.expect_text("enum literal")?);
                        if self.cur.eat_punct(")") {
                            break;
                        }
                        self.cur.expect_punct(",")?;
                    }
                }
                Ok(RefinedType::EnumLiterals(values))
            }
            "callable" => {
                let args = self.named_args()?;
                let mut arity = None;
                let mut note = String::new();
                for (key, value) in args {
                    match (key.as_str(), value) {
                        ("arity", Literal::Int(n)) if n >= 0 => arity = Some(n as u32),
                        ("note", Literal::Text(s)) => note = s,
                        (k, _) => return Err(format!("invalid callable option `{k}`")),
                    }
                }
                let arity = arity.ok_or("callable requires `arity=<n>`")?;
                Ok(RefinedType::CallableSig { arity, note })
            }
            word => {
                let kind = PrimKind::from_keyword(word).ok_or_else(|| format!("unknown type keyword `{word}`"))?;
                let num = match kind {
                    PrimKind::Int => NumKind::Int,
                    PrimKind::Float => NumKind::Float,
                    _ => return Ok(RefinedType::Primitive(kind)),
                };
                if !self.cur.peek().is_punct("(") {
                    return Ok(RefinedType::Primitive(kind));
                }
                let (mut min, mut max, mut min_inclusive, mut max_inclusive) = (None, None, false, false);
                for (key, value) in self.named_args()? {
                    let bound = match value {
                        Literal::Int(i) => i as f64,
                        Literal::Float(f) if num == NumKind::Float => f,
                        _ => return Err(format!("invalid bound for `{key}` in {word} range")),
                    };
                    match key.as_str() {
                        "min" | "gt" if min.is_some() => return Err("lower bound given twice".into()),
                        "max" | "lt" if max.is_some() => return Err("upper bound given twice".into()),
                        "min" | "gt" => {
                            min = Some(bound);
                            min_inclusive = key == "min";
                        }
                        "max" | "lt" => {
                            max = Some(bound);
                            max_inclusive = key == "max";
                        }
                        other => return Err(format!("unknown range option `{other}`")),
                    }
                }
                Ok(RefinedType::NumericRange { kind: num, min, max, min_inclusive, max_inclusive })
            }
        }
    }

    fn named_args(&mut self) -> Result<Vec<(String, Literal)>, String> {
        self.cur.expect_punct("(")?;
        let mut out = Vec::new();
        if self.cur.eat_punct(")") {
            return Ok(out);
        }
        loop {
            let key = self.cur.expect_word("option name")?.lexeme.clone();
            self.cur.expect_punct("=")?;
            out.push((key, self.literal()?));
            if self.cur.eat_punct(")") {
                return Ok(out);
            }
            self.cur.expect_punct(",")?;
        }
    }

    fn literal(&mut self) -> Result<Literal, String> {
        literal_from_token(self.cur.peek()).inspect(|_| {
            self.cur.next();
        })
    }
}

pub(crate) fn literal_from_token(t: &Token) -> Result<Literal, String> {
    match t.kind {
        TokenKind::Bool => Ok(Literal::Bool(t.lexeme == "true")),
        TokenKind::Int => t
            .lexeme
            .parse()
            .map(Literal::Int)
            .map_err(|_| format!("integer literal `{}` out of range", t.lexeme)),
        TokenKind::Float => t
            .lexeme
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .map(Literal::Float)
            .ok_or_else(|| format!("float literal `{}` out of range", t.lexeme)),
        TokenKind::Text => Ok(Literal::Text(t.text_value().unwrap_or_default())),
        _ => Err(format!("expected a literal, found {}", crate::lexer::describe(t))),
    }
}
