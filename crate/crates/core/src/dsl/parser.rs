use super::ast::*;
use crate::diagnostic::{codes, Diagnostic};
use crate::lexer::{describe, LexError, Token, TokenKind};
use crate::span::SourceSpan;

struct ParseError {
    span: SourceSpan,
    message: String,
}

type PResult<T> = Result<T, ParseError>;

/// Turns a lexer failure into a diagnostic.
pub fn lex_diagnostic(err: &LexError) -> Diagnostic {
    match err {
        LexError::UnterminatedText { span } => {
            Diagnostic::new(codes::LEX_UNTERMINATED, span.clone(), "unterminated text literal")
        }
        LexError::IllegalChar { ch, span } => {
            Diagnostic::new(codes::LEX_ILLEGAL_CHAR, span.clone(), format!("illegal character {ch:?}"))
        }
    }
}

/// Parses a token stream into a pipeline.
///
/// Syntax errors never stop the parse: the offending line is skipped and
/// parsing resumes at the next line, so the returned pipeline holds every
/// statement that did parse.
pub fn parse_pipeline(tokens: &[Token]) -> (Pipeline, Vec<Diagnostic>) {
    assert!(matches!(tokens.last(), Some(t) if t.kind == TokenKind::Eof), "token stream must end with EOF");
    let mut p = Parser { toks: tokens, pos: 0, diags: Vec::new() };
    let pipeline = p.pipeline();
    (pipeline, p.diags)
}

/// Tokenizes and parses in one step; a lexing failure yields an empty
/// pipeline and a single lexer diagnostic.
pub fn parse_source(source: &str, file: &str) -> (Pipeline, Vec<Diagnostic>) {
    match crate::lexer::tokenize(source, file) {
        Ok(tokens) => parse_pipeline(&tokens),
        Err(e) => {
            let span = SourceSpan { file: e.span().file.clone(), ..SourceSpan::default() };
            let empty = Pipeline { name: Ident { name: String::new(), span: span.clone() }, statements: vec![], span };
            (empty, vec![lex_diagnostic(&e)])
        }
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &'t Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> &'t Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev(&self) -> Option<&'t Token> {
        self.pos.checked_sub(1).map(|i| &self.toks[i])
    }

    /// Error for "expected `what`" at the current token. When the current
    /// token is on a later line than the statement, the error is placed at the
    /// end of the last token of the statement instead.
    fn expected(&self, what: &str, line: usize) -> ParseError {
        let t = self.peek();
        match self.prev() {
            Some(prev) if t.span.start_line > line || t.kind == TokenKind::Eof => ParseError {
                span: prev.span.end_point(),
                message: format!("expected {what} before end of line"),
            },
            _ => ParseError { span: t.span.clone(), message: format!("expected {what}, found {}", describe(t)) },
        }
    }

    fn on_line(&self, line: usize) -> bool {
        let t = self.peek();
        t.kind != TokenKind::Eof && t.span.start_line == line
    }

    fn punct(&mut self, p: &str, line: usize) -> PResult<&'t Token> {
        if self.on_line(line) && self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.expected(&format!("`{p}`"), line))
        }
    }

    fn keyword(&mut self, k: &str, line: usize) -> PResult<&'t Token> {
        if self.on_line(line) && self.peek().is_keyword(k) {
            Ok(self.bump())
        } else {
            Err(self.expected(&format!("`{k}`"), line))
        }
    }

    /// A variable name: identifiers only.
    fn var(&mut self, line: usize) -> PResult<Ident> {
        let t = self.peek();
        if self.on_line(line) && t.kind == TokenKind::Identifier {
            self.bump();
            Ok(Ident { name: t.lexeme.clone(), span: t.span.clone() })
        } else {
            Err(self.expected("a variable name", line))
        }
    }

    /// An entity, parameter, method or metric name; keywords are allowed.
    fn name(&mut self, what: &str, line: usize) -> PResult<Ident> {
        let t = self.peek();
        if self.on_line(line) && t.is_word() {
            self.bump();
            Ok(Ident { name: t.lexeme.clone(), span: t.span.clone() })
        } else {
            Err(self.expected(what, line))
        }
    }

    fn literal(&mut self, line: usize) -> PResult<Lit> {
        self.literal_of(&[TokenKind::Bool, TokenKind::Int, TokenKind::Float, TokenKind::Text], "a literal", line)
    }

    fn literal_of(&mut self, kinds: &[TokenKind], what: &str, line: usize) -> PResult<Lit> {
        let t = self.peek();
        if !self.on_line(line) || !kinds.contains(&t.kind) {
            return Err(self.expected(what, line));
        }
        self.bump();
        let value = crate::apispec::parse::literal_from_token(t)
            .map_err(|message| ParseError { span: t.span.clone(), message })?;
        Ok(Lit { value, span: t.span.clone() })
    }

    fn text(&mut self, line: usize) -> PResult<Lit> {
        self.literal_of(&[TokenKind::Text], "a quoted text", line)
    }

    fn number(&mut self, line: usize) -> PResult<Lit> {
        self.literal_of(&[TokenKind::Int, TokenKind::Float], "a number", line)
    }

    fn report(&mut self, e: ParseError) {
        self.diags.push(Diagnostic::new(codes::SYNTAX, e.span, e.message));
    }

    fn skip_line(&mut self, line: usize) {
        while self.peek().kind != TokenKind::Eof && self.peek().span.start_line <= line {
            self.bump();
        }
    }

    fn pipeline(&mut self) -> Pipeline {
        let first = self.peek();
        let line = first.span.start_line;
        let header: PResult<Ident> = (|| {
            self.keyword("pipeline", line)?;
            let name = self.var(line)?;
            self.punct("{", line)?;
            Ok(name)
        })();
        let name = match header {
            Ok(n) => n,
            Err(e) => {
                self.report(e);
                self.skip_line(line);
                Ident { name: String::new(), span: first.span.start_point() }
            }
        };

        let mut statements = Vec::new();
        let close = loop {
            let t = self.peek();
            if t.kind == TokenKind::Eof {
                let e = ParseError { span: t.span.clone(), message: "expected `}` to close the pipeline".into() };
                self.report(e);
                break t;
            }
            if t.is_punct("}") {
                self.bump();
                break t;
            }
            let line = t.span.start_line;
            match self.statement() {
                Ok(stmt) => {
                    let next = self.peek();
                    if self.on_line(line) && !next.is_punct("}") {
                        self.report(ParseError {
                            span: next.span.clone(),
                            message: format!("expected end of line, found {}", describe(next)),
                        });
                        self.skip_line(line);
                    }
                    statements.push(stmt);
                }
                Err(e) => {
                    self.report(e);
                    self.skip_line(line);
                }
            }
        };
        let trailing = self.peek();
        if trailing.kind != TokenKind::Eof {
            self.report(ParseError {
                span: trailing.span.clone(),
                message: format!("expected end of file after the pipeline, found {}", describe(trailing)),
            });
        }
        let span = first.span.to(&close.span);
        Pipeline { name, statements, span }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.peek();
        let line = start.span.start_line;
        let kind = if start.is_keyword("set") {
            self.bump();
            let model = self.var(line)?;
            self.punct(".", line)?;
            let param = self.name("a parameter name", line)?;
            self.punct("=", line)?;
            let value = self.literal(line)?;
            StmtKind::SetParam { model, param, value }
        } else if start.is_keyword("fit") {
            self.bump();
            let model = self.var(line)?;
            self.keyword("on", line)?;
            let dataset = self.var(line)?;
            self.keyword("label", line)?;
            let label = self.text(line)?;
            StmtKind::Fit { model, dataset, label }
        } else if start.is_keyword("call") {
            self.call(None, line)?
        } else if start.is_keyword("require") {
            self.bump();
            let metric = self.name("a metric name", line)?;
            let op = if self.on_line(line) && self.peek().is_punct(">=") {
                RequireOp::AtLeast
            } else if self.on_line(line) && self.peek().is_punct(">") {
                RequireOp::Above
            } else {
                return Err(self.expected("`>=` or `>`", line));
            };
            self.bump();
            let threshold = self.number(line)?;
            StmtKind::Require { metric, op, threshold }
        } else if start.kind == TokenKind::Identifier && self.peek_at(1).is_punct(",") {
            self.split(line)?
        } else if start.kind == TokenKind::Identifier && self.peek_at(1).is_punct("=") {
            let var = self.var(line)?;
            self.bump();
            self.assignment(var, line)?
        } else {
            return Err(self.expected("a statement", line));
        };
        let end = self.prev().map(|t| t.span.clone()).unwrap_or_else(|| start.span.clone());
        Ok(Stmt { kind, span: start.span.to(&end) })
    }

    fn call(&mut self, var: Option<Ident>, line: usize) -> PResult<StmtKind> {
        self.keyword("call", line)?;
        let model = self.var(line)?;
        self.punct(".", line)?;
        let method = self.name("a method name", line)?;
        let dataset = self.var(line)?;
        Ok(StmtKind::Call { var, model, method, dataset })
    }

    fn split(&mut self, line: usize) -> PResult<StmtKind> {
        let train = self.var(line)?;
        self.punct(",", line)?;
        let val = self.var(line)?;
        self.punct(",", line)?;
        let test = self.var(line)?;
        self.punct("=", line)?;
        self.keyword("split", line)?;
        let source = self.var(line)?;
        self.keyword("ratios", line)?;
        let open = self.punct("(", line)?;
        let a = self.number(line)?;
        self.punct(",", line)?;
        let b = self.number(line)?;
        self.punct(",", line)?;
        let c = self.number(line)?;
        let close = self.punct(")", line)?;
        let ratios = Ratios { values: [a, b, c], span: open.span.to(&close.span) };
        let stratify = if self.on_line(line) && self.peek().is_keyword("stratify") {
            self.bump();
            Some(self.text(line)?)
        } else {
            None
        };
        let seed = if self.on_line(line) && self.peek().is_keyword("seed") {
            self.bump();
            Some(self.literal_of(&[TokenKind::Int], "an integer seed", line)?)
        } else {
            None
        };
        Ok(StmtKind::Split { train, val, test, source, ratios, stratify, seed })
    }

    fn assignment(&mut self, var: Ident, line: usize) -> PResult<StmtKind> {
        let t = self.peek();
        if !self.on_line(line) {
            return Err(self.expected("a value", line));
        }
        if t.is_keyword("load") {
            self.bump();
            let path = self.text(line)?;
            let schema = if self.on_line(line) && self.peek().is_keyword("schema") {
                self.bump();
                Some(self.text(line)?)
            } else {
                None
            };
            Ok(StmtKind::Load { var, path, schema })
        } else if t.is_keyword("apply") {
            self.bump();
            let transform = self.var(line)?;
            let dataset = self.var(line)?;
            Ok(StmtKind::Apply { var, transform, dataset })
        } else if t.is_keyword("call") {
            self.call(Some(var), line)
        } else if t.is_keyword("evaluate") {
            self.bump();
            let metric = self.name("a metric name", line)?;
            let model = self.var(line)?;
            self.keyword("on", line)?;
            let dataset = self.var(line)?;
            Ok(StmtKind::Evaluate { var, metric, model, dataset })
        } else if t.is_word() && self.peek_at(1).is_punct("(") {
            let entity = self.name("an entity name", line)?;
            let args = self.args(line)?;
            if self.on_line(line) && self.peek().is_keyword("fit") {
                self.bump();
                self.keyword("on", line)?;
                let fit_on = self.var(line)?;
                Ok(StmtKind::TransformDecl { var, entity, args, fit_on })
            } else {
                Ok(StmtKind::ModelDecl { var, entity, args })
            }
        } else {
            Err(self.expected("`load`, `apply`, `call`, `evaluate` or an entity instantiation", line))
        }
    }

    fn args(&mut self, line: usize) -> PResult<Vec<Arg>> {
        self.punct("(", line)?;
        let mut args = Vec::new();
        if self.on_line(line) && self.peek().is_punct(")") {
            self.bump();
            return Ok(args);
        }
        loop {
            let name = self.name("an argument name", line)?;
            self.punct("=", line)?;
            let value = self.literal(line)?;
            let span = name.span.to(&value.span);
            args.push(Arg { name, value, span });
            if self.on_line(line) && self.peek().is_punct(")") {
                self.bump();
                return Ok(args);
            }
            if !(self.on_line(line) && self.peek().is_punct(",")) {
                return Err(self.expected("`,` or `)`", line));
            }
            self.bump();
        }
    }
}
