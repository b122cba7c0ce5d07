//! Tokenizer shared by pipeline sources and the block-structured data files
//! (`.mlspec`, `.schema`, `.profile`).

use std::sync::Arc;

use thiserror::Error;

use crate::span::SourceSpan;

/// Reserved words of the pipeline language.
pub const PIPELINE_KEYWORDS: &[&str] = &[
    "pipeline", "load", "schema", "split", "ratios", "stratify", "seed", "fit", "on", "apply",
    "set", "label", "call", "evaluate", "require",
];

const TWO_CHAR_PUNCT: &[&str] = &["==", "!=", ">=", "<=", "->"];
const ONE_CHAR_PUNCT: &str = "=(){},.:|><;-";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Text,
    Int,
    Float,
    Bool,
    Punct,
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: SourceSpan,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.lexeme == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == k
    }

    /// True for identifiers and keywords, i.e. anything shaped like a name.
    pub fn is_word(&self) -> bool {
        matches!(self.kind, TokenKind::Identifier | TokenKind::Keyword)
    }

    /// Unescaped contents of a text literal.
    pub fn text_value(&self) -> Option<String> {
        (self.kind == TokenKind::Text).then(|| unescape(&self.lexeme[1..self.lexeme.len() - 1]))
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LexError {
    #[error("{span}: unterminated text literal")]
    UnterminatedText { span: SourceSpan },
    #[error("{span}: illegal character {ch:?}")]
    IllegalChar { ch: char, span: SourceSpan },
}

impl LexError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            LexError::UnterminatedText { span } | LexError::IllegalChar { span, .. } => span,
        }
    }
}

/// Tokenizes pipeline source; pipeline keywords are classified as such.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source, file, PIPELINE_KEYWORDS).run()
}

/// Tokenizes a data file; every word is an identifier.
pub fn tokenize_plain(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source, file, &[]).run()
}

struct Lexer<'a> {
    src: &'a str,
    file: Arc<str>,
    keywords: &'a [&'a str],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, file: &str, keywords: &'a [&'a str]) -> Self {
        Lexer { src, file: Arc::from(file), keywords, pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, (byte, line, col): (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: line,
            start_col: col,
            end_line: self.line,
            end_col: self.col,
            start_byte: byte,
            end_byte: self.pos,
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia();
            let start = self.mark();
            let Some(c) = self.peek() else {
                tokens.push(Token { kind: TokenKind::Eof, lexeme: String::new(), span: self.span_from(start) });
                return Ok(tokens);
            };
            let kind = if c.is_ascii_alphabetic() || c == '_' {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let word = &self.src[start.0..self.pos];
                if word == "true" || word == "false" {
                    TokenKind::Bool
                } else if self.keywords.contains(&word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                }
            } else if c.is_ascii_digit()
                || (c == '-' && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()))
            {
                self.number()
            } else if c == '"' {
                self.text(start)?
            } else if let Some(p) = TWO_CHAR_PUNCT.iter().find(|p| self.src[self.pos..].starts_with(**p)) {
                self.bump();
                self.bump();
                debug_assert_eq!(&self.src[start.0..self.pos], *p);
                TokenKind::Punct
            } else if ONE_CHAR_PUNCT.contains(c) {
                self.bump();
                TokenKind::Punct
            } else {
                self.bump();
                return Err(LexError::IllegalChar { ch: c, span: self.span_from(start) });
            };
            tokens.push(Token { kind, lexeme: self.src[start.0..self.pos].to_string(), span: self.span_from(start) });
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while matches!(self.peek(), Some(c) if c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> TokenKind {
        let mut kind = TokenKind::Int;
        if self.peek() == Some('-') {
            self.bump();
        }
        self.digits();
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) {
            kind = TokenKind::Float;
            self.bump();
            self.digits();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if matches!(self.peek_at(digit_at), Some(d) if d.is_ascii_digit()) {
                kind = TokenKind::Float;
                for _ in 0..digit_at {
                    self.bump();
                }
                self.digits();
            }
        }
        kind
    }

    fn digits(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
    }

    fn text(&mut self, start: (usize, usize, usize)) -> Result<TokenKind, LexError> {
        self.bump();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    let mut span = self.span_from(start);
                    span.end_line = span.start_line;
                    span.end_col = span.start_col + 1;
                    span.end_byte = span.start_byte + 1;
                    return Err(LexError::UnterminatedText { span });
                }
                Some('\\') => {
                    self.bump();
                    if matches!(self.peek(), Some(c) if c != '\n') {
                        self.bump();
                    }
                }
                Some('"') => {
                    self.bump();
                    return Ok(TokenKind::Text);
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
    }
}

pub fn unescape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Renders `value` as a quoted text literal that re-lexes to the same value.
pub fn quote(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Line-oriented cursor over a token stream, used by the data-file parsers.
pub(crate) struct Cursor<'t> {
    toks: &'t [Token],
    pos: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &'t Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    pub fn next(&mut self) -> &'t Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    /// True when the next token starts a later line than `line` (or is EOF).
    pub fn at_line_end(&self, line: usize) -> bool {
        self.at_eof() || self.peek().span.start_line > line
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.peek().is_word() && self.peek().lexeme == w {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<&'t Token, String> {
        let t = self.peek();
        if t.is_punct(p) {
            Ok(self.next())
        } else {
            Err(format!("expected `{p}`, found {}", describe(t)))
        }
    }

    pub fn expect_word(&mut self, what: &str) -> Result<&'t Token, String> {
        let t = self.peek();
        if t.is_word() {
            Ok(self.next())
        } else {
            Err(format!("expected {what}, found {}", describe(t)))
        }
    }

    pub fn expect_keyword(&mut self, w: &str) -> Result<&'t Token, String> {
        let t = self.peek();
        if t.is_word() && t.lexeme == w {
            Ok(self.next())
        } else {
            Err(format!("expected `{w}`, found {}", describe(t)))
        }
    }

    pub fn expect_text(&mut self, what: &str) -> Result<String, String> {
        let t = self.peek();
        match t.text_value() {
            Some(v) => {
                self.next();
                Ok(v)
            }
            None => Err(format!("expected {what}, found {}", describe(t))),
        }
    }

    /// Skips every remaining token on `line`.
    pub fn skip_line(&mut self, line: usize) {
        while !self.at_eof() && self.peek().span.start_line <= line {
            self.pos += 1;
        }
    }
}

/// Short description of a token for "expected X, found Y" messages.
pub fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Eof => "end of file".to_string(),
        TokenKind::Keyword => format!("keyword `{}`", t.lexeme),
        _ => format!("`{}`", t.lexeme),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src, "t.mlp").unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn misspelled_kernel_declaration() {
        use TokenKind::*;
        let got = kinds(r#"model = SVC(kernel="line")"#);
        let want: Vec<(TokenKind, String)> = [
            (Identifier, "model"),
            (Punct, "="),
            (Identifier, "SVC"),
            (Punct, "("),
            (Identifier, "kernel"),
            (Punct, "="),
            (Text, "\"line\""),
            (Punct, ")"),
            (Eof, ""),
        ]
        .into_iter()
        .map(|(k, s)| (k, s.to_string()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn empty_source_is_just_eof() {
        let toks = tokenize("", "e.mlp").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Eof);
    }

    #[test]
    fn unterminated_text_points_at_opening_quote() {
        let err = tokenize("x = \"unterminated", "u.mlp").unwrap_err();
        match err {
            LexError::UnterminatedText { span } => {
                assert_eq!((span.start_line, span.start_col), (1, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("a = @", "i.mlp").unwrap_err();
        assert!(matches!(err, LexError::IllegalChar { ch: '@', .. }));
        assert_eq!(err.span().start_col, 5);
    }

    #[test]
    fn numbers_and_keywords() {
        use TokenKind::*;
        let got = kinds("split -3 0.15 1e-3 2. true seed");
        let k: Vec<TokenKind> = got.iter().map(|t| t.0).collect();
        assert_eq!(k, vec![Keyword, Int, Float, Float, Int, Punct, Bool, Keyword, Eof]);
    }

    #[test]
    fn lexemes_match_spans_and_escapes_roundtrip() {
        let src = "a = \"q\\\"uo\\\\te\"  # comment\n  b->c";
        let toks = tokenize(src, "s.mlp").unwrap();
        for t in &toks {
            assert_eq!(t.span.slice(src), t.lexeme);
        }
        assert_eq!(toks[2].text_value().unwrap(), "q\"uo\\te");
        assert_eq!(unescape(&quote("x\"\\\n\ty")[1..quote("x\"\\\n\ty").len() - 1]), "x\"\\\n\ty");
        assert_eq!(toks[4].lexeme, "->");
        assert_eq!(toks[4].span.start_line, 2);
    }
}
