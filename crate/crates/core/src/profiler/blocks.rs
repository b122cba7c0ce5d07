//! Reader for the `key = value` block files used by `.schema` and
//! `.profile`:
//!
//! ```text
//! source = "train.csv"
//! column age { kind = numeric; unit = "years" }
//! ```

use crate::lexer::{describe, tokenize_plain, LexError, Token, TokenKind};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Value {
    Word(String),
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    List(Vec<Value>),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Word(s) | Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_count(&self) -> Option<usize> {
        match self {
            Value::Int(i) => usize::try_from(*i).ok(),
            _ => None,
        }
    }
}

/// `key [qualifier] = value`; the qualifier is a text literal, as in
/// `count "male" = 577`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Entry {
    pub key: String,
    pub qualifier: Option<String>,
    pub value: Value,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Block {
    pub kind: String,
    pub name: String,
    pub entries: Vec<Entry>,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct BlockFile {
    pub top: Vec<Entry>,
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct BlockError {
    pub line: usize,
    pub message: String,
}

struct Reader<'t> {
    toks: &'t [Token],
    pos: usize,
}

impl<'t> Reader<'t> {
    fn peek_at(&self, n: usize) -> &'t Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> &'t Token {
        let t = self.peek_at(0);
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: String) -> Result<T, BlockError> {
        Err(BlockError { line: self.peek_at(0).span.start_line, message })
    }

    fn word(&mut self, what: &str) -> Result<String, BlockError> {
        let t = self.peek_at(0);
        if t.is_word() {
            self.next();
            Ok(t.lexeme.clone())
        } else {
            self.err(format!("expected {what}, found {}", describe(t)))
        }
    }

    fn punct(&mut self, p: &str) -> Result<(), BlockError> {
        if self.peek_at(0).is_punct(p) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", describe(self.peek_at(0))))
        }
    }

    fn value(&mut self) -> Result<Value, BlockError> {
        let t = self.peek_at(0);
        let v = match t.kind {
            TokenKind::Identifier | TokenKind::Keyword => Value::Word(t.lexeme.clone()),
            TokenKind::Text => Value::Text(t.text_value().unwrap_or_default()),
            TokenKind::Int => match t.lexeme.parse() {
                Ok(i) => Value::Int(i),
                Err(_) => return self.err(format!("integer `{}` is out of range", t.lexeme)),
            },
            TokenKind::Float => match t.lexeme.parse() {
                Ok(f) => Value::Float(f),
                Err(_) => return self.err(format!("malformed number `{}`", t.lexeme)),
            },
            TokenKind::Bool => Value::Bool(t.lexeme == "true"),
            TokenKind::Punct if t.lexeme == "(" => {
                self.next();
                let mut items = Vec::new();
                if !self.peek_at(0).is_punct(")") {
                    loop {
                        items.push(self.value()?);
                        if self.peek_at(0).is_punct(",") {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.punct(")")?;
                return Ok(Value::List(items));
            }
            _ => return self.err(format!("expected a value, found {}", describe(t))),
        };
        self.next();
        Ok(v)
    }

    fn entry(&mut self) -> Result<Entry, BlockError> {
        let line = self.peek_at(0).span.start_line;
        let key = self.word("a key")?;
        let qualifier = match self.peek_at(0).kind {
            TokenKind::Text => Some(self.next().text_value().unwrap_or_default()),
            _ => None,
        };
        self.punct("=")?;
        let value = self.value()?;
        Ok(Entry { key, qualifier, value, line })
    }

    fn block(&mut self) -> Result<Block, BlockError> {
        let line = self.peek_at(0).span.start_line;
        let kind = self.word("a block kind")?;
        let name_tok = self.next();
        let name = match name_tok.kind {
            TokenKind::Text => name_tok.text_value().unwrap_or_default(),
            _ if name_tok.is_word() => name_tok.lexeme.clone(),
            _ => return Err(BlockError { line, message: format!("expected a name, found {}", describe(name_tok)) }),
        };
        self.punct("{")?;
        let mut entries = Vec::new();
        loop {
            while self.peek_at(0).is_punct(";") {
                self.next();
            }
            if self.peek_at(0).is_punct("}") {
                self.next();
                break;
            }
            if self.peek_at(0).kind == TokenKind::Eof {
                return Err(BlockError { line, message: format!("block `{name}` is not closed") });
            }
            entries.push(self.entry()?);
        }
        Ok(Block { kind, name, entries, line })
    }
}

pub(crate) fn parse_blocks(source: &str) -> Result<BlockFile, BlockError> {
    let toks = tokenize_plain(source, "").map_err(|e| {
        let line = e.span().start_line;
        let message = match e {
            LexError::UnterminatedText { .. } => "unterminated text literal".to_string(),
            LexError::IllegalChar { ch, .. } => format!("illegal character {ch:?}"),
        };
        BlockError { line, message }
    })?;
    let mut r = Reader { toks: &toks, pos: 0 };
    let mut file = BlockFile::default();
    while r.peek_at(0).kind != TokenKind::Eof {
        if r.peek_at(0).is_punct(";") {
            r.next();
            continue;
        }
        if r.peek_at(1).is_punct("=") || r.peek_at(2).is_punct("=") && r.peek_at(1).kind == TokenKind::Text {
            file.top.push(r.entry()?);
        } else {
            file.blocks.push(r.block()?);
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_top_entries_and_blocks() {
        let f = parse_blocks("source = \"a.csv\"\nrows = 3\ncolumn x { kind = numeric; mean = -0.5 }\ncolumn \"y z\" {\n  count \"m\" = 2\n  order = (\"a\", \"b\")\n}\n").unwrap();
        assert_eq!(f.top.len(), 2);
        assert_eq!(f.top[0].value, Value::Text("a.csv".into()));
        assert_eq!(f.blocks[0].entries[1].value, Value::Float(-0.5));
        assert_eq!(f.blocks[1].name, "y z");
        assert_eq!(f.blocks[1].entries[0].qualifier.as_deref(), Some("m"));
        assert_eq!(f.blocks[1].entries[1].value, Value::List(vec![Value::Text("a".into()), Value::Text("b".into())]));
    }

    #[test]
    fn unclosed_block_names_line() {
        let e = parse_blocks("\ncolumn x { kind = numeric").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("not closed"));
    }
}
