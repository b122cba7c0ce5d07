//! The pipeline language: AST, parser and formatter.
//!
//! Programs are straight-line: one statement per line, no control flow, no
//! user-defined functions. See `docs/grammar.md` for the grammar.

mod ast;
mod format;
mod parser;

pub use crate::lexer::{tokenize, LexError, Token, TokenKind};
pub use ast::*;
pub use format::{format, format_stmt};
pub use parser::{lex_diagnostic, parse_pipeline, parse_source};
