//! Source locations.

use std::fmt;
use std::sync::Arc;

/// A region of a source file.
///
/// Lines and columns are 1-based and count Unicode scalar values; byte
/// offsets are 0-based. The end position is exclusive in both systems.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
    pub start_byte: usize,
    pub end_byte: usize,
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan {
            file: Arc::from(""),
            start_line: 1,
            start_col: 1,
            end_line: 1,
            end_col: 1,
            start_byte: 0,
            end_byte: 0,
        }
    }
}

impl SourceSpan {
    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let (start, end) = if self.start_byte <= other.start_byte {
            (self, other)
        } else {
            (other, self)
        };
        let end = if end.end_byte >= start.end_byte { end } else { start };
        SourceSpan {
            file: self.file.clone(),
            start_line: start.start_line,
            start_col: start.start_col,
            end_line: end.end_line,
            end_col: end.end_col,
            start_byte: start.start_byte,
            end_byte: end.end_byte,
        }
    }

    /// Zero-width span at the end of `self`.
    pub fn end_point(&self) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: self.end_line,
            start_col: self.end_col,
            end_line: self.end_line,
            end_col: self.end_col,
            start_byte: self.end_byte,
            end_byte: self.end_byte,
        }
    }

    /// Zero-width span at the start of `self`.
    pub fn start_point(&self) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: self.start_line,
            end_col: self.start_col,
            start_byte: self.start_byte,
            end_byte: self.start_byte,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn slice<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start_byte..self.end_byte]
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}
