//! Structured-text files for instances and solutions (TOML documents).

mod instance_file;
mod solution_file;

use std::fmt;
use std::ops::Range;

pub use instance_file::{read_instance, write_instance};
pub use solution_file::{read_solution, write_solution, SolutionMeta};

/// Parse or validation failure with a 1-based line and column when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl FileError {
    pub(crate) fn at(text: &str, span: Option<Range<usize>>, message: impl Into<String>) -> Self {
        let (line, column) = match span {
            Some(r) => {
                let (l, c) = line_col(text, r.start);
                (Some(l), Some(c))
            }
            None => (None, None),
        };
        Self {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn from_toml(text: &str, err: toml::de::Error) -> Self {
        Self::at(text, err.span(), err.message().trim().to_string())
    }
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {}, column {}: {}", l, c, self.message),
            (Some(l), None) => write!(f, "line {}: {}", l, self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for FileError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.len(), |p| before.len() - p - 1)
        + 1;
    (line, col)
}

/// Float with 17 significant digits, which round-trips every `f64`.
pub(crate) fn float(v: f64) -> String {
    format!("{:.16e}", v)
}
