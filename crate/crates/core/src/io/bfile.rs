//! OEIS b-files: one `<index> <value>` pair per line, `#` comments.

use std::fmt::Write as _;

use rug::Integer;
use thiserror::Error;

use crate::engine::{IntegerBuffer, SequenceBuffer};
use crate::io::json::decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected index {expected}, found {found}")]
    Gap { line: usize, expected: usize, found: usize },
}

/// Consecutive `(index, value)` entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BFile {
    entries: Vec<(usize, Integer)>,
}

impl BFile {
    pub fn entries(&self) -> &[(usize, Integer)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_index(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn to_buffer(&self) -> IntegerBuffer {
        SequenceBuffer::from_terms(
            self.first_index().unwrap_or(0),
            self.entries.iter().map(|(_, v)| v.clone()).collect(),
        )
    }
}

impl From<&IntegerBuffer> for BFile {
    fn from(buffer: &IntegerBuffer) -> Self {
        BFile {
            entries: buffer.indexed().map(|(i, v)| (i, v.clone())).collect(),
        }
    }
}

pub fn parse_bfile(text: &str) -> Result<BFile, BFileError> {
    let mut entries: Vec<(usize, Integer)> = Vec::new();
    for (line_no, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| BFileError::Parse { line: line_no, message };
        let mut fields = trimmed.split_whitespace();
        let (Some(index), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected \"<index> <value>\", got {trimmed:?}")));
        };
        let index: usize = index
            .bytes()
            .all(|b| b.is_ascii_digit())
            .then(|| index.parse().ok())
            .flatten()
            .ok_or_else(|| parse_err(format!("bad index {index:?}")))?;
        let value = decimal::parse(value).ok_or_else(|| parse_err(format!("bad value {value:?}")))?;
        if let Some((last, _)) = entries.last() {
            if index != last + 1 {
                return Err(BFileError::Gap {
                    line: line_no,
                    expected: last + 1,
                    found: index,
                });
            }
        }
        entries.push((index, value));
    }
    Ok(BFile { entries })
}

/// One `"<index> <value>\n"` line per retained term.
pub fn emit_bfile(buffer: &IntegerBuffer) -> String {
    let mut out = String::new();
    for (index, value) in buffer.indexed() {
        writeln!(out, "{index} {value}").expect("writing to a String");
    }
    out
}
