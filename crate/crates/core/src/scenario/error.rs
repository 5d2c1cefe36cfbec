use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: &str, expected: Vec<String>) -> Self {
        ParseError { line, col, message: message.into(), expected }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl ScenarioError {
    pub fn semantic(line: usize, message: impl Into<String>) -> Self {
        ScenarioError::Semantic { line, message: message.into() }
    }
}
