//! Diagnostics shared by the frontend, the checkers and the CLI.

use std::fmt;

use serde::Serialize;

use crate::syntax::span::{LineIndex, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    UnboundVar,
    TypeMismatch,
    NotAFunction,
    UndefinedSeq,
    UndefinedJoin,
    ResidualUndefined,
    BoundExceeded,
    UncaughtException,
    UndefinedIter,
    SyntaxError,
    UnknownEffect,
    UnknownException,
    UnknownFunction,
    UnknownLabel,
    ArityMismatch,
    DuplicateDefinition,
    InvalidBreak,
    IoError,
    SystemError,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: Kind,
    pub span: Span,
    pub message: String,
    /// Rendered prefix effect at the failing point.
    pub sofar: Option<String>,
    /// Rendered remaining budget the prefix was checked against.
    pub target: Option<String>,
}

impl Diagnostic {
    pub fn new(kind: Kind, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { kind, span, message: message.into(), sofar: None, target: None }
    }

    pub fn with_effects(mut self, sofar: impl Into<String>, target: impl Into<String>) -> Self {
        self.sofar = Some(sofar.into());
        self.target = Some(target.into());
        self
    }
}

/// A diagnostic placed in a file, in the stable output schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub end_line: usize,
    pub end_col: usize,
    pub kind: Kind,
    pub message: String,
    pub sofar: Option<String>,
    pub target: Option<String>,
    pub system: String,
    #[serde(skip)]
    pub offset: usize,
}

impl Report {
    pub fn new(file: &str, index: &LineIndex, system: &str, d: &Diagnostic) -> Self {
        let start = index.line_col(d.span.start);
        let end = index.line_col(d.span.end);
        Report {
            file: file.to_string(),
            line: start.line,
            col: start.col,
            end_line: end.line,
            end_col: end.col,
            kind: d.kind,
            message: d.message.clone(),
            sofar: d.sofar.clone(),
            target: d.target.clone(),
            system: system.to_string(),
            offset: d.span.start,
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}: {}", self.file, self.line, self.col, self.kind, self.message)?;
        match (&self.sofar, &self.target) {
            (Some(s), Some(t)) => write!(f, " [sofar={s}, target={t}]"),
            _ => Ok(()),
        }
    }
}
