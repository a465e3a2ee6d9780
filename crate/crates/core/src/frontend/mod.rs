//! `.minij` frontend: lexer, parser, pretty-printer and lowering to a
//! [`ProgramModel`](crate::model::ProgramModel).

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod printer;

use thiserror::Error;

use crate::model::ProgramModel;

pub use ast::Ast;
pub use lower::{lower, lower_named};
pub use parser::parse;
pub use printer::{expr as print_expr, print};

/// Source text plus a label used in diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("line {line}: unresolved name `{name}`")]
    Unresolved { line: u32, name: String },
    #[error("line {line}: duplicate declaration of `{name}`")]
    Duplicate { line: u32, name: String },
    #[error("inheritance cycle: {}", classes.join(" -> "))]
    InheritanceCycle { classes: Vec<String> },
    #[error("line {line}: `{expr}` is not an object")]
    NotAnObject { line: u32, expr: String },
    #[error("line {line}: unreachable statement")]
    UnreachableCode { line: u32 },
    #[error("line {line}: `break` outside of a loop or switch")]
    BreakOutsideLoop { line: u32 },
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{path}:{err}")]
    Syntax { path: String, err: SyntaxError },
    #[error(transparent)]
    Lower(#[from] LowerError),
}

/// Parses every unit, merges them into one program and lowers it.
pub fn compile(name: &str, units: &[SourceUnit]) -> Result<ProgramModel, FrontendError> {
    let mut asts = Vec::with_capacity(units.len());
    for u in units {
        asts.push(parse(u).map_err(|err| FrontendError::Syntax {
            path: u.path.clone(),
            err,
        })?);
    }
    Ok(lower_named(&Ast::merge(asts), name)?)
}
