//! Concrete syntax: printing, lexing, parsing and `.lb` programs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::basis::BasisEnv;
use crate::term::TermDist;

pub mod lexer;
pub mod parser;
pub mod printer;
pub mod program;

pub use lexer::Span;
pub use parser::{parse_basis, parse_scalar, parse_term, parse_term_in, parse_type, parse_type_in};
pub use printer::{format_scalar, print_basis, print_pure, print_term, print_type};
pub use program::{parse_program, Goal, GoalKind, SourceProgram};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Named bases and closed term definitions visible while parsing.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub bases: BasisEnv,
    pub defs: BTreeMap<String, TermDist>,
}

impl Env {
    pub fn define(&mut self, name: &str, term: TermDist) {
        self.defs.insert(name.to_string(), term);
    }
}
