//! The rule language.

mod ast;
mod parser;
mod validate;

pub use ast::{Atom, Declaration, Literal, PredKind, Program, Rule, Term};
pub use parser::{parse_ground_term, parse_program, ParseError};
pub use validate::{classify, safety_violations, validate, Diagnostic, DiagnosticKind};
