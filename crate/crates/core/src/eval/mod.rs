//! Bottom-up evaluation of binary programs.

mod bounding;
mod database;
mod engine;
mod guard;
mod pattern;
mod plan;
mod relation;
mod rewrite;
mod store;

pub use bounding::{check_size_bounding, constant_columns, Verdict};
pub use database::{format_field, parse_field, Database, FactsError};
pub use engine::{evaluate, EvalError, EvalOptions, EvalResult, EvalTrace, GuardReport, TermPolicy};
pub use plan::PlanError;
pub use relation::{Relation, Tuple};
pub use rewrite::{apply_inequality_optimization, optimize_inequalities};
pub use store::{Id, TermStore};
