//! Symbolic time-complexity bounds.

mod expr;
mod poly;
pub mod preset;
mod report;
mod rule;
mod simplify;

pub use expr::{instantiate, parse_cost, CostError, CostExpr};
pub use poly::{Mono, Poly};
pub use report::{Analysis, Report, ReportRow};
pub use rule::{atom_size, derive_idb_size_bounds, program_cost, rule_cost, CostTable, GuardCost, RuleCost};
pub use simplify::{idb_bounds, poly_of, simplify_poly, simplify_under, Assumptions};
