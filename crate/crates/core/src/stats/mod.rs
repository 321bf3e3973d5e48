//! Relation statistics and function-symbol bounds.

mod functor;
mod profile;

pub use functor::{bounded_columns, compute_count_bound};
pub use profile::{profile, profile_for, proj_count, Request, StatsError, StatsProfile};
