//! A Datalog engine and complexity analyzer for pointer analyses.
//!
//! The pipeline is: parse rules ([`ir`]), split rules into at most two positive
//! hypotheses ([`decompose`]), evaluate bottom-up ([`eval`]), measure relation
//! statistics ([`stats`]) and derive per-rule complexity bounds ([`cost`]).
//! The shipped analyses live in [`catalog`]; [`frontend`] turns a small
//! statement language into EDB facts.

pub mod catalog;
pub mod cli;
pub mod cost;
pub mod decompose;
pub mod eval;
pub mod frontend;
pub mod ir;
pub mod num;
pub mod stats;
