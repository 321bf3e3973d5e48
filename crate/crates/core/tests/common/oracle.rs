//! Decomposed semi-naive evaluation against the naive undecomposed fixpoint,
//! and observed firings against instantiated rule costs.

use std::collections::BTreeSet;

use ptlog::catalog::get_entry;
use ptlog::cost::{instantiate, program_cost};
use ptlog::eval::{evaluate, Database, EvalOptions, EvalResult};
use ptlog::ir::{Atom, Program, Term};
use ptlog::num::ExtNat;
use ptlog::stats::profile_for;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gen::random_facts;
use super::naive::{facts_of, fixpoint};

pub fn run_engine(program: &Program, facts: &[Atom]) -> EvalResult {
    let mut db = Database::new();
    db.add_atoms(facts).unwrap();
    evaluate(program, db, &EvalOptions::default()).unwrap()
}

pub fn relation(r: &EvalResult, pred: &str) -> BTreeSet<Vec<Term>> {
    r.db.facts(pred).into_iter().collect()
}

#[derive(Debug, Default)]
pub struct Tally {
    pub cases: usize,
    pub mismatches: Vec<String>,
    pub violations: Vec<String>,
}

/// Runs `cases` random fact sets for one catalog entry.
pub fn check_entry(name: &str, cases: usize, seed: u64) -> Tally {
    let entry = get_entry(name).unwrap();
    let original = entry.program();
    let binary = entry.decomposed();
    let table = program_cost(&binary).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    let params = Default::default();
    for case in 0..cases {
        let facts = random_facts(&entry, &mut rng);
        let expected = fixpoint(&original, &facts_of(&facts));
        let got = run_engine(&binary, &facts);
        tally.cases += 1;
        for pred in original.idb_predicates() {
            let want = expected.get(&pred).cloned().unwrap_or_default();
            if relation(&got, &pred) != want {
                tally.mismatches.push(format!("{name} case {case}: {pred} differs"));
            }
        }
        let exprs: Vec<_> = table.rows.iter().map(|r| &r.expr).collect();
        let stats = profile_for(&got.db, &exprs).unwrap().stat_map();
        for row in &table.rows {
            let bound = instantiate(&row.expr, &stats, &params).unwrap();
            let fired = got.trace.firings.get(&row.label).copied().unwrap_or(0);
            if ExtNat::Finite(fired as u128) > bound {
                tally.violations.push(format!("{name} case {case}: {} fired {fired} > {bound}", row.label));
            }
        }
    }
    tally
}
