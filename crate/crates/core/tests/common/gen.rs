//! Random EDB facts shaped by a catalog entry's column classes.

use std::collections::BTreeSet;

use ptlog::catalog::CatalogEntry;
use ptlog::ir::{Atom, Term};
use rand::seq::SliceRandom;
use rand::Rng;

fn prefix(class: &str) -> &'static str {
    match class {
        "variable" => "v",
        "heap" => "h",
        "field" => "f",
        "method" => "m",
        "type" => "t",
        "signature" => "s",
        "point" => "p",
        "index" => "n",
        _ => "c",
    }
}

/// Seed fact for the reachable-method relation, if the entry has one.
pub fn seed(entry: &CatalogEntry) -> Option<Atom> {
    let c = |s: &str| Term::Const(s.to_string());
    let null = || c("null");
    match entry.name {
        "interprocedural" | "arrays" | "exceptions" => Some(Atom::new("r", vec![c("m0")])),
        "context-2-1" => Some(Atom::new("r", vec![c("m0"), Term::App("P".into(), vec![null(), null()])])),
        "context-1-1" | "context-0-1" => Some(Atom::new("r", vec![c("m0"), Term::App("P".into(), vec![null()])])),
        _ => None,
    }
}

/// At most 20 variables, 10 heap objects and 30 statements. A statement is a
/// tuple of a relation with a variable column; type and dispatch tables get
/// one to three tuples each on top.
pub fn random_facts(entry: &CatalogEntry, rng: &mut impl Rng) -> Vec<Atom> {
    let program = entry.program();
    let idb = program.idb_predicates();
    let mut edb: Vec<(String, usize)> = program.predicates().into_iter().filter(|(p, _)| !idb.contains(p)).collect();
    edb.shuffle(rng);
    let pool = |class: &str, rng: &mut dyn rand::RngCore| -> usize {
        match class {
            "variable" => rng.gen_range(1..=20),
            "heap" => rng.gen_range(1..=10),
            "point" => 4,
            _ => 2,
        }
    };
    let sizes: Vec<(String, usize)> =
        ["variable", "heap", "point", "method", "field", "type", "signature", "index", "context"]
            .iter()
            .map(|c| (c.to_string(), pool(c, rng)))
            .collect();
    let size_of = |c: &str| sizes.iter().find(|(k, _)| k == c).map_or(3, |(_, n)| *n);

    let mut out = Vec::new();
    let mut budget = 30usize;
    for (pred, arity) in edb {
        let classes: Vec<String> = match entry.column_classes(&pred) {
            Some(c) => c.iter().map(|s| s.to_string()).collect(),
            None => vec!["other".to_string(); arity],
        };
        let n = if classes.iter().any(|c| c == "variable") {
            let n = rng.gen_range(1..=4).min(budget);
            budget -= n;
            n
        } else {
            rng.gen_range(1..=3)
        };
        let mut seen = BTreeSet::new();
        for _ in 0..n {
            let args: Vec<Term> = classes
                .iter()
                .map(|c| {
                    // Skewed towards small indices so that facts join.
                    let k = size_of(c);
                    let i = rng.gen_range(0..k).min(rng.gen_range(0..k));
                    Term::Const(format!("{}{i}", prefix(c)))
                })
                .collect();
            if seen.insert(args.clone()) {
                out.push(Atom::new(&pred, args));
            }
        }
    }
    out.extend(seed(entry));
    out
}
