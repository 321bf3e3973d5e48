//! Random flow-must inputs over acyclic control-flow graphs, and brute-force
//! guard counters.

use std::collections::BTreeMap;

use ptlog::eval::{EvalResult, GuardReport};
use ptlog::ir::{Atom, Literal, Program, Term};
use rand::Rng;

use super::naive::{unify, Facts};

fn c(s: String) -> Term {
    Term::Const(s)
}

/// A DAG on at most 15 points with statements placed at random points.
pub fn random_cfg(rng: &mut impl Rng) -> Vec<Atom> {
    let n = rng.gen_range(2..=15);
    let p = |i: usize| c(format!("p{i}"));
    let mut out = Vec::new();
    for j in 1..n {
        let preds = rng.gen_range(1..=2.min(j));
        let mut chosen = Vec::new();
        for _ in 0..preds {
            let i = rng.gen_range(0..j);
            if !chosen.contains(&i) {
                chosen.push(i);
                out.push(Atom::new("next", vec![p(i), p(j)]));
            }
        }
    }
    let var = |rng: &mut dyn rand::RngCore| c(format!("v{}", rng.gen_range(0..4)));
    let heap = |rng: &mut dyn rand::RngCore| c(format!("h{}", rng.gen_range(0..3)));
    let field = |rng: &mut dyn rand::RngCore| c(format!("f{}", rng.gen_range(0..2)));
    for i in 0..n {
        let stmt = match rng.gen_range(0..10) {
            0..=2 => Atom::new("alloc", vec![p(i), var(rng), heap(rng), c("m0".into())]),
            3..=5 => Atom::new("store", vec![p(i), var(rng), field(rng), var(rng)]),
            6 => Atom::new("move", vec![p(i), var(rng), var(rng)]),
            7 => Atom::new("load", vec![p(i), var(rng), var(rng), field(rng)]),
            8 => Atom::new("phi", vec![p(i), var(rng), var(rng), var(rng)]),
            _ => Atom::new("vcall", vec![var(rng), c("s0".into()), p(i), c("m0".into())]),
        };
        out.push(stmt);
    }
    out
}

fn guard_of(program: &Program, text: &str) -> (Atom, Atom) {
    for r in &program.rules {
        for l in &r.hypotheses {
            if let Literal::UniversalGuard { domain, body, .. } = l {
                if l.to_string() == text {
                    return (domain.clone(), body.clone());
                }
            }
        }
    }
    panic!("no guard {text}");
}

/// Differences between reported counters and counts recomputed from the final relations.
pub fn counter_mismatches(program: &Program, result: &EvalResult, input: &Facts) -> Vec<String> {
    let mut facts = input.clone();
    for (p, _) in program.predicates() {
        facts.entry(p.clone()).or_default().extend(result.db.facts(&p));
    }
    let mut out = Vec::new();
    for g in &result.guards {
        let (domain, body) = guard_of(program, &g.text);
        let (total, pt) = brute(g, &domain, &body, &facts);
        if total != g.prev_count {
            out.push(format!("{}: prev_count {:?} vs {:?}", g.text, g.prev_count, total));
        }
        let reported: BTreeMap<_, _> =
            g.prev_pt_count.iter().filter(|(_, n)| **n > 0).map(|(k, n)| (k.clone(), *n)).collect();
        if reported != pt {
            out.push(format!("{}: prev_pt_count differs", g.text));
        }
    }
    out
}

type Counts = BTreeMap<Vec<Term>, u64>;

fn brute(g: &GuardReport, domain: &Atom, body: &Atom, facts: &Facts) -> (Counts, Counts) {
    let tuples = |a: &Atom| facts.get(&a.pred).cloned().unwrap_or_default();
    let mut total = Counts::new();
    let mut pt = Counts::new();
    for d in tuples(domain) {
        let mut env = BTreeMap::new();
        if !domain.args.iter().zip(&d).all(|(p, v)| unify(p, v, &mut env)) {
            continue;
        }
        let j: Vec<Term> = g.j_vars.iter().map(|v| env[v].clone()).collect();
        *total.entry(j).or_insert(0) += 1;
        let mut bodies: Vec<Vec<Term>> = Vec::new();
        for b in tuples(body) {
            let mut e = env.clone();
            if body.args.iter().zip(&b).all(|(p, v)| unify(p, v, &mut e)) {
                let key: Vec<Term> = g.free_vars.iter().map(|v| e[v].clone()).collect();
                if !bodies.contains(&key) {
                    bodies.push(key);
                }
            }
        }
        for key in bodies {
            *pt.entry(key).or_insert(0) += 1;
        }
    }
    (total, pt)
}
