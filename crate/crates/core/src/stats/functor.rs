//! How many distinct terms each function symbol can build.

use std::collections::{BTreeMap, BTreeSet};

use crate::cost::CostExpr;
use crate::ir::{Program, Rule, Term};

/// A conclusion term not copied verbatim from a hypothesis.
struct Generated<'a> {
    rule: &'a Rule,
    args: &'a [Term],
}

fn generated_terms(program: &Program) -> BTreeMap<String, Vec<Generated<'_>>> {
    let mut out: BTreeMap<String, Vec<Generated>> = BTreeMap::new();
    for rule in &program.rules {
        let in_hyps: Vec<&Term> = rule.positives().flat_map(|a| a.args.iter()).collect();
        for c in &rule.conclusions {
            for t in &c.args {
                if let Term::App(f, args) = t {
                    if !in_hyps.contains(&t) {
                        out.entry(f.clone()).or_default().push(Generated { rule, args });
                    }
                }
            }
        }
    }
    out
}

struct Counter<'a> {
    program: &'a Program,
    idb: BTreeSet<String>,
    gens: BTreeMap<String, Vec<Generated<'a>>>,
}

impl Counter<'_> {
    fn position(&self, f: &str, i: usize, visiting: &mut Vec<(String, usize)>) -> CostExpr {
        let key = (f.to_string(), i);
        if visiting.contains(&key) {
            return CostExpr::Infinity;
        }
        visiting.push(key);
        let mut parts = Vec::new();
        for g in self.gens.get(f).into_iter().flatten() {
            match g.args.get(i) {
                Some(t) => parts.push(self.source(t, g.rule, visiting)),
                None => parts.push(CostExpr::Infinity),
            }
        }
        visiting.pop();
        if parts.is_empty() {
            return CostExpr::Const(1);
        }
        // The same source bounds the same set of values.
        parts.sort();
        parts.dedup();
        CostExpr::sum(parts)
    }

    /// Bound on the values `t` takes in `rule`.
    fn source(&self, t: &Term, rule: &Rule, visiting: &mut Vec<(String, usize)>) -> CostExpr {
        let x = match t {
            Term::Const(_) => return CostExpr::Const(1),
            Term::Var(x) => x,
            _ => return CostExpr::Infinity,
        };
        let mut options = Vec::new();
        for a in rule.positives() {
            for (k, arg) in a.args.iter().enumerate() {
                match arg {
                    Term::Var(y) if y == x && !self.idb.contains(&a.pred) => {
                        options.push(CostExpr::proj(&a.pred, &[k + 1], &[]));
                    }
                    Term::App(g, inner) => {
                        for (j, it) in inner.iter().enumerate() {
                            if matches!(it, Term::Var(y) if y == x) {
                                options.push(self.position(g, j, visiting));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        if options.is_empty() {
            CostExpr::Infinity
        } else {
            CostExpr::min(options)
        }
    }
}

/// `count(F)` for every function symbol: the product over argument positions
/// of the domains their values are drawn from.
pub fn compute_count_bound(program: &Program) -> BTreeMap<String, CostExpr> {
    let c = Counter { program, idb: program.idb_predicates(), gens: generated_terms(program) };
    let mut functors: BTreeMap<String, usize> = BTreeMap::new();
    for r in &c.program.rules {
        for a in r.conclusions.iter().chain(r.positives()) {
            for t in &a.args {
                t.for_each_app(&mut |f, args| {
                    functors.insert(f.to_string(), args.len());
                });
            }
        }
    }
    functors
        .into_iter()
        .map(|(f, n)| {
            let parts = (0..n).map(|i| c.position(&f, i, &mut Vec::new())).collect();
            (f, CostExpr::product(parts))
        })
        .collect()
}

/// Columns (`pred.col`, 1-based) whose values are terms of each function symbol.
pub fn bounded_columns(program: &Program) -> BTreeMap<String, BTreeSet<(String, usize)>> {
    let mut out: BTreeMap<String, BTreeSet<(String, usize)>> = BTreeMap::new();
    for r in &program.rules {
        for c in &r.conclusions {
            for (i, t) in c.args.iter().enumerate() {
                if let Term::App(f, _) = t {
                    out.entry(f.clone()).or_default().insert((c.pred.clone(), i + 1));
                }
            }
        }
    }
    for cols in out.values_mut() {
        loop {
            let mut added = false;
            for r in &program.rules {
                for c in &r.conclusions {
                    for (i, t) in c.args.iter().enumerate() {
                        let Term::Var(x) = t else { continue };
                        let from_bounded = r.positives().any(|a| {
                            a.args.iter().enumerate().any(|(k, arg)| {
                                matches!(arg, Term::Var(y) if y == x) && cols.contains(&(a.pred.clone(), k + 1))
                            })
                        });
                        if from_bounded && cols.insert((c.pred.clone(), i + 1)) {
                            added = true;
                        }
                    }
                }
            }
            if !added {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;
    use crate::cost::parse_cost;

    #[test]
    fn two_call_site_count() {
        let p = get_entry("context-2-1").unwrap().program();
        assert_eq!(compute_count_bound(&p)["P"], parse_cost("#vcall.3 × #vcall.3").unwrap());
        let cols: Vec<String> = bounded_columns(&p)["P"].iter().map(|(q, i)| format!("{q}.{i}")).collect();
        assert_eq!(cols, ["assign.2", "assign.4", "call.2", "call.4", "r.2", "v_pt.2"]);
    }

    #[test]
    fn one_call_site_count() {
        let p = get_entry("context-1-1").unwrap().program();
        assert_eq!(compute_count_bound(&p)["P"], parse_cost("#vcall.3").unwrap());
    }

    #[test]
    fn direct_contribution() {
        let p = crate::ir::parse_program("q(G(x)) :- e(x).").unwrap();
        assert_eq!(compute_count_bound(&p)["G"], parse_cost("#e.1").unwrap());
        assert!(compute_count_bound(&get_entry("andersen-oo").unwrap().program()).is_empty());
    }

    #[test]
    fn unbounded_source_column_does_not_propagate() {
        let p = crate::ir::parse_program("s(x) :- q(F(y),x).\nt(x) :- s(x).\nq(F(a),b).").unwrap();
        assert!(bounded_columns(&p).get("F").is_none_or(|c| c.is_empty()));
    }
}
