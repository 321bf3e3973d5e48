//! A syntactic check that derived function-symbol terms cannot grow.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded { rule: String, term: String },
}

/// Columns `(pred, 0-based col)` that only ever hold constants.
pub fn constant_columns(program: &Program) -> BTreeSet<(String, usize)> {
    let mut cols: BTreeSet<(String, usize)> =
        program.predicates().into_iter().flat_map(|(p, n)| (0..n).map(move |i| (p.clone(), i))).collect();
    for f in &program.facts {
        for (i, t) in f.args.iter().enumerate() {
            if matches!(t, Term::App(..)) {
                cols.remove(&(f.pred.clone(), i));
            }
        }
    }
    loop {
        let mut changed = false;
        for r in &program.rules {
            for c in &r.conclusions {
                for (i, t) in c.args.iter().enumerate() {
                    let key = (c.pred.clone(), i);
                    if cols.contains(&key) && !constant_term(t, r, &cols) {
                        cols.remove(&key);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return cols;
        }
    }
}

fn constant_term(t: &Term, rule: &Rule, cols: &BTreeSet<(String, usize)>) -> bool {
    match t {
        Term::Const(_) => true,
        Term::Var(x) => var_at_constant_column(x, rule, cols),
        _ => false,
    }
}

fn var_at_constant_column(x: &str, rule: &Rule, cols: &BTreeSet<(String, usize)>) -> bool {
    rule.positives().any(|a| {
        a.args
            .iter()
            .enumerate()
            .any(|(i, t)| matches!(t, Term::Var(y) if y == x) && cols.contains(&(a.pred.clone(), i)))
    })
}

fn hypothesis_subterms(rule: &Rule) -> Vec<&Term> {
    fn walk<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
        out.push(t);
        if let Term::App(_, args) = t {
            args.iter().for_each(|a| walk(a, out));
        }
    }
    let mut out = Vec::new();
    for a in rule.positives() {
        a.args.iter().for_each(|t| walk(t, &mut out));
    }
    out
}

fn is_hyp_app_argument(x: &str, functor: &str, rule: &Rule) -> bool {
    hypothesis_subterms(rule).into_iter().any(|t| match t {
        Term::App(f, args) => f == functor && args.iter().any(|a| matches!(a, Term::Var(y) if y == x)),
        _ => false,
    })
}

/// Conservative per-functor verdict: every conclusion term of a functor must
/// either be copied from a hypothesis, or be flat with arguments that are
/// constants, variables at constant-valued columns, or arguments of a
/// hypothesis term of the same functor.
pub fn check_size_bounding(program: &Program) -> BTreeMap<String, Verdict> {
    let cols = constant_columns(program);
    let mut out: BTreeMap<String, Verdict> = BTreeMap::new();
    for r in &program.rules {
        for a in r.conclusions.iter().chain(r.positives()) {
            for t in &a.args {
                t.for_each_app(&mut |f, _| {
                    out.entry(f.to_string()).or_insert(Verdict::Bounded);
                });
            }
        }
    }
    for f in &program.facts {
        for t in &f.args {
            t.for_each_app(&mut |g, _| {
                out.entry(g.to_string()).or_insert(Verdict::Bounded);
            });
        }
    }
    for (i, r) in program.rules.iter().enumerate() {
        let subterms = hypothesis_subterms(r);
        for c in &r.conclusions {
            for top in &c.args {
                let mut bad: Option<(String, String)> = None;
                top.for_each_app(&mut |f, args| {
                    if bad.is_some() {
                        return;
                    }
                    let term = Term::App(f.to_string(), args.to_vec());
                    if subterms.contains(&&term) {
                        return;
                    }
                    let flat_ok = args.iter().all(|a| match a {
                        Term::Const(_) => true,
                        Term::Var(x) => var_at_constant_column(x, r, &cols) || is_hyp_app_argument(x, f, r),
                        _ => false,
                    });
                    if !flat_ok {
                        bad = Some((f.to_string(), term.to_string()));
                    }
                });
                if let Some((f, term)) = bad {
                    let rule = r.label.clone().unwrap_or_else(|| format!("rule{}", i + 1));
                    let v = out.entry(f).or_insert(Verdict::Bounded);
                    if *v == Verdict::Bounded {
                        *v = Verdict::Unbounded { rule, term };
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;
    use crate::ir::parse_program;

    #[test]
    fn context_program_is_bounded() {
        let v = check_size_bounding(&get_entry("context-2-1").unwrap().program());
        assert_eq!(v["P"], Verdict::Bounded);
    }

    #[test]
    fn growth_is_unbounded() {
        let v = check_size_bounding(&parse_program("p(F(x)) :- p(x). p(a).").unwrap());
        assert_eq!(v["F"], Verdict::Unbounded { rule: "rule1".into(), term: "F(x)".into() });
    }

    #[test]
    fn every_entry_is_bounded() {
        for e in crate::catalog::entries() {
            let v = check_size_bounding(&e.program());
            assert!(v.values().all(|v| *v == Verdict::Bounded), "{}: {v:?}", e.name);
        }
    }

    #[test]
    fn no_functors() {
        assert!(check_size_bounding(&get_entry("andersen-oo").unwrap().program()).is_empty());
    }
}
