//! Naive fixpoint over undecomposed rules: every pass re-fires every rule with
//! an n-way nested-loop join, and guards are checked by enumeration.

use std::collections::{BTreeMap, BTreeSet};

use ptlog::ir::{Atom, Literal, Program, Rule, Term};

pub type Facts = BTreeMap<String, BTreeSet<Vec<Term>>>;
type Env = BTreeMap<String, Term>;

pub fn unify(pat: &Term, val: &Term, env: &mut Env) -> bool {
    match (pat, val) {
        (Term::Wildcard, _) => true,
        (Term::Var(v), _) => match env.get(v) {
            Some(x) => x == val,
            None => {
                env.insert(v.clone(), val.clone());
                true
            }
        },
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, env))
        }
        _ => false,
    }
}

fn subst(t: &Term, env: &Env) -> Term {
    match t {
        Term::Var(v) => env[v].clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst(a, env)).collect()),
        other => other.clone(),
    }
}

fn matches_atom(a: &Atom, facts: &Facts, env: &Env) -> Vec<Env> {
    let mut out = Vec::new();
    for t in facts.get(&a.pred).into_iter().flatten() {
        let mut e = env.clone();
        if t.len() == a.args.len() && a.args.iter().zip(t).all(|(p, v)| unify(p, v, &mut e)) {
            out.push(e);
        }
    }
    out
}

fn holds(lit: &Literal, facts: &Facts, env: &Env) -> bool {
    match lit {
        Literal::Positive(_) => true,
        Literal::NegatedEdb(a) => matches_atom(a, facts, env).is_empty(),
        Literal::Inequality(l, r) => subst(l, env) != subst(r, env),
        Literal::UniversalGuard { bound_var, domain, body } => {
            let mut e = env.clone();
            e.remove(bound_var);
            matches_atom(domain, facts, &e).iter().all(|d| !matches_atom(body, facts, d).is_empty())
        }
        Literal::ExistsOther { pred, prefix, excluded } => {
            let y = subst(excluded, env);
            facts.get(pred).into_iter().flatten().any(|t| {
                let mut e = env.clone();
                t.len() == prefix.len() + 1
                    && prefix.iter().zip(t).all(|(p, v)| unify(p, v, &mut e))
                    && *t.last().unwrap() != y
            })
        }
    }
}

fn fire(rule: &Rule, facts: &Facts) -> Vec<(String, Vec<Term>)> {
    let mut envs = vec![Env::new()];
    for a in rule.positives() {
        envs = envs.iter().flat_map(|e| matches_atom(a, facts, e)).collect();
    }
    let mut out = Vec::new();
    for e in envs {
        if rule.hypotheses.iter().all(|l| holds(l, facts, &e)) {
            for c in &rule.conclusions {
                out.push((c.pred.clone(), c.args.iter().map(|t| subst(t, &e)).collect()));
            }
        }
    }
    out
}

pub fn fixpoint(program: &Program, input: &Facts) -> Facts {
    let mut facts = input.clone();
    for f in &program.facts {
        facts.entry(f.pred.clone()).or_default().insert(f.args.clone());
    }
    loop {
        let mut changed = false;
        for r in &program.rules {
            for (p, t) in fire(r, &facts) {
                changed |= facts.entry(p).or_default().insert(t);
            }
        }
        if !changed {
            return facts;
        }
    }
}

pub fn facts_of(atoms: &[Atom]) -> Facts {
    let mut f = Facts::new();
    for a in atoms {
        f.entry(a.pred.clone()).or_default().insert(a.args.clone());
    }
    f
}
