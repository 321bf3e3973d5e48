//! Binary decomposition of rules with more than two positive hypotheses.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{Atom, Literal, Program, Rule, Term};
use crate::num::ExtNat;

/// Size bounds per column class and the class of every known predicate column.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DomainInfo {
    pub class_sizes: BTreeMap<String, ExtNat>,
    pub columns: BTreeMap<String, Vec<String>>,
}

impl DomainInfo {
    pub fn column_class(&self, pred: &str, col: usize) -> Option<&str> {
        self.columns.get(pred).and_then(|c| c.get(col)).map(String::as_str)
    }

    /// Unknown columns and classes are unbounded.
    pub fn column_size(&self, pred: &str, col: usize) -> ExtNat {
        self.column_class(pred, col).and_then(|c| self.class_sizes.get(c).copied()).unwrap_or(ExtNat::Infinite)
    }

    pub fn relation_bound(&self, pred: &str, arity: usize) -> ExtNat {
        ExtNat::product((0..arity).map(|i| self.column_size(pred, i)))
    }

    /// Smallest class among the top-level occurrences of `var`.
    fn var_class<'a>(&'a self, var: &str, atoms: &[Atom]) -> Option<&'a str> {
        let mut best: Option<(&str, ExtNat)> = None;
        for a in atoms {
            for (i, t) in a.args.iter().enumerate() {
                if !matches!(t, Term::Var(v) if v == var) {
                    continue;
                }
                if let Some(c) = self.column_class(&a.pred, i) {
                    let s = self.class_sizes.get(c).copied().unwrap_or(ExtNat::Infinite);
                    if best.is_none_or(|(_, b)| s < b) {
                        best = Some((c, s));
                    }
                }
            }
        }
        best.map(|(c, _)| c)
    }

    fn var_size(&self, var: &str, atoms: &[Atom]) -> ExtNat {
        self.var_class(var, atoms).and_then(|c| self.class_sizes.get(c).copied()).unwrap_or(ExtNat::Infinite)
    }
}

/// Optional size information consulted by the pair heuristic.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecomposeOptions<'a> {
    pub domain: Option<&'a DomainInfo>,
    /// Measured EDB relation sizes.
    pub edb_sizes: Option<&'a BTreeMap<String, u128>>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PairScore {
    pub removable_vars: BTreeSet<String>,
    pub removable_domain_product: Option<ExtNat>,
    pub shared_vars: usize,
    pub edb_count: usize,
    pub edb_size_product: Option<ExtNat>,
    pub position: (usize, usize),
    pub subset: bool,
}

fn var_set(a: &Atom) -> BTreeSet<&str> {
    a.vars().into_iter().collect()
}

/// Variables occurring outside the positive hypotheses: conclusions and every
/// non-positive literal of `context`.
fn outside_vars(context: &Rule) -> BTreeSet<&str> {
    let mut out: BTreeSet<&str> = context.conclusions.iter().flat_map(|c| c.vars()).collect();
    for l in &context.hypotheses {
        if !l.is_positive() {
            out.extend(l.vars());
        }
    }
    out
}

fn score_pair(
    hyps: &[Atom],
    i: usize,
    j: usize,
    outside: &BTreeSet<&str>,
    is_edb: &dyn Fn(&str) -> bool,
    opts: &DecomposeOptions,
) -> PairScore {
    let (a, b) = (var_set(&hyps[i]), var_set(&hyps[j]));
    let elsewhere: BTreeSet<&str> = hyps
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i && *k != j)
        .flat_map(|(_, h)| h.vars())
        .chain(outside.iter().copied())
        .collect();
    let removable: BTreeSet<String> =
        a.intersection(&b).filter(|v| !elsewhere.contains(*v)).map(|v| v.to_string()).collect();
    let removable_domain_product = opts.domain.map(|d| ExtNat::product(removable.iter().map(|v| d.var_size(v, hyps))));
    let edb: Vec<&Atom> = [&hyps[i], &hyps[j]].into_iter().filter(|h| is_edb(&h.pred)).collect();
    let edb_size_product = if let Some(sizes) = opts.edb_sizes {
        Some(ExtNat::product(edb.iter().map(|h| sizes.get(&h.pred).map_or(ExtNat::Infinite, |&n| ExtNat::Finite(n)))))
    } else {
        opts.domain.map(|d| ExtNat::product(edb.iter().map(|h| d.relation_bound(&h.pred, h.arity()))))
    };
    PairScore {
        removable_domain_product,
        shared_vars: a.intersection(&b).count(),
        edb_count: edb.len(),
        edb_size_product,
        position: (i, j),
        subset: a.is_subset(&b) || b.is_subset(&a),
        removable_vars: removable,
    }
}

fn keep_best<K: Ord + Copy>(cands: &mut Vec<PairScore>, key: impl Fn(&PairScore) -> K) {
    if let Some(best) = cands.iter().map(&key).max() {
        cands.retain(|c| key(c) == best);
    }
}

/// Chooses the pair of hypotheses to join next. `context` supplies the
/// conclusions and non-positive literals; its positive literals are ignored.
pub fn select_pair(hyps: &[Atom], context: &Rule, is_edb: &dyn Fn(&str) -> bool, opts: &DecomposeOptions) -> PairScore {
    assert!(hyps.len() >= 2, "select_pair needs two hypotheses");
    let outside = outside_vars(context);
    let mut cands = Vec::new();
    for i in 0..hyps.len() {
        for j in i + 1..hyps.len() {
            cands.push(score_pair(hyps, i, j, &outside, is_edb, opts));
        }
    }
    if cands.iter().any(|c| c.subset) {
        cands.retain(|c| c.subset);
    } else {
        keep_best(&mut cands, |c| c.removable_vars.len());
        keep_best(&mut cands, |c| c.removable_domain_product);
        keep_best(&mut cands, |c| c.shared_vars);
        keep_best(&mut cands, |c| c.edb_count);
        keep_best(&mut cands, |c| c.edb_size_product.map(std::cmp::Reverse));
    }
    cands.into_iter().min_by_key(|c| c.position).unwrap()
}

/// Source of fresh intermediate predicate names.
#[derive(Debug, Clone)]
pub struct Namer {
    counter: usize,
    taken: BTreeSet<String>,
}

impl Namer {
    pub fn new(program: &Program) -> Namer {
        Namer { counter: 0, taken: program.predicates().into_keys().collect() }
    }

    pub fn fresh(&mut self, label: &str) -> String {
        let base: String =
            label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
        loop {
            self.counter += 1;
            let name = format!("{}_i{}", base.trim_end_matches('_'), self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Arguments of the intermediate conclusion: the terms of the pair, in order of
/// first occurrence, that mention a variable still needed by the rest of the rule.
fn intermediate_args(a: &Atom, b: &Atom, needed: &BTreeSet<&str>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in a.args.iter().chain(&b.args) {
        let keep = match t {
            Term::Var(v) => needed.contains(v.as_str()),
            Term::App(..) => t.vars().iter().any(|v| needed.contains(v)),
            _ => false,
        };
        if keep && !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

fn literal_fits(lit: &Literal, bound: &BTreeSet<&str>) -> bool {
    lit.vars().iter().all(|v| bound.contains(v))
}

pub fn decompose_rule(
    rule: &Rule,
    is_edb: &dyn Fn(&str) -> bool,
    opts: &DecomposeOptions,
    namer: &mut Namer,
) -> Vec<Rule> {
    let mut positives: Vec<Atom> = rule.positives().cloned().collect();
    if positives.len() <= 2 {
        return vec![rule.clone()];
    }
    let label = rule.display_label();
    let mut pending: Vec<Literal> = Vec::new();
    let mut guards: Vec<Literal> = Vec::new();
    for l in &rule.hypotheses {
        match l {
            Literal::Positive(_) => {}
            Literal::UniversalGuard { .. } => guards.push(l.clone()),
            _ => pending.push(l.clone()),
        }
    }
    let mut domain = opts.domain.cloned();
    let mut out = Vec::new();

    while positives.len() > 2 {
        let context = Rule::new(rule.conclusions.clone(), pending.iter().chain(&guards).cloned().collect());
        let local = DecomposeOptions { domain: domain.as_ref(), edb_sizes: opts.edb_sizes };
        let (i, j) = select_pair(&positives, &context, is_edb, &local).position;
        let (a, b) = (positives[i].clone(), positives[j].clone());

        let bound: BTreeSet<&str> = a.vars().into_iter().chain(b.vars()).collect();
        let (attach, rest): (Vec<Literal>, Vec<Literal>) = pending.into_iter().partition(|l| literal_fits(l, &bound));
        pending = rest;

        let remaining = Rule::new(rule.conclusions.clone(), pending.iter().chain(&guards).cloned().collect());
        let mut needed = outside_vars(&remaining);
        for (k, h) in positives.iter().enumerate() {
            if k != i && k != j {
                needed.extend(h.vars());
            }
        }
        let args = intermediate_args(&a, &b, &needed);
        let name = namer.fresh(&label);
        let inter = Atom::new(&name, args);

        if let Some(d) = domain.as_mut() {
            let classes: Vec<String> =
                inter.args.iter().map(|t| source_class(d, t, &[a.clone(), b.clone()]).unwrap_or_default()).collect();
            d.columns.insert(name.clone(), classes);
        }

        let mut hyps = vec![Literal::Positive(a), Literal::Positive(b)];
        hyps.extend(attach);
        out.push(Rule {
            conclusions: vec![inter.clone()],
            hypotheses: hyps,
            label: Some(format!("{label}/{}", out.len() + 1)),
            origin: Some(label.clone()),
        });
        positives.remove(j);
        positives[i] = inter;
    }

    let mut hyps: Vec<Literal> = positives.into_iter().map(Literal::Positive).collect();
    hyps.extend(pending);
    hyps.extend(guards);
    out.push(Rule {
        conclusions: rule.conclusions.clone(),
        hypotheses: hyps,
        label: Some(format!("{label}/{}", out.len() + 1)),
        origin: Some(label),
    });
    out
}

fn source_class(d: &DomainInfo, t: &Term, atoms: &[Atom]) -> Option<String> {
    match t {
        Term::Var(v) => d.var_class(v, atoms).map(str::to_string),
        _ => atoms.iter().find_map(|a| {
            a.args.iter().position(|x| x == t).and_then(|i| d.column_class(&a.pred, i)).map(str::to_string)
        }),
    }
}

/// Extends `base` with column classes for concluded predicates it does not
/// cover (the intermediates), taken from the hypotheses of their rules.
pub fn infer_columns(program: &Program, base: &DomainInfo) -> DomainInfo {
    let mut d = base.clone();
    for rule in &program.rules {
        let hyps: Vec<Atom> = rule.positives().cloned().collect();
        for c in &rule.conclusions {
            if d.columns.contains_key(&c.pred) {
                continue;
            }
            let classes = c.args.iter().map(|t| source_class(&d, t, &hyps).unwrap_or_default()).collect();
            d.columns.insert(c.pred.clone(), classes);
        }
    }
    d
}

pub fn decompose_program(program: &Program, opts: &DecomposeOptions) -> Program {
    let idb = program.idb_predicates();
    let is_edb = |p: &str| !idb.contains(p);
    let mut namer = Namer::new(program);
    let mut rules = Vec::new();
    for (n, r) in program.rules.iter().enumerate() {
        let mut r = r.clone();
        if r.label.is_none() {
            r.label = Some(format!("rule{}", n + 1));
        }
        rules.extend(decompose_rule(&r, &is_edb, opts, &mut namer));
    }
    Program { rules, facts: program.facts.clone(), declarations: program.declarations.clone() }
}
