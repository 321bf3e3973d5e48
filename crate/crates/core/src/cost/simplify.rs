//! Reducing cost expressions to parameter polynomials under assumptions.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::CostExpr;
use super::poly::{Poly, SUM_VH};
use super::rule::{derive_idb_size_bounds, RuleCost};
use crate::ir::Program;

/// What is known about relation sizes.
#[derive(Debug, Clone, Default)]
pub struct Assumptions {
    /// Column classes per predicate, intermediates included.
    pub columns: BTreeMap<String, Vec<String>>,
    /// Bound on the number of values of each column class.
    pub class_bounds: BTreeMap<String, CostExpr>,
    /// Bound on any EDB relation without a specific entry.
    pub default_edb_size: Option<CostExpr>,
    pub edb_sizes: BTreeMap<String, CostExpr>,
    /// `(stat atom, bound)` pairs from conditions and presets.
    pub constraints: Vec<(CostExpr, CostExpr)>,
    /// Stat atoms kept as symbols.
    pub free: BTreeSet<CostExpr>,
    /// IDB size bounds as produced by `derive_idb_size_bounds`.
    pub idb: BTreeMap<String, CostExpr>,
}

impl Assumptions {
    /// Fills `idb` from the rules of a binary program.
    pub fn with_program(mut self, program: &Program, costs: &[RuleCost]) -> Assumptions {
        let dom: BTreeMap<String, Vec<CostExpr>> = program
            .idb_predicates()
            .into_iter()
            .filter_map(|p| {
                let cols = self.columns.get(&p)?;
                let b = cols.iter().map(|c| self.class_bound(c)).collect();
                Some((p, b))
            })
            .collect();
        self.idb = derive_idb_size_bounds(program, costs, &dom);
        self
    }

    fn class_bound(&self, class: &str) -> CostExpr {
        self.class_bounds.get(class).cloned().unwrap_or(CostExpr::Infinity)
    }

    pub fn add_constraints(&mut self, pairs: &[(&str, &str)]) {
        for (a, b) in pairs {
            let a = super::parse_cost(a).expect("constraint atom");
            let b = super::parse_cost(b).expect("constraint bound");
            self.constraints.push((a, b));
        }
    }
}

struct Simplifier<'a> {
    a: &'a Assumptions,
    idb: BTreeMap<String, Poly>,
    atoms_free: bool,
}

fn all_cols(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

impl Simplifier<'_> {
    fn arity(&self, pred: &str) -> Option<usize> {
        self.a.columns.get(pred).map(Vec::len)
    }

    fn dom(&self, pred: &str, cols: &[usize]) -> Poly {
        let Some(classes) = self.a.columns.get(pred) else {
            return Poly::Unbounded;
        };
        let mut p = Poly::one();
        for c in cols {
            let b = classes.get(c - 1).map_or(CostExpr::Infinity, |cl| self.a.class_bound(cl));
            p = p.mul(&self.eval(&b));
        }
        p
    }

    /// Candidate bounds for the number of distinct `out` values per `given` values.
    fn atom(&self, pred: &str, out: &[usize], given: &[usize], text: &CostExpr) -> Poly {
        if self.atoms_free || self.a.free.contains(text) {
            return Poly::symbol(&text.to_string());
        }
        let free_cols: Vec<usize> = out.iter().copied().filter(|c| !given.contains(c)).collect();
        let mut best = self.dom(pred, &free_cols);

        let symbolic = self.a.free.iter().map(|e| (e, None));
        let bounded = self.a.constraints.iter().map(|(e, b)| (e, Some(b)));
        for (atom, bound) in bounded.chain(symbolic) {
            let (q, o2, g2) = match atom {
                CostExpr::Proj { pred: q, out: o, given: g } => (q, o.clone(), g.clone()),
                CostExpr::Size(q) => match self.arity(q) {
                    Some(n) => (q, all_cols(n), Vec::new()),
                    None => continue,
                },
                _ => continue,
            };
            if q != pred {
                continue;
            }
            let value = match bound {
                Some(b) => self.eval(b),
                None => Poly::symbol(&atom.to_string()),
            };
            if free_cols.iter().all(|c| o2.contains(c)) && g2.iter().all(|c| given.contains(c)) {
                best = best.min(&value);
            } else if given.is_empty() {
                // #q.I ≤ dom(J') × #q.I'/J' when I ⊆ I' ∪ J'.
                if out.iter().all(|c| o2.contains(c) || g2.contains(c)) {
                    best = best.min(&self.dom(pred, &g2).mul(&value));
                }
            }
        }

        let size = if let Some(b) = self.idb.get(pred) {
            b.clone()
        } else if let Some(e) = self.a.edb_sizes.get(pred) {
            self.eval(e)
        } else if let Some(e) = &self.a.default_edb_size {
            self.eval(e)
        } else {
            Poly::Unbounded
        };
        best.min(&size)
    }

    fn eval(&self, e: &CostExpr) -> Poly {
        match e {
            CostExpr::Const(0) => Poly::zero(),
            CostExpr::Const(_) => Poly::one(),
            CostExpr::Infinity => Poly::Unbounded,
            CostExpr::Param(p) => Poly::symbol(p),
            CostExpr::Size(q) => match self.arity(q) {
                Some(n) => self.atom(q, &all_cols(n), &[], e),
                None => self.atom(q, &[], &[], e),
            },
            CostExpr::Proj { pred, out, given } => self.atom(pred, out, given, e),
            CostExpr::Product(v) => v.iter().fold(Poly::one(), |acc, c| acc.mul(&self.eval(c))),
            CostExpr::Sum(v) => {
                if is_sum_vh(v) {
                    return Poly::symbol(SUM_VH);
                }
                v.iter().fold(Poly::zero(), |acc, c| acc.add(&self.eval(c)))
            }
            CostExpr::Min(v) => {
                let mut it = v.iter().map(|c| self.eval(c));
                let first = it.next().unwrap_or(Poly::Unbounded);
                it.fold(first, |acc, p| acc.min(&p))
            }
        }
    }
}

fn is_sum_vh(v: &[CostExpr]) -> bool {
    let mut names: Vec<&str> = v
        .iter()
        .filter_map(|c| match c {
            CostExpr::Param(p) => Some(p.as_str()),
            _ => None,
        })
        .collect();
    names.sort_unstable();
    v.len() == 2 && names == ["h", "v"]
}

/// Shrinks IDB bounds until no rule gives a smaller one.
fn fix_idb(a: &Assumptions) -> BTreeMap<String, Poly> {
    let mut s = Simplifier { a, idb: BTreeMap::new(), atoms_free: false };
    let init: BTreeMap<String, Poly> = a
        .idb
        .keys()
        .map(|p| {
            let n = s.arity(p).unwrap_or(0);
            (p.clone(), s.dom(p, &all_cols(n)))
        })
        .collect();
    s.idb = init;
    for _ in 0..32 {
        let mut changed = false;
        for (p, e) in &a.idb {
            let cand = s.eval(e);
            let cur = &s.idb[p];
            let next = cur.min(&cand);
            if next != *cur {
                s.idb.insert(p.clone(), next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    s.idb
}

/// Asymptotic bound of `expr` as a parameter polynomial.
pub fn simplify_poly(expr: &CostExpr, a: &Assumptions) -> Poly {
    let idb = fix_idb(a);
    Simplifier { a, idb, atoms_free: false }.eval(expr)
}

pub fn simplify_under(expr: &CostExpr, a: &Assumptions) -> CostExpr {
    simplify_poly(expr, a).to_expr()
}

/// Bounds of every IDB relation after the fixpoint.
pub fn idb_bounds(a: &Assumptions) -> BTreeMap<String, Poly> {
    fix_idb(a)
}

/// Reads a plain polynomial such as `p × h^2` or `(v + h) × #v_pt.2/1`,
/// keeping stat atoms as symbols.
pub fn poly_of(expr: &CostExpr) -> Poly {
    let a = Assumptions::default();
    Simplifier { a: &a, idb: BTreeMap::new(), atoms_free: true }.eval(expr)
}
