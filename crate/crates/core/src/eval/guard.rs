//! Counters for `(forall i: domain(i, j…) => body(i, y…))`.
//!
//! `prev_count[j]` is the number of `i` with `domain(i, j)`; `prev_pt_count[j, y]`
//! the number of those `i` with `body(i, y)` derived so far. The guard holds when
//! the two are equal, and once it holds it keeps holding.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::database::Database;
use super::pattern::{match_all, Binding, Pat, Vars};
use super::store::Id;
use crate::ir::{Atom, Term};

#[derive(Debug)]
pub struct GuardFamily {
    pub text: String,
    vars: Vars,
    bound: usize,
    domain_pred: String,
    domain: Vec<Pat>,
    body_pred: String,
    body: Vec<Pat>,
    /// Variables of the domain other than the bound one.
    pub j_vars: Vec<String>,
    /// All free variables of the guard, sorted.
    pub free_vars: Vec<String>,
    j_idx: Vec<usize>,
    free_idx: Vec<usize>,
    /// Domain bindings by value of the bound variable.
    successors: HashMap<Id, Vec<Binding>>,
    prev_count: HashMap<Vec<Id>, u64>,
    prev_pt_count: HashMap<Vec<Id>, u64>,
    /// Values before the last update, for keys it touched.
    old_pt: HashMap<Vec<Id>, u64>,
    seen_body: HashSet<Vec<Id>>,
    consumed: usize,
    pub flips: u64,
}

fn atom_pats(a: &Atom, vars: &mut Vars, db: &mut Database) -> Vec<Pat> {
    a.args.iter().map(|t| vars.pat(t, &mut db.store)).collect()
}

impl GuardFamily {
    pub fn new(bound_var: &str, domain: &Atom, body: &Atom, db: &mut Database) -> GuardFamily {
        let text = format!("(forall {bound_var}: {domain:#} => {body:#})");
        let mut vars = Vars::default();
        let bound = vars.id(bound_var);
        let dom = atom_pats(domain, &mut vars, db);
        let n_dom = vars.len();
        let body_pats = atom_pats(body, &mut vars, db);
        let j_vars: Vec<String> = vars.names[1..n_dom].to_vec();
        let mut free_vars: Vec<String> = vars.names[1..].to_vec();
        free_vars.sort();
        let j_idx = j_vars.iter().map(|v| vars.get(v).unwrap()).collect();
        let free_idx = free_vars.iter().map(|v| vars.get(v).unwrap()).collect();
        let mut g = GuardFamily {
            text,
            vars,
            bound,
            domain_pred: domain.pred.clone(),
            domain: dom,
            body_pred: body.pred.clone(),
            body: body_pats,
            j_vars,
            free_vars,
            j_idx,
            free_idx,
            successors: HashMap::new(),
            prev_count: HashMap::new(),
            prev_pt_count: HashMap::new(),
            old_pt: HashMap::new(),
            seen_body: HashSet::new(),
            consumed: 0,
            flips: 0,
        };
        g.init(db);
        g
    }

    fn blank(&self) -> Binding {
        vec![None; self.vars.len()]
    }

    /// One pass over the domain relation.
    fn init(&mut self, db: &Database) {
        let Some(rel) = db.relations.get(&self.domain_pred) else { return };
        let mut seen = HashSet::new();
        for t in rel.iter() {
            let mut b = self.blank();
            if !match_all(&self.domain, &db.store, t, &mut b) {
                continue;
            }
            let i = b[self.bound].unwrap();
            let j: Vec<Id> = self.j_idx.iter().map(|v| b[*v].unwrap()).collect();
            if seen.insert((i, j.clone())) {
                *self.prev_count.entry(j).or_insert(0) += 1;
                self.successors.entry(i).or_default().push(b);
            }
        }
    }

    /// Applies body facts added since the last call. Returns true if any counter moved.
    pub fn update(&mut self, db: &Database) -> bool {
        self.old_pt.clear();
        let Some(rel) = db.relations.get(&self.body_pred) else { return false };
        let start = self.consumed;
        self.consumed = rel.len();
        for pos in start..rel.len() {
            let mut b = self.blank();
            if !match_all(&self.body, &db.store, rel.get(pos), &mut b) {
                continue;
            }
            let i = b[self.bound].unwrap();
            let body_key: Vec<Id> = b.iter().map(|x| x.unwrap_or(Id(u32::MAX))).collect();
            if !self.seen_body.insert(body_key) {
                continue;
            }
            for d in self.successors.get(&i).into_iter().flatten() {
                let mut m = b.clone();
                let mut consistent = true;
                for (k, x) in d.iter().enumerate() {
                    match (x, m[k]) {
                        (Some(x), Some(y)) if *x != y => consistent = false,
                        (Some(x), None) => m[k] = Some(*x),
                        _ => {}
                    }
                }
                if !consistent {
                    continue;
                }
                let key: Vec<Id> = self.free_idx.iter().map(|v| m[*v].unwrap()).collect();
                let j: Vec<Id> = self.j_idx.iter().map(|v| m[*v].unwrap()).collect();
                let cur = self.prev_pt_count.entry(key.clone()).or_insert(0);
                self.old_pt.entry(key).or_insert(*cur);
                *cur += 1;
                if Some(&*cur) == self.prev_count.get(&j) {
                    self.flips += 1;
                }
            }
        }
        !self.old_pt.is_empty()
    }

    fn j_of(&self, key: &[Id]) -> Vec<Id> {
        self.j_idx.iter().map(|v| key[self.free_idx.iter().position(|f| f == v).unwrap()]).collect()
    }

    /// Truth for a key of free-variable values, now or before the last update.
    pub fn holds(&self, key: &[Id], before: bool) -> bool {
        let pt = if before {
            self.old_pt.get(key).or_else(|| self.prev_pt_count.get(key))
        } else {
            self.prev_pt_count.get(key)
        };
        let total = self.prev_count.get(&self.j_of(key)).copied().unwrap_or(0);
        pt.copied().unwrap_or(0) == total
    }

    /// Keys whose counters moved in the last update.
    pub fn touched(&self) -> impl Iterator<Item = &Vec<Id>> {
        self.old_pt.keys()
    }

    pub fn prev_count(&self, db: &Database) -> BTreeMap<Vec<Term>, u64> {
        self.prev_count.iter().map(|(k, v)| (k.iter().map(|x| db.store.to_term(*x)).collect(), *v)).collect()
    }

    pub fn prev_pt_count(&self, db: &Database) -> BTreeMap<Vec<Term>, u64> {
        self.prev_pt_count.iter().map(|(k, v)| (k.iter().map(|x| db.store.to_term(*x)).collect(), *v)).collect()
    }
}
