//! Rules compiled for evaluation.

use std::collections::{HashMap, HashSet};

use super::database::Database;
use super::guard::GuardFamily;
use super::pattern::{match_all, Binding, Pat, Vars};
use super::relation::Relation;
use super::store::Id;
use crate::ir::{Literal, Program, Rule};

#[derive(Debug)]
pub struct Hyp {
    pub pred: String,
    pub pats: Vec<Pat>,
    /// Distinct variables; a view row holds their values in this order.
    pub vars: Vec<usize>,
    /// Bindings seen so far. Rows before `old_len` were seen before this iteration.
    pub view: Relation,
    pub old_len: usize,
    consumed: usize,
}

/// `exists_other(pred(prefix), excluded)`: some `pred(prefix, x)` with `x != excluded`.
#[derive(Debug)]
pub struct ExistsOther {
    pub pred: String,
    prefix: Vec<Pat>,
    excluded: Pat,
    /// Rule variables of the prefix; group keys hold their values.
    pub key_vars: Vec<usize>,
    /// Distinct last-column values per group: their number and the first one.
    groups: HashMap<Vec<Id>, (u64, Id)>,
    old: HashMap<Vec<Id>, Option<(u64, Id)>>,
    seen: HashSet<(Vec<Id>, Id)>,
    consumed: usize,
}

#[derive(Debug)]
pub enum Check {
    Negated { pred: String, pats: Vec<Pat>, cols: Vec<usize> },
    NotEqual(Pat, Pat),
    Guard { family: usize, key_vars: Vec<usize> },
    Exists(ExistsOther),
}

#[derive(Debug)]
pub struct RulePlan {
    pub label: String,
    pub vars: Vars,
    pub hyps: Vec<Hyp>,
    pub checks: Vec<Check>,
    pub heads: Vec<(String, Vec<Pat>)>,
    pub fired: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("rule {0}: the domain of a universal guard must be an EDB predicate")]
    GuardDomainNotEdb(String),
    #[error("rule {0}: negated hypothesis on IDB predicate `{1}`")]
    NegatedIdb(String, String),
    #[error("rule {0}: variable `{1}` is not bound by a positive hypothesis")]
    Unbound(String, String),
}

fn pats(args: &[crate::ir::Term], vars: &mut Vars, db: &mut Database) -> Vec<Pat> {
    args.iter().map(|t| vars.pat(t, &mut db.store)).collect()
}

impl RulePlan {
    pub fn compile(
        rule: &Rule,
        label: String,
        program: &Program,
        db: &mut Database,
        families: &mut Vec<GuardFamily>,
    ) -> Result<RulePlan, PlanError> {
        let mut vars = Vars::default();
        let mut hyps = Vec::new();
        for a in rule.positives() {
            let p = pats(&a.args, &mut vars, db);
            let mut hv = Vec::new();
            p.iter().for_each(|x| x.collect_vars(&mut hv));
            hyps.push(Hyp {
                pred: a.pred.clone(),
                pats: p,
                view: Relation::new(&a.pred, hv.len()),
                vars: hv,
                old_len: 0,
                consumed: 0,
            });
        }
        let bound = vars.len();
        let mut checks = Vec::new();
        for lit in &rule.hypotheses {
            let check = match lit {
                Literal::Positive(_) => continue,
                Literal::NegatedEdb(a) => {
                    if program.is_idb(&a.pred) {
                        return Err(PlanError::NegatedIdb(label, a.pred.clone()));
                    }
                    let p = pats(&a.args, &mut vars, db);
                    let cols: Vec<usize> = (0..p.len()).filter(|i| !p[*i].has_any()).collect();
                    if let Some(r) = db.relations.get_mut(&a.pred) {
                        r.ensure_index(&cols);
                    }
                    Check::Negated { pred: a.pred.clone(), pats: p, cols }
                }
                Literal::Inequality(l, r) => Check::NotEqual(vars.pat(l, &mut db.store), vars.pat(r, &mut db.store)),
                Literal::UniversalGuard { bound_var, domain, body } => {
                    if program.is_idb(&domain.pred) {
                        return Err(PlanError::GuardDomainNotEdb(label));
                    }
                    let text = lit.to_string();
                    let family = match families.iter().position(|f| f.text == text) {
                        Some(i) => i,
                        None => {
                            families.push(GuardFamily::new(bound_var, domain, body, db));
                            families.len() - 1
                        }
                    };
                    let key_vars = families[family].free_vars.iter().map(|v| vars.id(v)).collect();
                    Check::Guard { family, key_vars }
                }
                Literal::ExistsOther { pred, prefix, excluded } => {
                    let prefix = pats(prefix, &mut vars, db);
                    let mut key_vars = Vec::new();
                    prefix.iter().for_each(|x| x.collect_vars(&mut key_vars));
                    Check::Exists(ExistsOther {
                        pred: pred.clone(),
                        prefix,
                        excluded: vars.pat(excluded, &mut db.store),
                        key_vars,
                        groups: HashMap::new(),
                        old: HashMap::new(),
                        seen: HashSet::new(),
                        consumed: 0,
                    })
                }
            };
            if vars.len() > bound {
                return Err(PlanError::Unbound(label, vars.names[bound].clone()));
            }
            checks.push(check);
        }
        let heads = rule.conclusions.iter().map(|c| (c.pred.clone(), pats(&c.args, &mut vars, db))).collect();
        if vars.len() > bound {
            return Err(PlanError::Unbound(label, vars.names[bound].clone()));
        }
        Ok(RulePlan { label, vars, hyps, checks, heads, fired: 0 })
    }

    pub fn blank(&self) -> Binding {
        vec![None; self.vars.len()]
    }

    /// Moves newly stored tuples of each hypothesis predicate into its view.
    /// Returns true if any view grew.
    pub fn refresh_views(&mut self, db: &Database) -> bool {
        let n = self.vars.len();
        let mut grew = false;
        for h in &mut self.hyps {
            h.old_len = h.view.len();
            let Some(rel) = db.relations.get(&h.pred) else { continue };
            for pos in h.consumed..rel.len() {
                let mut b = vec![None; n];
                if match_all(&h.pats, &db.store, rel.get(pos), &mut b) {
                    let row: Box<[Id]> = h.vars.iter().map(|v| b[*v].unwrap()).collect();
                    grew |= h.view.insert(row);
                }
            }
            h.consumed = rel.len();
        }
        grew
    }

    /// Applies new tuples to the exists-other groups.
    pub fn refresh_exists(&mut self, db: &Database) {
        let n = self.vars.len();
        for c in &mut self.checks {
            if let Check::Exists(e) = c {
                e.update(db, n);
            }
        }
    }
}

impl ExistsOther {
    fn update(&mut self, db: &Database, nvars: usize) {
        self.old.clear();
        let Some(rel) = db.relations.get(&self.pred) else { return };
        for pos in self.consumed..rel.len() {
            let t = rel.get(pos);
            let (last, prefix) = t.split_last().unwrap();
            let mut b = vec![None; nvars];
            if !match_all(&self.prefix, &db.store, prefix, &mut b) {
                continue;
            }
            let key: Vec<Id> = self.key_vars.iter().map(|v| b[*v].unwrap()).collect();
            if !self.seen.insert((key.clone(), *last)) {
                continue;
            }
            let before = self.groups.get(&key).copied();
            self.old.entry(key.clone()).or_insert(before);
            self.groups.entry(key).and_modify(|g| g.0 += 1).or_insert((1, *last));
        }
        self.consumed = rel.len();
    }

    pub fn key(&self, b: &Binding) -> Vec<Id> {
        self.key_vars.iter().map(|v| b[*v].unwrap()).collect()
    }

    pub fn holds(&self, db: &Database, b: &Binding, before: bool) -> bool {
        let key = self.key(b);
        let group = if before {
            match self.old.get(&key) {
                Some(g) => *g,
                None => self.groups.get(&key).copied(),
            }
        } else {
            self.groups.get(&key).copied()
        };
        let y = self.excluded.resolve(&db.store, b);
        match group {
            None => false,
            Some((n, _)) if n >= 2 => true,
            Some((_, first)) => Some(first) != y,
        }
    }

    pub fn touched(&self) -> impl Iterator<Item = &Vec<Id>> {
        self.old.keys()
    }
}
