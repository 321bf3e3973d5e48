//! Semi-naive fixpoint.
//!
//! A combination of hypothesis bindings fires in the first iteration where all
//! its parts are present and all its checks hold. Combinations with a part new
//! in this iteration are found by the usual delta joins; combinations whose
//! parts are all old fire only if a guard or exists-other check has just become
//! true, and are found by probing from the keys those checks changed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use super::database::{Database, FactsError};
use super::guard::GuardFamily;
use super::pattern::{match_all, Binding};
use super::plan::{Check, Hyp, PlanError, RulePlan};
use super::store::{Id, TermStore};
use crate::ir::{Program, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermPolicy {
    /// A derived term may not be larger than the largest term with the same
    /// functor in the input, or than a flat application if there is none.
    #[default]
    RejectOnGrowth,
    HardCap(u32),
    Unlimited,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub term_policy: TermPolicy,
    /// Stop with `Timeout` after this many rule firings.
    pub max_firings: Option<u64>,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct EvalTrace {
    pub firings: BTreeMap<String, u64>,
    pub sizes: BTreeMap<String, usize>,
    pub iterations: usize,
    /// Facts added at the end of each iteration.
    pub new_facts: Vec<usize>,
    /// Number of times a guard instance became true, per guard.
    pub guard_flips: BTreeMap<String, u64>,
    pub max_term_size: BTreeMap<String, u32>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct GuardReport {
    pub text: String,
    pub j_vars: Vec<String>,
    pub free_vars: Vec<String>,
    pub prev_count: BTreeMap<Vec<Term>, u64>,
    pub prev_pt_count: BTreeMap<Vec<Term>, u64>,
}

#[derive(Debug)]
pub struct EvalResult {
    pub db: Database,
    pub trace: EvalTrace,
    pub guards: Vec<GuardReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error("term of `{functor}` grew to size {size}")]
    TermGrowth { functor: String, size: u32 },
    #[error("stopped after {0} firings")]
    Timeout(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Old,
    Delta,
    All,
}

struct Step {
    hyp: usize,
    key_cols: Vec<usize>,
    key_vars: Vec<usize>,
    part: Part,
}

fn steps(hyps: &mut [Hyp], order: &[usize], parts: &[Part], bound: &mut [bool]) -> Vec<Step> {
    let mut out = Vec::new();
    for &h in order {
        let hyp = &mut hyps[h];
        let key_cols: Vec<usize> = (0..hyp.vars.len()).filter(|c| bound[hyp.vars[*c]]).collect();
        let key_vars = key_cols.iter().map(|c| hyp.vars[*c]).collect();
        if !key_cols.is_empty() {
            hyp.view.ensure_index(&key_cols);
        }
        hyp.vars.iter().for_each(|v| bound[*v] = true);
        out.push(Step { hyp: h, key_cols, key_vars, part: parts[h] });
    }
    out
}

fn slice(list: &[u32], old_len: usize, part: Part) -> &[u32] {
    let split = list.partition_point(|p| (*p as usize) < old_len);
    match part {
        Part::Old => &list[..split],
        Part::Delta => &list[split..],
        Part::All => list,
    }
}

fn walk(hyps: &[Hyp], steps: &[Step], b: &mut Binding, out: &mut Vec<Binding>) {
    let Some((s, rest)) = steps.split_first() else {
        out.push(b.clone());
        return;
    };
    let h = &hyps[s.hyp];
    let mut visit = |pos: usize, b: &mut Binding| {
        let row = h.view.get(pos);
        let mut set = Vec::new();
        for (c, v) in h.vars.iter().enumerate() {
            if b[*v].is_none() {
                b[*v] = Some(row[c]);
                set.push(*v);
            }
        }
        walk(hyps, rest, b, out);
        for v in set {
            b[v] = None;
        }
    };
    if s.key_cols.is_empty() {
        let range = match s.part {
            Part::Old => 0..h.old_len,
            Part::Delta => h.old_len..h.view.len(),
            Part::All => 0..h.view.len(),
        };
        for pos in range {
            visit(pos, b);
        }
    } else {
        let key: Vec<Id> = s.key_vars.iter().map(|v| b[*v].unwrap()).collect();
        for &pos in slice(h.view.lookup(&s.key_cols, &key), h.old_len, s.part) {
            visit(pos as usize, b);
        }
    }
}

fn static_checks(plan: &RulePlan, db: &Database, b: &Binding) -> bool {
    plan.checks.iter().all(|c| match c {
        Check::Negated { pred, pats, cols } => {
            let Some(rel) = db.relations.get(pred) else { return true };
            let Some(key) = cols.iter().map(|i| pats[*i].resolve(&db.store, b)).collect::<Option<Vec<_>>>() else {
                return true;
            };
            let hit = |t: &[Id]| match_all(pats, &db.store, t, &mut b.clone());
            if cols.is_empty() {
                !rel.iter().any(hit)
            } else {
                !rel.lookup(cols, &key).iter().any(|p| hit(rel.get(*p as usize)))
            }
        }
        Check::NotEqual(l, r) => l.resolve(&db.store, b) != r.resolve(&db.store, b),
        Check::Guard { .. } | Check::Exists(_) => true,
    })
}

fn monotone_checks(plan: &RulePlan, db: &Database, families: &[GuardFamily], b: &Binding, before: bool) -> bool {
    plan.checks.iter().all(|c| match c {
        Check::Guard { family, key_vars } => {
            let key: Vec<Id> = key_vars.iter().map(|v| b[*v].unwrap()).collect();
            families[*family].holds(&key, before)
        }
        Check::Exists(e) => e.holds(db, b, before),
        _ => true,
    })
}

struct Budget {
    policy: TermPolicy,
    limits: HashMap<String, u32>,
    max_seen: BTreeMap<String, u32>,
}

impl Budget {
    fn new(policy: TermPolicy, db: &Database) -> Budget {
        let mut limits: HashMap<String, u32> = HashMap::new();
        for rel in db.relations.values() {
            for t in rel.iter() {
                for id in t {
                    record_max(&db.store, *id, &mut limits);
                }
            }
        }
        Budget { policy, limits, max_seen: BTreeMap::new() }
    }

    fn check(&mut self, store: &TermStore, id: Id) -> Result<(), EvalError> {
        let Some((f, args)) = store.as_app(id) else { return Ok(()) };
        let size = store.size(id);
        let limit = match self.policy {
            TermPolicy::Unlimited => u32::MAX,
            TermPolicy::HardCap(n) => n,
            TermPolicy::RejectOnGrowth => {
                let flat = 1 + args.len() as u32;
                self.limits.get(f).copied().unwrap_or(flat).max(flat)
            }
        };
        if size > limit {
            return Err(EvalError::TermGrowth { functor: f.to_string(), size });
        }
        let m = self.max_seen.entry(f.to_string()).or_insert(0);
        *m = (*m).max(size);
        for a in args {
            self.check(store, *a)?;
        }
        Ok(())
    }
}

fn record_max(store: &TermStore, id: Id, out: &mut HashMap<String, u32>) {
    if let Some((f, args)) = store.as_app(id) {
        let m = out.entry(f.to_string()).or_insert(0);
        *m = (*m).max(store.size(id));
        for a in args {
            record_max(store, *a, out);
        }
    }
}

struct Engine {
    db: Database,
    rules: Vec<RulePlan>,
    families: Vec<GuardFamily>,
    budget: Budget,
    max_firings: Option<u64>,
    total_firings: u64,
}

impl Engine {
    fn refresh(&mut self) {
        for f in &mut self.families {
            f.update(&self.db);
        }
        for r in &mut self.rules {
            r.refresh_exists(&self.db);
            r.refresh_views(&self.db);
        }
    }

    /// Combinations to fire for rule `ri` in this iteration.
    fn candidates(&mut self, ri: usize, first: bool) -> Vec<Binding> {
        let plan = &mut self.rules[ri];
        let n = plan.hyps.len();
        let mut fresh = Vec::new();
        if n == 0 && first {
            fresh.push(plan.blank());
        }
        for d in 0..n {
            if plan.hyps[d].old_len == plan.hyps[d].view.len() {
                continue;
            }
            let parts: Vec<Part> = (0..n)
                .map(|i| {
                    if i < d {
                        Part::Old
                    } else if i == d {
                        Part::Delta
                    } else {
                        Part::All
                    }
                })
                .collect();
            let order: Vec<usize> = std::iter::once(d).chain((0..n).filter(|i| *i != d)).collect();
            let mut bound = vec![false; plan.vars.len()];
            let st = steps(&mut plan.hyps, &order, &parts, &mut bound);
            walk(&plan.hyps, &st, &mut plan.blank(), &mut fresh);
        }
        let plan = &self.rules[ri];
        let mut out: Vec<Binding> = fresh
            .into_iter()
            .filter(|b| static_checks(plan, &self.db, b) && monotone_checks(plan, &self.db, &self.families, b, false))
            .collect();
        if !first {
            out.extend(self.flipped(ri));
        }
        out
    }

    /// All-old combinations whose guard or exists-other checks just became true.
    fn flipped(&mut self, ri: usize) -> Vec<Binding> {
        let plan = &self.rules[ri];
        let mut starts: Vec<Binding> = Vec::new();
        for c in &plan.checks {
            let (keys, vars): (Vec<&Vec<Id>>, &[usize]) = match c {
                Check::Guard { family, key_vars } => (self.families[*family].touched().collect(), key_vars),
                Check::Exists(e) => (e.touched().collect(), &e.key_vars),
                _ => continue,
            };
            for k in keys {
                let mut b = plan.blank();
                for (v, x) in vars.iter().zip(k) {
                    b[*v] = Some(*x);
                }
                starts.push(b);
            }
        }
        if starts.is_empty() {
            return Vec::new();
        }
        let plan = &mut self.rules[ri];
        let n = plan.hyps.len();
        let order: Vec<usize> = (0..n).collect();
        let parts = vec![Part::Old; n];
        let mut found = Vec::new();
        for mut b in starts {
            let mut bound: Vec<bool> = b.iter().map(Option::is_some).collect();
            let st = steps(&mut plan.hyps, &order, &parts, &mut bound);
            walk(&plan.hyps, &st, &mut b, &mut found);
        }
        let plan = &self.rules[ri];
        let mut seen = HashSet::new();
        found
            .into_iter()
            .filter(|b| seen.insert(b.clone()))
            .filter(|b| {
                static_checks(plan, &self.db, b)
                    && monotone_checks(plan, &self.db, &self.families, b, false)
                    && !monotone_checks(plan, &self.db, &self.families, b, true)
            })
            .collect()
    }

    fn fire(&mut self, ri: usize, b: &Binding, out: &mut Vec<(usize, usize, Box<[Id]>)>) -> Result<(), EvalError> {
        self.total_firings += 1;
        if let Some(limit) = self.max_firings {
            if self.total_firings > limit {
                return Err(EvalError::Timeout(limit));
            }
        }
        let plan = &mut self.rules[ri];
        plan.fired += 1;
        for (hi, (_, pats)) in plan.heads.iter().enumerate() {
            let t: Box<[Id]> = pats.iter().map(|p| p.build(&mut self.db.store, b)).collect();
            for id in t.iter() {
                self.budget.check(&self.db.store, *id)?;
            }
            out.push((ri, hi, t));
        }
        Ok(())
    }

    fn run(&mut self, trace: &mut EvalTrace) -> Result<(), EvalError> {
        let mut first = true;
        loop {
            let mut out = Vec::new();
            for ri in 0..self.rules.len() {
                for b in self.candidates(ri, first) {
                    self.fire(ri, &b, &mut out)?;
                }
            }
            let mut added = 0;
            for (ri, hi, t) in out {
                let pred = &self.rules[ri].heads[hi].0;
                if self.db.relations.get_mut(pred).expect("relation").insert(t) {
                    added += 1;
                }
            }
            trace.iterations += 1;
            trace.new_facts.push(added);
            first = false;
            if added == 0 {
                return Ok(());
            }
            self.refresh();
        }
    }
}

/// Evaluates `program` to its least fixpoint over `db` and the program's own facts.
pub fn evaluate(program: &Program, mut db: Database, options: &EvalOptions) -> Result<EvalResult, EvalError> {
    let start = Instant::now();
    for (p, n) in program.predicates() {
        db.relation_mut(&p, n)?;
    }
    db.add_atoms(&program.facts)?;
    let mut families = Vec::new();
    let mut rules = Vec::new();
    for (i, r) in program.rules.iter().enumerate() {
        let label = r.label.clone().unwrap_or_else(|| format!("rule{}", i + 1));
        rules.push(RulePlan::compile(r, label, program, &mut db, &mut families)?);
    }
    let budget = Budget::new(options.term_policy, &db);
    let mut engine = Engine { db, rules, families, budget, max_firings: options.max_firings, total_firings: 0 };
    engine.refresh();
    let mut trace = EvalTrace::default();
    engine.run(&mut trace)?;

    for r in &engine.rules {
        *trace.firings.entry(r.label.clone()).or_insert(0) += r.fired;
    }
    trace.sizes = engine.db.relations.iter().map(|(p, r)| (p.clone(), r.len())).collect();
    trace.max_term_size = engine.budget.max_seen.clone();
    let guards = engine
        .families
        .iter()
        .map(|f| {
            trace.guard_flips.insert(f.text.clone(), f.flips);
            GuardReport {
                text: f.text.clone(),
                j_vars: f.j_vars.clone(),
                free_vars: f.free_vars.clone(),
                prev_count: f.prev_count(&engine.db),
                prev_pt_count: f.prev_pt_count(&engine.db),
            }
        })
        .collect();
    trace.wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(EvalResult { db: engine.db, trace, guards })
}
