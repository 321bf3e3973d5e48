//! Matching produced binary rules against reference rules up to renaming of
//! intermediate predicates and a column permutation per intermediate.

use std::collections::{BTreeMap, BTreeSet};

use ptlog::ir::{Atom, Literal, Program, Rule};

#[derive(Debug, Clone, Default)]
pub struct IsoMap {
    /// produced name -> reference name
    pub names: BTreeMap<String, String>,
    /// produced name -> for each reference column, the produced column
    pub perms: BTreeMap<String, Vec<usize>>,
}

impl IsoMap {
    /// Reference column (0-based) for a produced column.
    pub fn column(&self, pred: &str, col: usize) -> usize {
        match self.perms.get(pred) {
            Some(p) => p.iter().position(|&c| c == col).unwrap(),
            None => col,
        }
    }

    pub fn name<'a>(&'a self, pred: &'a str) -> &'a str {
        self.names.get(pred).map(String::as_str).unwrap_or(pred)
    }
}

fn match_atom(mine: &Atom, gold: &Atom, inter: &BTreeSet<String>, map: &mut IsoMap) -> bool {
    if !inter.contains(&mine.pred) {
        return mine == gold;
    }
    if mine.args.len() != gold.args.len() {
        return false;
    }
    let mut perm = Vec::new();
    for g in &gold.args {
        match mine.args.iter().position(|m| m == g) {
            Some(i) => perm.push(i),
            None => return false,
        }
    }
    if let Some(n) = map.names.get(&mine.pred) {
        return n == &gold.pred && map.perms[&mine.pred] == perm;
    }
    if map.names.values().any(|n| n == &gold.pred) {
        return false;
    }
    map.names.insert(mine.pred.clone(), gold.pred.clone());
    map.perms.insert(mine.pred.clone(), perm);
    true
}

fn match_literal(m: &Literal, g: &Literal, inter: &BTreeSet<String>, map: &mut IsoMap) -> bool {
    match (m, g) {
        (Literal::Positive(a), Literal::Positive(b)) => match_atom(a, b, inter, map),
        _ => m == g,
    }
}

fn match_rule(mine: &Rule, gold: &Rule, inter: &BTreeSet<String>, map: &IsoMap) -> Option<IsoMap> {
    if mine.conclusions.len() != gold.conclusions.len() || mine.hypotheses.len() != gold.hypotheses.len() {
        return None;
    }
    let n = mine.hypotheses.len();
    let orders: Vec<Vec<usize>> = if n == 0 { vec![vec![]] } else { permutations(n) };
    for order in orders {
        let mut m = map.clone();
        let ok = mine.conclusions.iter().zip(&gold.conclusions).all(|(a, b)| match_atom(a, b, inter, &mut m))
            && order.iter().zip(&gold.hypotheses).all(|(&i, g)| match_literal(&mine.hypotheses[i], g, inter, &mut m));
        if ok {
            return Some(m);
        }
    }
    None
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Matches every reference rule against the produced rule with the same label.
/// Returns the mapping, or the labels that failed.
pub fn match_programs(mine: &Program, gold: &Program, original: &Program) -> Result<IsoMap, Vec<String>> {
    let orig_preds: BTreeSet<String> = original.predicates().into_keys().collect();
    let inter: BTreeSet<String> = mine.predicates().into_keys().filter(|p| !orig_preds.contains(p)).collect();
    let mut map = IsoMap::default();
    let mut failed = Vec::new();
    for g in &gold.rules {
        let label = g.label.as_deref().unwrap_or("?");
        let Some(m) = mine.rules.iter().find(|r| r.label.as_deref() == Some(label)) else {
            failed.push(format!("{label}: missing"));
            continue;
        };
        match match_rule(m, g, &inter, &map) {
            Some(next) => map = next,
            None => failed.push(format!("{label}: produced `{m}` expected `{g}`")),
        }
    }
    if failed.is_empty() {
        Ok(map)
    } else {
        Err(failed)
    }
}

/// Rewrites produced predicate names and column numbers into reference terms.
pub fn rename_cost(e: &ptlog::cost::CostExpr, map: &IsoMap) -> ptlog::cost::CostExpr {
    use ptlog::cost::CostExpr;
    e.map_leaves(&mut |leaf| match leaf {
        CostExpr::Size(p) => CostExpr::Size(map.name(p).to_string()),
        CostExpr::Proj { pred, out, given } => {
            let col = |c: &usize| map.column(pred, c - 1) + 1;
            let out: Vec<usize> = out.iter().map(col).collect();
            let given: Vec<usize> = given.iter().map(col).collect();
            CostExpr::proj(map.name(pred), &out, &given)
        }
        other => other.clone(),
    })
}
