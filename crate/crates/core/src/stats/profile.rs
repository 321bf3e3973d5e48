//! Exact relation statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::cost::CostExpr;
use crate::eval::{Database, Id};
use crate::num::ExtNat;

/// `(predicate, out columns, given columns)`, columns 1-based.
pub type Request = (String, Vec<usize>, Vec<usize>);

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StatsProfile {
    pub sizes: BTreeMap<String, u128>,
    /// `#p.i` keyed by `p.i`.
    pub arg_counts: BTreeMap<String, u128>,
    /// `#p.I/J` keyed by its written form without `#`.
    pub proj_counts: BTreeMap<String, u128>,
    pub param_bounds: BTreeMap<String, ExtNat>,
    pub conditions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{0}` has no column {1}")]
    UnknownColumn(String, usize),
}

/// Largest number of distinct `out` projections among tuples sharing a `given` projection.
pub fn proj_count<'a>(tuples: impl Iterator<Item = &'a [Id]>, out: &[usize], given: &[usize]) -> u128 {
    let mut groups: HashMap<Vec<Id>, HashSet<Vec<Id>>> = HashMap::new();
    for t in tuples {
        let g = given.iter().map(|c| t[c - 1]).collect();
        let o = out.iter().map(|c| t[c - 1]).collect();
        groups.entry(g).or_default().insert(o);
    }
    groups.values().map(|s| s.len() as u128).max().unwrap_or(0)
}

fn key(pred: &str, out: &[usize], given: &[usize]) -> String {
    CostExpr::proj(pred, out, given).to_string().trim_start_matches('#').to_string()
}

pub fn profile(db: &Database, requests: &[Request]) -> Result<StatsProfile, StatsError> {
    let mut p = StatsProfile::default();
    for (pred, out, given) in requests {
        let rel = db.relations.get(pred).ok_or_else(|| StatsError::UnknownPredicate(pred.clone()))?;
        if let Some(c) = out.iter().chain(given).find(|c| **c == 0 || **c > rel.arity) {
            return Err(StatsError::UnknownColumn(pred.clone(), *c));
        }
        p.sizes.insert(pred.clone(), rel.len() as u128);
        let n = proj_count(rel.iter(), out, given);
        if given.is_empty() && out.len() == 1 {
            p.arg_counts.insert(format!("{pred}.{}", out[0]), n);
        }
        p.proj_counts.insert(key(pred, out, given), n);
    }
    Ok(p)
}

/// Profiles every stat atom of `exprs`.
pub fn profile_for(db: &Database, exprs: &[&CostExpr]) -> Result<StatsProfile, StatsError> {
    let mut reqs: Vec<Request> = Vec::new();
    let mut sized = Vec::new();
    for e in exprs {
        for a in e.stat_atoms() {
            match a {
                CostExpr::Proj { pred, out, given } => reqs.push((pred, out, given)),
                CostExpr::Size(pred) => sized.push(pred),
                _ => {}
            }
        }
    }
    let mut p = profile(db, &reqs)?;
    for pred in sized {
        let rel = db.relations.get(&pred).ok_or_else(|| StatsError::UnknownPredicate(pred.clone()))?;
        p.sizes.insert(pred, rel.len() as u128);
    }
    Ok(p)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ProjJson {
    pred: String,
    out: Vec<usize>,
    given: Vec<usize>,
    count: u128,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ProfileJson {
    #[serde(default)]
    sizes: BTreeMap<String, u128>,
    #[serde(default)]
    proj: Vec<ProjJson>,
    #[serde(default)]
    params: BTreeMap<String, ExtNat>,
    #[serde(default)]
    conditions: BTreeSet<String>,
}

fn parse_key(key: &str) -> Option<(String, Vec<usize>, Vec<usize>)> {
    let (pred, cols) = key.rsplit_once('.').filter(|(_, c)| c.starts_with(|c: char| c.is_ascii_digit()))?;
    let (out, given) = cols.split_once('/').unwrap_or((cols, ""));
    let nums =
        |s: &str| -> Option<Vec<usize>> { s.split(',').filter(|x| !x.is_empty()).map(|x| x.parse().ok()).collect() };
    Some((pred.to_string(), nums(out)?, nums(given)?))
}

impl StatsProfile {
    /// Values keyed the way `instantiate` looks them up.
    pub fn stat_map(&self) -> BTreeMap<String, ExtNat> {
        let mut m: BTreeMap<String, ExtNat> =
            self.sizes.iter().map(|(p, n)| (format!("#{p}"), ExtNat::Finite(*n))).collect();
        for (k, n) in self.arg_counts.iter().chain(&self.proj_counts) {
            m.insert(format!("#{k}"), ExtNat::Finite(*n));
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut proj: Vec<ProjJson> = self
            .proj_counts
            .iter()
            .filter_map(|(k, n)| parse_key(k).map(|(pred, out, given)| ProjJson { pred, out, given, count: *n }))
            .collect();
        for (k, n) in &self.arg_counts {
            let Some((pred, out, given)) = parse_key(k) else { continue };
            if !proj.iter().any(|p| p.pred == pred && p.out == out && p.given == given) {
                proj.push(ProjJson { pred, out, given, count: *n });
            }
        }
        let doc = ProfileJson {
            sizes: self.sizes.clone(),
            proj,
            params: self.param_bounds.clone(),
            conditions: self.conditions.clone(),
        };
        serde_json::to_value(doc).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<StatsProfile, serde_json::Error> {
        let doc: ProfileJson = serde_json::from_str(text)?;
        let mut p = StatsProfile {
            sizes: doc.sizes,
            param_bounds: doc.params,
            conditions: doc.conditions,
            ..Default::default()
        };
        for j in doc.proj {
            if j.given.is_empty() && j.out.len() == 1 {
                p.arg_counts.insert(format!("{}.{}", j.pred, j.out[0]), j.count);
            }
            p.proj_counts.insert(key(&j.pred, &j.out, &j.given), j.count);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    fn db(src: &str) -> Database {
        let mut d = Database::new();
        d.add_atoms(&parse_program(src).unwrap().facts).unwrap();
        d
    }

    #[test]
    fn foo_fixpoint_counts() {
        let d = db("v_pt(o1,h1). v_pt(o2,h2). v_pt(o2,h1).");
        let p = profile(&d, &[("v_pt".into(), vec![2], vec![1]), ("v_pt".into(), vec![1], vec![])]).unwrap();
        assert_eq!(p.sizes["v_pt"], 3);
        assert_eq!(p.proj_counts["v_pt.2/1"], 2);
        assert_eq!(p.arg_counts["v_pt.1"], 2);
        assert_eq!(p.stat_map()["#v_pt.2/1"], ExtNat::Finite(2));
    }

    #[test]
    fn errors() {
        let d = db("q(a).");
        assert!(matches!(profile(&d, &[("r".into(), vec![1], vec![])]), Err(StatsError::UnknownPredicate(_))));
        assert!(matches!(profile(&d, &[("q".into(), vec![2], vec![])]), Err(StatsError::UnknownColumn(..))));
    }

    #[test]
    fn json_round_trip() {
        let d = db("f_pt(a,f,b). f_pt(a,f,c). f_pt(b,g,c).");
        let mut p = profile(&d, &[("f_pt".into(), vec![3], vec![1, 2]), ("f_pt".into(), vec![1], vec![])]).unwrap();
        p.param_bounds.insert("h".into(), ExtNat::Infinite);
        p.conditions.insert("C2".into());
        let text = p.to_json().to_string();
        assert!(text.contains(r#"{"count":2,"given":[1,2],"out":[3],"pred":"f_pt"}"#), "{text}");
        assert_eq!(StatsProfile::from_json(&text).unwrap(), p);
    }

    #[test]
    fn empty_relation_counts_zero() {
        let mut d = Database::new();
        d.relation_mut("e", 2).unwrap();
        let p = profile(&d, &[("e".into(), vec![1, 2], vec![])]).unwrap();
        assert_eq!((p.sizes["e"], p.proj_counts["e.1,2"]), (0, 0));
    }
}
