//! Symbolic cost expressions in `#pred.out/given` notation.

use std::collections::BTreeMap;
use std::fmt;

use crate::num::ExtNat;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum CostExpr {
    Size(String),
    /// Maximum number of distinct `out` values per fixed `given` values.
    /// Columns are 1-based and sorted.
    Proj {
        pred: String,
        out: Vec<usize>,
        given: Vec<usize>,
    },
    Param(String),
    Const(u128),
    Product(Vec<CostExpr>),
    Sum(Vec<CostExpr>),
    Min(Vec<CostExpr>),
    Infinity,
}

impl CostExpr {
    pub fn size(pred: &str) -> CostExpr {
        CostExpr::Size(pred.to_string())
    }

    pub fn proj(pred: &str, out: &[usize], given: &[usize]) -> CostExpr {
        let mut out = out.to_vec();
        let mut given = given.to_vec();
        out.sort_unstable();
        out.dedup();
        given.sort_unstable();
        given.dedup();
        CostExpr::Proj { pred: pred.to_string(), out, given }
    }

    pub fn param(name: &str) -> CostExpr {
        CostExpr::Param(name.to_string())
    }

    pub fn product(items: Vec<CostExpr>) -> CostExpr {
        CostExpr::Product(items).canonical()
    }

    pub fn sum(items: Vec<CostExpr>) -> CostExpr {
        CostExpr::Sum(items).canonical()
    }

    pub fn min(items: Vec<CostExpr>) -> CostExpr {
        CostExpr::Min(items).canonical()
    }

    /// Flattens nested same-operator nodes, sorts children, drops neutral
    /// elements and duplicate Min branches.
    pub fn canonical(&self) -> CostExpr {
        fn flatten(items: &[CostExpr], wrap: fn(&CostExpr) -> Option<&Vec<CostExpr>>) -> Vec<CostExpr> {
            let mut out = Vec::new();
            for c in items.iter().map(CostExpr::canonical) {
                match wrap(&c) {
                    Some(inner) => out.extend(inner.iter().cloned()),
                    None => out.push(c),
                }
            }
            out.sort();
            out
        }
        match self {
            CostExpr::Product(items) => {
                let mut v = flatten(items, |e| match e {
                    CostExpr::Product(x) => Some(x),
                    _ => None,
                });
                if v.contains(&CostExpr::Const(0)) {
                    return CostExpr::Const(0);
                }
                let k: u128 = v
                    .iter()
                    .filter_map(|e| match e {
                        CostExpr::Const(n) => Some(*n),
                        _ => None,
                    })
                    .product();
                v.retain(|e| !matches!(e, CostExpr::Const(_)));
                if v.contains(&CostExpr::Infinity) {
                    return CostExpr::Infinity;
                }
                if k != 1 {
                    v.insert(0, CostExpr::Const(k));
                    v.sort();
                }
                collapse(v, CostExpr::Product, CostExpr::Const(1))
            }
            CostExpr::Sum(items) => {
                let mut v = flatten(items, |e| match e {
                    CostExpr::Sum(x) => Some(x),
                    _ => None,
                });
                v.retain(|e| *e != CostExpr::Const(0));
                if v.contains(&CostExpr::Infinity) {
                    return CostExpr::Infinity;
                }
                collapse(v, CostExpr::Sum, CostExpr::Const(0))
            }
            CostExpr::Min(items) => {
                let mut v = flatten(items, |e| match e {
                    CostExpr::Min(x) => Some(x),
                    _ => None,
                });
                v.dedup();
                if v.len() > 1 {
                    v.retain(|e| *e != CostExpr::Infinity);
                }
                collapse(v, CostExpr::Min, CostExpr::Infinity)
            }
            other => other.clone(),
        }
    }

    /// Every `Size`/`Proj` leaf, in order of first appearance.
    pub fn stat_atoms(&self) -> Vec<CostExpr> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if matches!(e, CostExpr::Size(_) | CostExpr::Proj { .. }) && !out.contains(e) {
                out.push(e.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&CostExpr)) {
        f(self);
        if let CostExpr::Product(v) | CostExpr::Sum(v) | CostExpr::Min(v) = self {
            for c in v {
                c.visit(f);
            }
        }
    }

    /// Rewrites leaves bottom-up.
    pub fn map_leaves(&self, f: &mut impl FnMut(&CostExpr) -> CostExpr) -> CostExpr {
        match self {
            CostExpr::Product(v) => CostExpr::Product(v.iter().map(|c| c.map_leaves(f)).collect()),
            CostExpr::Sum(v) => CostExpr::Sum(v.iter().map(|c| c.map_leaves(f)).collect()),
            CostExpr::Min(v) => CostExpr::Min(v.iter().map(|c| c.map_leaves(f)).collect()),
            leaf => f(leaf),
        }
        .canonical()
    }

    /// Predicate names mentioned by stat atoms.
    pub fn preds(&self) -> Vec<String> {
        self.stat_atoms()
            .into_iter()
            .filter_map(|a| match a {
                CostExpr::Size(p) | CostExpr::Proj { pred: p, .. } => Some(p),
                _ => None,
            })
            .collect()
    }
}

fn collapse(mut v: Vec<CostExpr>, wrap: fn(Vec<CostExpr>) -> CostExpr, empty: CostExpr) -> CostExpr {
    match v.len() {
        0 => empty,
        1 => v.pop().unwrap(),
        _ => wrap(v),
    }
}

fn write_cols(f: &mut fmt::Formatter<'_>, cols: &[usize]) -> fmt::Result {
    for (i, c) in cols.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

impl fmt::Display for CostExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostExpr::Size(p) => write!(f, "#{p}"),
            CostExpr::Proj { pred, out, given } => {
                write!(f, "#{pred}.")?;
                write_cols(f, out)?;
                if !given.is_empty() {
                    f.write_str("/")?;
                    write_cols(f, given)?;
                }
                Ok(())
            }
            CostExpr::Param(p) => f.write_str(p),
            CostExpr::Const(n) => write!(f, "{n}"),
            CostExpr::Infinity => f.write_str("inf"),
            CostExpr::Min(v) => {
                f.write_str("min(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            CostExpr::Sum(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            CostExpr::Product(v) => {
                let mut i = 0;
                let mut first = true;
                while i < v.len() {
                    let mut k = 1;
                    while matches!(v[i], CostExpr::Param(_)) && i + k < v.len() && v[i + k] == v[i] {
                        k += 1;
                    }
                    if !first {
                        f.write_str(" × ")?;
                    }
                    first = false;
                    match &v[i] {
                        c @ CostExpr::Sum(_) => write!(f, "({c})")?,
                        c => write!(f, "{c}")?,
                    }
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                    i += k;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostError {
    #[error("rule {0} has more than two positive hypotheses")]
    NotBinary(String),
    #[error("missing statistic {0}")]
    MissingStat(String),
    #[error("cannot parse cost expression at offset {pos}: {message}")]
    Parse { pos: usize, message: String },
}

/// Numeric value under measured statistics and parameter values.
pub fn instantiate(
    expr: &CostExpr,
    stats: &BTreeMap<String, ExtNat>,
    params: &BTreeMap<String, ExtNat>,
) -> Result<ExtNat, CostError> {
    match expr {
        CostExpr::Size(_) | CostExpr::Proj { .. } => {
            let key = expr.to_string();
            stats.get(&key).copied().ok_or(CostError::MissingStat(key))
        }
        CostExpr::Param(p) => params.get(p).copied().ok_or_else(|| CostError::MissingStat(p.clone())),
        CostExpr::Const(n) => Ok(ExtNat::Finite(*n)),
        CostExpr::Infinity => Ok(ExtNat::Infinite),
        CostExpr::Product(v) => v.iter().try_fold(ExtNat::ONE, |a, c| Ok(a * instantiate(c, stats, params)?)),
        CostExpr::Sum(v) => v.iter().try_fold(ExtNat::ZERO, |a, c| Ok(a + instantiate(c, stats, params)?)),
        CostExpr::Min(v) => {
            let mut best = ExtNat::Infinite;
            for c in v {
                best = best.min(instantiate(c, stats, params)?);
            }
            Ok(best)
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T, CostError> {
        Err(CostError::Parse { pos: self.pos, message: message.to_string() })
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, t: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u128, CostError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        self.src[start..self.pos].parse().or_else(|_| self.err("number too large"))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        self.src[start..self.pos].to_string()
    }

    fn cols(&mut self) -> Result<Vec<usize>, CostError> {
        let mut v = vec![self.number()? as usize];
        while self.pos + 1 < self.s.len() && self.s[self.pos] == b',' && self.s[self.pos + 1].is_ascii_digit() {
            self.pos += 1;
            v.push(self.number()? as usize);
        }
        Ok(v)
    }

    fn sum(&mut self) -> Result<CostExpr, CostError> {
        let mut v = vec![self.product()?];
        while self.eat("+") {
            v.push(self.product()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { CostExpr::Sum(v) })
    }

    fn product(&mut self) -> Result<CostExpr, CostError> {
        let mut v = vec![self.power()?];
        while self.eat("×") || self.eat("*") {
            v.push(self.power()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { CostExpr::Product(v) })
    }

    fn power(&mut self) -> Result<CostExpr, CostError> {
        let base = self.atom()?;
        if self.eat("^") {
            self.ws();
            let k = self.number()? as usize;
            return Ok(CostExpr::Product(vec![base; k]));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<CostExpr, CostError> {
        self.ws();
        if self.eat("#") {
            let pred = self.ident();
            if pred.is_empty() {
                return self.err("expected a predicate name");
            }
            if self.pos < self.s.len() && self.s[self.pos] == b'.' {
                self.pos += 1;
                let out = self.cols()?;
                let given = if self.pos < self.s.len() && self.s[self.pos] == b'/' {
                    self.pos += 1;
                    self.cols()?
                } else {
                    Vec::new()
                };
                return Ok(CostExpr::proj(&pred, &out, &given));
            }
            return Ok(CostExpr::Size(pred));
        }
        if self.eat("(") {
            let e = self.sum()?;
            if !self.eat(")") {
                return self.err("expected `)`");
            }
            return Ok(e);
        }
        if self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            return Ok(CostExpr::Const(self.number()?));
        }
        let name = self.ident();
        match name.as_str() {
            "" => self.err("expected an expression"),
            "inf" => Ok(CostExpr::Infinity),
            "min" | "O" => {
                if !self.eat("(") {
                    return self.err("expected `(`");
                }
                let mut v = vec![self.sum()?];
                while self.eat(",") {
                    v.push(self.sum()?);
                }
                if !self.eat(")") {
                    return self.err("expected `)`");
                }
                if name == "O" {
                    if v.len() != 1 {
                        return self.err("O() takes one argument");
                    }
                    return Ok(v.pop().unwrap());
                }
                Ok(CostExpr::Min(v))
            }
            _ => Ok(CostExpr::Param(name)),
        }
    }
}

/// Parses `min(#q × #r.2/1, #r × #q.1/2)`-style text into canonical form.
pub fn parse_cost(text: &str) -> Result<CostExpr, CostError> {
    let mut p = Parser { s: text.as_bytes(), src: text, pos: 0 };
    let e = p.sum()?;
    p.ws();
    if p.pos != p.s.len() {
        return p.err("trailing input");
    }
    Ok(e.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in
            ["min(#int1 × #f_pt.3/1,2, #f_pt × #int1.1/2,3)", "#next.2 × #f_must_pt.2,3,4", "p × h^2", "(v + h) × h"]
        {
            let e = parse_cost(s).unwrap();
            assert_eq!(parse_cost(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
    }

    #[test]
    fn min_is_commutative() {
        assert_eq!(
            parse_cost("min(#q × #r.2/1, #r × #q.1/2)").unwrap(),
            parse_cost("min(#q.1/2 × #r, #r.2/1 × #q)").unwrap()
        );
    }

    #[test]
    fn instantiate_arithmetic() {
        let e = parse_cost("min(#q × #r.2/1, #r × #q.1/2)").unwrap();
        let stats: BTreeMap<String, ExtNat> = [("#q", 3u128), ("#r", 5), ("#r.2/1", 2), ("#q.1/2", 1)]
            .iter()
            .map(|(k, v)| (k.to_string(), ExtNat::Finite(*v)))
            .collect();
        assert_eq!(instantiate(&e, &stats, &BTreeMap::new()), Ok(ExtNat::Finite(5)));
        let missing = parse_cost("#zz").unwrap();
        assert!(matches!(instantiate(&missing, &stats, &BTreeMap::new()), Err(CostError::MissingStat(_))));
    }
}
