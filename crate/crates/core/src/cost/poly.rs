//! Asymptotic polynomials: antichains of monomials ordered by dominance.

use std::collections::BTreeMap;
use std::fmt;

use super::expr::CostExpr;

/// Symbol standing for `v + h`, ranked between `p` and `v`.
pub const SUM_VH: &str = "(v + h)";

/// Ordered symbols, largest first. Every other symbol is free.
const CHAIN: [&str; 4] = ["p", SUM_VH, "v", "h"];

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub BTreeMap<String, u32>);

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn symbol(name: &str) -> Mono {
        Mono(BTreeMap::from([(name.to_string(), 1)]))
    }

    fn exp(&self, s: &str) -> u32 {
        self.0.get(s).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut m = self.0.clone();
        for (s, e) in &other.0 {
            *m.entry(s.clone()).or_insert(0) += e;
        }
        Mono(m)
    }

    /// Holds for every assignment with p ≥ v+h ≥ v ≥ h ≥ 1 and free symbols ≥ 1.
    pub fn leq(&self, other: &Mono) -> bool {
        let (mut a, mut b) = (0, 0);
        for s in CHAIN {
            a += self.exp(s);
            b += other.exp(s);
            if a > b {
                return false;
            }
        }
        self.0.iter().filter(|(s, _)| !CHAIN.contains(&s.as_str())).all(|(s, e)| *e <= other.exp(s))
    }

    /// Total order used when dominance cannot decide: total degree, then degree
    /// in p, then h, then v, then f, then everything else.
    pub fn key(&self) -> (u32, u32, u32, u32, u32, u32) {
        let rest: u32 =
            self.0.iter().filter(|(s, _)| !["p", "h", "v", SUM_VH, "f"].contains(&s.as_str())).map(|(_, e)| *e).sum();
        let total = self.0.values().sum();
        (total, self.exp("p"), self.exp("h"), self.exp("v") + self.exp(SUM_VH), self.exp("f"), rest)
    }

    fn gcd(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .filter_map(|(s, e)| {
                    let k = (*e).min(other.exp(s));
                    (k > 0).then(|| (s.clone(), k))
                })
                .collect(),
        )
    }

    fn div(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .filter_map(|(s, e)| {
                    let k = e - other.exp(s);
                    (k > 0).then(|| (s.clone(), k))
                })
                .collect(),
        )
    }

    fn ordered(&self) -> Vec<(&str, u32)> {
        let mut v: Vec<(&str, u32)> =
            CHAIN.iter().filter_map(|s| self.0.get_key_value(*s).map(|(k, e)| (k.as_str(), *e))).collect();
        v.extend(self.0.iter().filter(|(s, _)| !CHAIN.contains(&s.as_str())).map(|(s, e)| (s.as_str(), *e)));
        v
    }

    pub fn to_expr(&self) -> CostExpr {
        let mut items = Vec::new();
        for (s, e) in self.ordered() {
            let leaf = symbol_expr(s);
            for _ in 0..e {
                items.push(leaf.clone());
            }
        }
        CostExpr::product(items)
    }
}

fn symbol_expr(s: &str) -> CostExpr {
    if s == SUM_VH {
        CostExpr::sum(vec![CostExpr::param("v"), CostExpr::param("h")])
    } else if s.starts_with('#') {
        super::parse_cost(s).unwrap_or_else(|_| CostExpr::param(s))
    } else {
        CostExpr::param(s)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.ordered();
        if parts.is_empty() {
            return f.write_str("1");
        }
        for (i, (s, e)) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" × ")?;
            }
            f.write_str(s)?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// An upper bound: a sum of non-dominated monomials, or unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Poly {
    Terms(Vec<Mono>),
    Unbounded,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::Terms(Vec::new())
    }

    pub fn one() -> Poly {
        Poly::Terms(vec![Mono::one()])
    }

    pub fn symbol(name: &str) -> Poly {
        Poly::Terms(vec![Mono::symbol(name)])
    }

    fn reduce(mut terms: Vec<Mono>) -> Poly {
        terms.sort();
        terms.dedup();
        let keep: Vec<Mono> = terms.iter().filter(|m| !terms.iter().any(|o| *o != **m && m.leq(o))).cloned().collect();
        Poly::Terms(keep)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        match (self, other) {
            (Poly::Terms(a), Poly::Terms(b)) => Poly::reduce(a.iter().chain(b).cloned().collect()),
            _ => Poly::Unbounded,
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        match (self, other) {
            (Poly::Terms(a), Poly::Terms(b)) => {
                if a.is_empty() || b.is_empty() {
                    return Poly::zero();
                }
                Poly::reduce(a.iter().flat_map(|x| b.iter().map(move |y| x.mul(y))).collect())
            }
            (Poly::Terms(a), _) | (_, Poly::Terms(a)) if a.is_empty() => Poly::zero(),
            _ => Poly::Unbounded,
        }
    }

    pub fn le(&self, other: &Poly) -> bool {
        match (self, other) {
            (_, Poly::Unbounded) => true,
            (Poly::Unbounded, _) => false,
            (Poly::Terms(a), Poly::Terms(b)) => a.iter().all(|m| b.iter().any(|o| m.leq(o))),
        }
    }

    fn key(&self) -> Option<(u32, u32, u32, u32, u32, u32)> {
        match self {
            Poly::Unbounded => None,
            Poly::Terms(t) => Some(t.iter().map(Mono::key).max().unwrap_or_default()),
        }
    }

    /// The smaller bound: by dominance when decidable, otherwise by the total
    /// order on leading monomials. Ties keep `self`.
    pub fn min(&self, other: &Poly) -> Poly {
        if self.le(other) {
            return self.clone();
        }
        if other.le(self) {
            return other.clone();
        }
        match (self.key(), other.key()) {
            (Some(a), Some(b)) if b < a => other.clone(),
            (None, _) => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn to_expr(&self) -> CostExpr {
        match self {
            Poly::Unbounded => CostExpr::Infinity,
            Poly::Terms(t) => CostExpr::sum(t.iter().map(Mono::to_expr).collect()),
        }
    }

    /// Asymptotic equality.
    pub fn equivalent(&self, other: &Poly) -> bool {
        self.le(other) && other.le(self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = match self {
            Poly::Unbounded => return f.write_str("inf"),
            Poly::Terms(t) if t.is_empty() => return f.write_str("0"),
            Poly::Terms(t) => t,
        };
        if terms.len() == 1 {
            return write!(f, "{}", terms[0]);
        }
        let common = terms.iter().skip(1).fold(terms[0].clone(), |g, m| g.gcd(m));
        let inner: Vec<String> = terms.iter().map(|m| m.div(&common).to_string()).collect();
        if common == Mono::one() {
            f.write_str(&inner.join(" + "))
        } else {
            write!(f, "{common} × ({})", inner.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(parts: &[(&str, u32)]) -> Mono {
        Mono(parts.iter().map(|(s, e)| (s.to_string(), *e)).collect())
    }

    #[test]
    fn dominance() {
        assert!(m(&[("h", 1)]).leq(&m(&[("p", 1)])));
        assert!(!m(&[("p", 1)]).leq(&m(&[("h", 2)])));
        assert!(!m(&[("h", 2)]).leq(&m(&[("p", 1)])));
        assert!(m(&[("v", 1)]).leq(&m(&[(SUM_VH, 1)])));
        assert!(!m(&[("f", 1)]).leq(&m(&[("p", 5)])));
    }

    #[test]
    fn sum_keeps_antichain() {
        let a = Poly::Terms(vec![m(&[("p", 1), ("h", 1)])]);
        let b = Poly::Terms(vec![m(&[("p", 1), ("h", 2)])]);
        assert_eq!(a.add(&b), b);
        assert_eq!(a.min(&b), a);
    }

    #[test]
    fn display_factors() {
        let p = Poly::Terms(vec![m(&[(SUM_VH, 1), ("#a", 1)]), m(&[(SUM_VH, 1), ("#b", 1)])]);
        assert_eq!(p.to_string(), "(v + h) × (#a + #b)");
    }
}
