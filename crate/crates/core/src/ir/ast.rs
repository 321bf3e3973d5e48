//! Rule language: terms, atoms, literals, rules and programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A term in a rule or fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
    /// `_`: every occurrence is a distinct anonymous variable.
    Wildcard,
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) | Term::Wildcard => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Number of constants and function symbols in the term.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) => 1,
            Term::Var(_) | Term::Wildcard => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Appends the named variables of this term in first-occurrence order.
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Const(_) | Term::Wildcard => {}
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Term::Wildcard => true,
            Term::App(_, args) => args.iter().any(Term::has_wildcard),
            _ => false,
        }
    }

    /// Visits each function application in the term, outermost first.
    pub fn for_each_app<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [Term])) {
        if let Term::App(functor, args) = self {
            f(functor, args);
            for a in args {
                a.for_each_app(f);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => {
                // `{:#}` is rule position, where bare identifiers read as variables.
                let quote = needs_quotes(c) || (f.alternate() && !c.chars().all(|ch| ch.is_ascii_digit()));
                if quote {
                    write!(f, "\"{}\"", c.replace('\\', "\\\\").replace('"', "\\\""))
                } else {
                    f.write_str(c)
                }
            }
            Term::Var(v) => f.write_str(v),
            Term::Wildcard => f.write_str("_"),
            Term::App(functor, args) => {
                write!(f, "{functor}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

/// Constants print bare when they re-parse as constants in fact position.
fn needs_quotes(c: &str) -> bool {
    let mut chars = c.chars();
    match chars.next() {
        None => true,
        Some(first) if first.is_ascii_alphanumeric() => !c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_'),
        Some(_) => true,
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        if f.alternate() {
            write!(f, "{item:#}")?;
        } else {
            write!(f, "{item}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: pred.to_string(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Column indices (0-based) that are not wildcards.
    pub fn essential_columns(&self) -> Vec<usize> {
        (0..self.args.len()).filter(|&i| self.args[i] != Term::Wildcard).collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        write_list(f, &self.args)?;
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Positive(Atom),
    NegatedEdb(Atom),
    Inequality(Term, Term),
    /// `(forall bound: domain => body)`.
    UniversalGuard {
        bound_var: String,
        domain: Atom,
        body: Atom,
    },
    /// Holds when `pred` has a tuple starting with `prefix` whose last column differs
    /// from `excluded`. Produced by the inequality rewrite.
    ExistsOther {
        pred: String,
        prefix: Vec<Term>,
        excluded: Term,
    },
}

impl Literal {
    pub fn as_positive(&self) -> Option<&Atom> {
        match self {
            Literal::Positive(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Literal::Positive(_))
    }

    /// Named variables of the literal, excluding a guard's bound variable.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match self {
            Literal::Positive(a) | Literal::NegatedEdb(a) => {
                for t in &a.args {
                    t.collect_vars(&mut out);
                }
            }
            Literal::Inequality(l, r) => {
                l.collect_vars(&mut out);
                r.collect_vars(&mut out);
            }
            Literal::UniversalGuard { bound_var, domain, body } => {
                for t in domain.args.iter().chain(&body.args) {
                    t.collect_vars(&mut out);
                }
                out.retain(|v| v != bound_var);
            }
            Literal::ExistsOther { prefix, excluded, .. } => {
                for t in prefix {
                    t.collect_vars(&mut out);
                }
                excluded.collect_vars(&mut out);
            }
        }
        out
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Positive(a) => write!(f, "{a:#}"),
            Literal::NegatedEdb(a) => write!(f, "not {a:#}"),
            Literal::Inequality(l, r) => write!(f, "{l:#} != {r:#}"),
            Literal::UniversalGuard { bound_var, domain, body } => {
                write!(f, "(forall {bound_var}: {domain:#} => {body:#})")
            }
            Literal::ExistsOther { pred, prefix, excluded } => {
                write!(f, "exists_other({pred}(")?;
                for (i, t) in prefix.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t:#}")?;
                }
                write!(f, "), {excluded:#})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub conclusions: Vec<Atom>,
    pub hypotheses: Vec<Literal>,
    pub label: Option<String>,
    /// Label of the source rule this one was decomposed from.
    pub origin: Option<String>,
}

impl Rule {
    pub fn new(conclusions: Vec<Atom>, hypotheses: Vec<Literal>) -> Rule {
        Rule { conclusions, hypotheses, label: None, origin: None }
    }

    pub fn with_label(mut self, label: &str) -> Rule {
        self.label = Some(label.to_string());
        self
    }

    pub fn positives(&self) -> impl Iterator<Item = &Atom> {
        self.hypotheses.iter().filter_map(Literal::as_positive)
    }

    pub fn positive_count(&self) -> usize {
        self.positives().count()
    }

    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| "?".to_string())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conclusions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c:#}")?;
        }
        f.write_str(" :- ")?;
        for (i, h) in self.hypotheses.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{h}")?;
        }
        f.write_str(".")?;
        match (&self.label, &self.origin) {
            (Some(l), Some(o)) => write!(f, "  // ({l}) from ({o})"),
            (Some(l), None) => write!(f, "  // ({l})"),
            (None, Some(o)) => write!(f, "  // from ({o})"),
            (None, None) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredKind {
    Edb,
    Idb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub arity: usize,
    pub kind: Option<PredKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Atom>,
    pub declarations: BTreeMap<String, Declaration>,
}

impl Program {
    /// Predicates concluded by some rule, or pinned IDB by a declaration.
    pub fn idb_predicates(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> =
            self.rules.iter().flat_map(|r| r.conclusions.iter().map(|c| c.pred.clone())).collect();
        for (name, decl) in &self.declarations {
            if decl.kind == Some(PredKind::Idb) {
                out.insert(name.clone());
            }
        }
        out
    }

    pub fn is_idb(&self, pred: &str) -> bool {
        if let Some(Declaration { kind: Some(k), .. }) = self.declarations.get(pred) {
            return *k == PredKind::Idb;
        }
        self.rules.iter().any(|r| r.conclusions.iter().any(|c| c.pred == pred))
    }

    pub fn kind_of(&self, pred: &str) -> PredKind {
        if self.is_idb(pred) {
            PredKind::Idb
        } else {
            PredKind::Edb
        }
    }

    /// Every predicate mentioned anywhere, with its arity (first occurrence wins).
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for (name, d) in &self.declarations {
            out.insert(name.clone(), d.arity);
        }
        let visit = |out: &mut BTreeMap<String, usize>, a: &Atom| {
            out.entry(a.pred.clone()).or_insert(a.arity());
        };
        for r in &self.rules {
            for c in &r.conclusions {
                visit(&mut out, c);
            }
            for h in &r.hypotheses {
                match h {
                    Literal::Positive(a) | Literal::NegatedEdb(a) => visit(&mut out, a),
                    Literal::UniversalGuard { domain, body, .. } => {
                        visit(&mut out, domain);
                        visit(&mut out, body);
                    }
                    Literal::ExistsOther { pred, prefix, .. } => {
                        out.entry(pred.clone()).or_insert(prefix.len() + 1);
                    }
                    Literal::Inequality(..) => {}
                }
            }
        }
        for f in &self.facts {
            out.entry(f.pred.clone()).or_insert(f.arity());
        }
        out
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label.as_deref() == Some(label))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, d) in &self.declarations {
            write!(f, ".decl {name}/{}", d.arity)?;
            match d.kind {
                Some(PredKind::Edb) => writeln!(f, " edb")?,
                Some(PredKind::Idb) => writeln!(f, " idb")?,
                None => writeln!(f)?,
            }
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}
