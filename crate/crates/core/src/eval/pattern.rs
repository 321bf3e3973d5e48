//! Atom arguments compiled against a rule's variable numbering.

use std::collections::BTreeMap;

use super::store::{Id, TermStore};
use crate::ir::Term;

pub type Binding = Vec<Option<Id>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pat {
    Var(usize),
    Const(Id),
    Any,
    App(String, Vec<Pat>),
}

/// Variable numbering for one rule.
#[derive(Debug, Clone, Default)]
pub struct Vars {
    pub names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vars {
    pub fn id(&mut self, name: &str) -> usize {
        if let Some(i) = self.index.get(name) {
            return *i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn pat(&mut self, t: &Term, store: &mut TermStore) -> Pat {
        match t {
            Term::Var(v) => Pat::Var(self.id(v)),
            Term::Const(c) => Pat::Const(store.symbol(c)),
            Term::Wildcard => Pat::Any,
            Term::App(f, args) => Pat::App(f.clone(), args.iter().map(|a| self.pat(a, store)).collect()),
        }
    }
}

impl Pat {
    /// Distinct variables in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Pat::Var(v) if !out.contains(v) => out.push(*v),
            Pat::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn has_any(&self) -> bool {
        match self {
            Pat::Any => true,
            Pat::App(_, args) => args.iter().any(Pat::has_any),
            _ => false,
        }
    }

    /// Unifies the pattern with a ground value, extending `b`.
    pub fn matches(&self, store: &TermStore, id: Id, b: &mut Binding) -> bool {
        match self {
            Pat::Any => true,
            Pat::Var(v) => match b[*v] {
                Some(x) => x == id,
                None => {
                    b[*v] = Some(id);
                    true
                }
            },
            Pat::Const(c) => *c == id,
            Pat::App(f, args) => match store.as_app(id) {
                Some((g, vals)) if g == f && vals.len() == args.len() => {
                    let vals = vals.to_vec();
                    args.iter().zip(vals).all(|(p, v)| p.matches(store, v, b))
                }
                _ => false,
            },
        }
    }

    /// The value under a binding, if it is already an existing term.
    pub fn resolve(&self, store: &TermStore, b: &Binding) -> Option<Id> {
        match self {
            Pat::Var(v) => b[*v],
            Pat::Const(c) => Some(*c),
            Pat::Any => None,
            Pat::App(f, args) => {
                let ids = args.iter().map(|a| a.resolve(store, b)).collect::<Option<Vec<_>>>()?;
                store.find_app(f, &ids)
            }
        }
    }

    /// Builds the value under a complete binding.
    pub fn build(&self, store: &mut TermStore, b: &Binding) -> Id {
        match self {
            Pat::Var(v) => b[*v].expect("bound variable"),
            Pat::Const(c) => *c,
            Pat::Any => unreachable!("wildcard in a conclusion"),
            Pat::App(f, args) => {
                let ids: Vec<Id> = args.iter().map(|a| a.build(store, b)).collect();
                store.app(f, &ids)
            }
        }
    }
}

pub fn match_all(pats: &[Pat], store: &TermStore, tuple: &[Id], b: &mut Binding) -> bool {
    pats.iter().zip(tuple).all(|(p, v)| p.matches(store, *v, b))
}
