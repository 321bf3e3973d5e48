//! Interned ground terms.

use std::collections::HashMap;
use std::fmt;

use crate::ir::Term;

/// Handle to an interned ground term. Equal terms have equal ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Sym(Box<str>),
    App(Box<str>, Box<[Id]>),
}

#[derive(Debug, Clone, Default)]
pub struct TermStore {
    ids: HashMap<Node, Id>,
    nodes: Vec<Node>,
    sizes: Vec<u32>,
}

impl TermStore {
    pub fn new() -> TermStore {
        TermStore::default()
    }

    fn intern(&mut self, node: Node, size: u32) -> Id {
        if let Some(id) = self.ids.get(&node) {
            return *id;
        }
        let id = Id(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.sizes.push(size);
        self.ids.insert(node, id);
        id
    }

    pub fn symbol(&mut self, name: &str) -> Id {
        self.intern(Node::Sym(name.into()), 1)
    }

    pub fn app(&mut self, functor: &str, args: &[Id]) -> Id {
        let size = 1 + args.iter().map(|a| self.sizes[a.0 as usize]).sum::<u32>();
        self.intern(Node::App(functor.into(), args.into()), size)
    }

    /// Looks up a symbol without interning it.
    pub fn find_symbol(&self, name: &str) -> Option<Id> {
        self.ids.get(&Node::Sym(name.into())).copied()
    }

    pub fn find_app(&self, functor: &str, args: &[Id]) -> Option<Id> {
        self.ids.get(&Node::App(functor.into(), args.into())).copied()
    }

    /// Interns a ground term; `None` if it has variables.
    pub fn term(&mut self, t: &Term) -> Option<Id> {
        match t {
            Term::Const(c) => Some(self.symbol(c)),
            Term::App(f, args) => {
                let ids = args.iter().map(|a| self.term(a)).collect::<Option<Vec<_>>>()?;
                Some(self.app(f, &ids))
            }
            Term::Var(_) | Term::Wildcard => None,
        }
    }

    pub fn size(&self, id: Id) -> u32 {
        self.sizes[id.0 as usize]
    }

    /// The functor and arguments of an application.
    pub fn as_app(&self, id: Id) -> Option<(&str, &[Id])> {
        match &self.nodes[id.0 as usize] {
            Node::App(f, args) => Some((f, args)),
            Node::Sym(_) => None,
        }
    }

    pub fn to_term(&self, id: Id) -> Term {
        match &self.nodes[id.0 as usize] {
            Node::Sym(s) => Term::Const(s.to_string()),
            Node::App(f, args) => Term::App(f.to_string(), args.iter().map(|a| self.to_term(*a)).collect()),
        }
    }

    pub fn display(&self, id: Id) -> Display<'_> {
        Display { store: self, id }
    }
}

pub struct Display<'a> {
    store: &'a TermStore,
    id: Id,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.store.to_term(self.id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_ground_term;

    #[test]
    fn equal_terms_share_an_id() {
        let mut s = TermStore::new();
        let a = s.term(&parse_ground_term("P(x,P(y,z))").unwrap()).unwrap();
        let b = s.term(&parse_ground_term("P(x,P(y,z))").unwrap()).unwrap();
        let c = s.term(&parse_ground_term("P(x,P(z,y))").unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(s.size(a), 5);
        assert_eq!(s.display(a).to_string(), "P(x,P(y,z))");
    }
}
