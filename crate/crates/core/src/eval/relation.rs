//! Tuple sets with hash indexes on column subsets.

use std::collections::{HashMap, HashSet};

use super::store::Id;

pub type Tuple = Box<[Id]>;

/// Tuples in insertion order. Positions in `tuples` are stable, so a prefix
/// of the vector is the relation as it was at an earlier point.
#[derive(Debug, Clone, Default)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    tuples: Vec<Tuple>,
    set: HashSet<Tuple>,
    indexes: HashMap<Vec<usize>, HashMap<Vec<Id>, Vec<u32>>>,
}

fn key(t: &[Id], cols: &[usize]) -> Vec<Id> {
    cols.iter().map(|c| t[*c]).collect()
}

impl Relation {
    pub fn new(name: &str, arity: usize) -> Relation {
        Relation { name: name.to_string(), arity, ..Relation::default() }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Id]) -> bool {
        self.set.contains(t)
    }

    pub fn get(&self, pos: usize) -> &[Id] {
        &self.tuples[pos]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Id]> {
        self.tuples.iter().map(|t| &t[..])
    }

    /// Adds a tuple; false if it was already present.
    pub fn insert(&mut self, t: Tuple) -> bool {
        debug_assert_eq!(t.len(), self.arity);
        if self.set.contains(&t) {
            return false;
        }
        let pos = self.tuples.len() as u32;
        for (cols, idx) in &mut self.indexes {
            idx.entry(key(&t, cols)).or_default().push(pos);
        }
        self.set.insert(t.clone());
        self.tuples.push(t);
        true
    }

    /// Builds the index on `cols` if it does not exist yet.
    pub fn ensure_index(&mut self, cols: &[usize]) {
        if self.indexes.contains_key(cols) {
            return;
        }
        let mut idx: HashMap<Vec<Id>, Vec<u32>> = HashMap::new();
        for (pos, t) in self.tuples.iter().enumerate() {
            idx.entry(key(t, cols)).or_default().push(pos as u32);
        }
        self.indexes.insert(cols.to_vec(), idx);
    }

    /// Positions of the tuples whose `cols` equal `values`, in insertion order.
    /// The index must have been built with `ensure_index`.
    pub fn lookup(&self, cols: &[usize], values: &[Id]) -> &[u32] {
        self.indexes.get(cols).and_then(|idx| idx.get(values)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_index(&self, cols: &[usize]) -> bool {
        self.indexes.contains_key(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[u32]) -> Tuple {
        v.iter().map(|x| Id(*x)).collect()
    }

    #[test]
    fn index_tracks_inserts() {
        let mut r = Relation::new("q", 2);
        r.insert(t(&[1, 2]));
        r.ensure_index(&[0]);
        assert!(r.insert(t(&[1, 3])));
        assert!(!r.insert(t(&[1, 3])));
        r.insert(t(&[2, 3]));
        assert_eq!(r.lookup(&[0], &[Id(1)]), &[0, 1]);
        assert_eq!(r.lookup(&[0], &[Id(9)]), &[] as &[u32]);
    }
}
