//! Relations over a shared term store, and `.facts` files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use super::relation::{Relation, Tuple};
use super::store::{Id, TermStore};
use crate::ir::{parse_ground_term, Term};

#[derive(Debug, thiserror::Error)]
pub enum FactsError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: expected {expected} columns, found {found}")]
    Arity { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: bad term `{text}`")]
    Term { path: String, line: usize, text: String },
    #[error("`{0}` is used with two different arities")]
    Mismatch(String),
}

#[derive(Debug, Clone, Default)]
pub struct Database {
    pub store: TermStore,
    pub relations: BTreeMap<String, Relation>,
}

/// Reads one TSV field. Fields that look like applications are parsed as terms,
/// everything else is a symbol.
pub fn parse_field(text: &str) -> Option<Term> {
    if text.ends_with(')') && text.contains('(') {
        parse_ground_term(text).ok().filter(Term::is_ground)
    } else {
        Some(Term::Const(text.to_string()))
    }
}

pub fn format_field(t: &Term) -> String {
    match t {
        Term::Const(c) => c.clone(),
        other => other.to_string(),
    }
}

impl Database {
    pub fn new() -> Database {
        Database::default()
    }

    pub fn relation_mut(&mut self, pred: &str, arity: usize) -> Result<&mut Relation, FactsError> {
        let r = self.relations.entry(pred.to_string()).or_insert_with(|| Relation::new(pred, arity));
        if r.arity != arity {
            return Err(FactsError::Mismatch(pred.to_string()));
        }
        Ok(r)
    }

    /// Adds a ground fact; false if it was already present.
    pub fn add_fact(&mut self, pred: &str, args: &[Term]) -> Result<bool, FactsError> {
        let ids: Tuple = args
            .iter()
            .map(|t| self.store.term(t))
            .collect::<Option<Vec<Id>>>()
            .ok_or_else(|| FactsError::Term { path: pred.to_string(), line: 0, text: format!("{args:?}") })?
            .into();
        Ok(self.relation_mut(pred, args.len())?.insert(ids))
    }

    /// Adds ground atoms as facts.
    pub fn add_atoms(&mut self, atoms: &[crate::ir::Atom]) -> Result<(), FactsError> {
        for a in atoms {
            self.add_fact(&a.pred, &a.args)?;
        }
        Ok(())
    }

    pub fn facts(&self, pred: &str) -> Vec<Vec<Term>> {
        self.relations
            .get(pred)
            .map(|r| r.iter().map(|t| t.iter().map(|id| self.store.to_term(*id)).collect()).collect())
            .unwrap_or_default()
    }

    pub fn len(&self, pred: &str) -> usize {
        self.relations.get(pred).map_or(0, Relation::len)
    }

    /// Loads every `<pred>.facts` file in `dir`. Arity comes from `arities`
    /// when known, otherwise from the first line.
    pub fn load_dir(&mut self, dir: &Path, arities: &BTreeMap<String, usize>) -> Result<(), FactsError> {
        fn io_err(p: &Path) -> impl Fn(io::Error) -> FactsError + '_ {
            move |source| FactsError::Io { path: p.display().to_string(), source }
        }
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "facts"))
            .collect();
        paths.sort();
        for path in paths {
            let pred = path.file_stem().unwrap().to_string_lossy().to_string();
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            self.load_text(&pred, &text, arities.get(&pred).copied(), &path.display().to_string())?;
        }
        Ok(())
    }

    pub fn load_text(&mut self, pred: &str, text: &str, arity: Option<usize>, origin: &str) -> Result<(), FactsError> {
        let mut arity = arity;
        if let Some(n) = arity {
            self.relation_mut(pred, n)?;
        }
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let n = *arity.get_or_insert(fields.len());
            if fields.len() != n {
                return Err(FactsError::Arity {
                    path: origin.to_string(),
                    line: i + 1,
                    expected: n,
                    found: fields.len(),
                });
            }
            let terms = fields
                .iter()
                .map(|f| {
                    parse_field(f).ok_or_else(|| FactsError::Term {
                        path: origin.to_string(),
                        line: i + 1,
                        text: f.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            self.add_fact(pred, &terms)?;
        }
        Ok(())
    }

    pub fn to_tsv(&self, pred: &str) -> String {
        let mut rows: Vec<String> =
            self.facts(pred).into_iter().map(|t| t.iter().map(format_field).collect::<Vec<_>>().join("\t")).collect();
        rows.sort();
        rows.into_iter().map(|r| r + "\n").collect()
    }

    /// Writes one `<pred>.facts` file per listed predicate.
    pub fn write_dir(&self, dir: &Path, preds: &[String]) -> Result<(), FactsError> {
        fs::create_dir_all(dir).map_err(|source| FactsError::Io { path: dir.display().to_string(), source })?;
        for p in preds {
            let path = dir.join(format!("{p}.facts"));
            fs::write(&path, self.to_tsv(p))
                .map_err(|source| FactsError::Io { path: path.display().to_string(), source })?;
        }
        Ok(())
    }
}
