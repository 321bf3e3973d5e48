//! The shipped analyses: rule sets, fact schemas and reference results.

use std::collections::BTreeMap;

use crate::decompose::{decompose_program, DecomposeOptions, DomainInfo};
use crate::eval::optimize_inequalities;
use crate::ir::{parse_program, Program};
use crate::num::ExtNat;

pub const POINT: &str = "point";
pub const VARIABLE: &str = "variable";
pub const HEAP: &str = "heap";
pub const FIELD: &str = "field";
pub const METHOD: &str = "method";
pub const TYPE: &str = "type";
pub const SIGNATURE: &str = "signature";
pub const INDEX: &str = "index";
pub const CONTEXT: &str = "context";

/// Relative domain sizes used to steer decomposition. Only their order matters.
const CLASS_SIZES: &[(&str, u128)] = &[
    (POINT, 1_000_000),
    (CONTEXT, 1_000_000_000_000),
    (VARIABLE, 100_000),
    (METHOD, 10_000),
    (HEAP, 10_000),
    (SIGNATURE, 1_000),
    (FIELD, 1_000),
    (TYPE, 100),
    (INDEX, 10),
];

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SummaryRow {
    pub worst_case: &'static str,
    /// Condition sets with the bound they are expected to give.
    pub conditional: Vec<(Vec<&'static str>, &'static str)>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub title: &'static str,
    pub source: &'static str,
    pub schema: Vec<(&'static str, Vec<&'static str>)>,
    /// Expected binary rules, with intermediate names as the reference uses them.
    pub golden_decomposition: Option<&'static str>,
    /// Expected `label<TAB>cost` rows.
    pub golden_costs: Option<&'static str>,
    pub summary: Option<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown catalog entry `{0}`")]
pub struct UnknownEntry(pub String);

impl CatalogEntry {
    pub fn program(&self) -> Program {
        parse_program(self.source).expect("catalog rules parse")
    }

    pub fn domain_info(&self) -> DomainInfo {
        DomainInfo {
            class_sizes: CLASS_SIZES.iter().map(|(c, n)| (c.to_string(), ExtNat::Finite(*n))).collect(),
            columns: self
                .schema
                .iter()
                .map(|(p, cs)| (p.to_string(), cs.iter().map(|c| c.to_string()).collect()))
                .collect(),
        }
    }

    /// The binary program produced by the decomposer with this entry's domains,
    /// after the inequality rewrite.
    pub fn decomposed(&self) -> Program {
        let d = self.domain_info();
        let p = optimize_inequalities(&self.program());
        decompose_program(&p, &DecomposeOptions { domain: Some(&d), edb_sizes: None })
    }

    pub fn golden_program(&self) -> Option<Program> {
        self.golden_decomposition.map(|s| parse_program(s).expect("golden rules parse"))
    }

    pub fn golden_cost_rows(&self) -> Vec<(&'static str, &'static str)> {
        self.golden_costs
            .map(|t| t.lines().filter(|l| !l.trim().is_empty()).filter_map(|l| l.split_once('\t')).collect())
            .unwrap_or_default()
    }

    pub fn column_classes(&self, pred: &str) -> Option<&[&'static str]> {
        self.schema.iter().find(|(p, _)| *p == pred).map(|(_, c)| c.as_slice())
    }
}

pub const NAMES: &[&str] = &[
    "andersen-oo",
    "interprocedural",
    "arrays",
    "exceptions",
    "context-0-1",
    "context-1-1",
    "context-2-1",
    "flow-must",
];

type Schema = Vec<(&'static str, Vec<&'static str>)>;

fn schema(rows: &[(&'static str, &[&'static str])]) -> Schema {
    rows.iter().map(|(p, c)| (*p, c.to_vec())).collect()
}

fn base_schema() -> Schema {
    schema(&[
        ("alloc", &[VARIABLE, HEAP, METHOD]),
        ("move", &[VARIABLE, VARIABLE]),
        ("load", &[VARIABLE, VARIABLE, FIELD]),
        ("store", &[VARIABLE, FIELD, VARIABLE]),
        ("v_pt", &[VARIABLE, HEAP]),
        ("f_pt", &[HEAP, FIELD, HEAP]),
    ])
}

fn call_schema() -> Schema {
    schema(&[
        ("vcall", &[VARIABLE, SIGNATURE, POINT, METHOD]),
        ("htype", &[HEAP, TYPE]),
        ("lookup", &[TYPE, SIGNATURE, METHOD]),
        ("this", &[METHOD, VARIABLE]),
        ("farg", &[METHOD, INDEX, VARIABLE]),
        ("aarg", &[POINT, INDEX, VARIABLE]),
        ("fret", &[METHOD, VARIABLE]),
        ("aret", &[POINT, VARIABLE]),
    ])
}

fn interprocedural_schema() -> Schema {
    let mut s = base_schema();
    s.extend(call_schema());
    s.extend(schema(&[("r", &[METHOD]), ("call", &[POINT, METHOD]), ("assign", &[VARIABLE, VARIABLE])]));
    s
}

fn array_schema() -> Schema {
    schema(&[
        ("astore", &[VARIABLE, VARIABLE]),
        ("aload", &[VARIABLE, VARIABLE]),
        ("etype", &[TYPE, TYPE]),
        ("stype", &[TYPE, TYPE]),
        ("a_pt", &[HEAP, HEAP]),
    ])
}

fn exception_schema() -> Schema {
    schema(&[
        ("in", &[POINT, METHOD]),
        ("throw", &[POINT, VARIABLE]),
        ("catch", &[TYPE, POINT, VARIABLE]),
        ("t_pt", &[METHOD, HEAP]),
    ])
}

/// Context-sensitive schema; heap contexts are call sites.
fn context_schema(method_contexts: bool) -> Schema {
    let mut s = schema(&[
        ("alloc", &[VARIABLE, HEAP, METHOD]),
        ("move", &[VARIABLE, VARIABLE]),
        ("load", &[VARIABLE, VARIABLE, FIELD]),
        ("store", &[VARIABLE, FIELD, VARIABLE]),
        ("f_pt", &[HEAP, POINT, FIELD, HEAP, POINT]),
        ("r", &[METHOD, CONTEXT]),
    ]);
    s.extend(call_schema());
    if method_contexts {
        s.extend(schema(&[
            ("v_pt", &[VARIABLE, CONTEXT, HEAP, POINT]),
            ("call", &[POINT, CONTEXT, METHOD, CONTEXT]),
            ("assign", &[VARIABLE, CONTEXT, VARIABLE, CONTEXT]),
        ]));
    } else {
        s.extend(schema(&[
            ("v_pt", &[VARIABLE, HEAP, POINT]),
            ("call", &[POINT, METHOD]),
            ("assign", &[VARIABLE, VARIABLE]),
        ]));
    }
    s.extend(array_schema().into_iter().filter(|(p, _)| *p != "a_pt"));
    s.extend(exception_schema().into_iter().filter(|(p, _)| *p == "throw" || *p == "catch"));
    s
}

fn flow_schema() -> Schema {
    schema(&[
        ("alloc", &[POINT, VARIABLE, HEAP, METHOD]),
        ("move", &[POINT, VARIABLE, VARIABLE]),
        ("phi", &[POINT, VARIABLE, VARIABLE, VARIABLE]),
        ("load", &[POINT, VARIABLE, VARIABLE, FIELD]),
        ("store", &[POINT, VARIABLE, FIELD, VARIABLE]),
        ("next", &[POINT, POINT]),
        ("vcall", &[VARIABLE, SIGNATURE, POINT, METHOD]),
        ("must_pt", &[VARIABLE, HEAP]),
        ("f_must_pt", &[POINT, HEAP, FIELD, HEAP]),
    ])
}

fn row(worst: &'static str, cond: &[(&[&'static str], &'static str)]) -> Option<SummaryRow> {
    Some(SummaryRow { worst_case: worst, conditional: cond.iter().map(|(c, e)| (c.to_vec(), *e)).collect() })
}

pub fn get_entry(name: &str) -> Result<CatalogEntry, UnknownEntry> {
    let e = match name {
        "andersen-oo" => CatalogEntry {
            name: "andersen-oo",
            title: "Andersen-style intraprocedural may-point-to",
            source: include_str!("rules/andersen-oo.dl"),
            schema: base_schema(),
            golden_decomposition: Some(include_str!("golden/andersen-oo.dl")),
            golden_costs: Some(include_str!("golden/andersen-oo.cost")),
            summary: row("p × h^2", &[(&["C1"], "p × h"), (&["C1", "C2"], "p")]),
        },
        "interprocedural" => CatalogEntry {
            name: "interprocedural",
            title: "Interprocedural may-point-to",
            source: include_str!("rules/interprocedural.dl"),
            schema: interprocedural_schema(),
            golden_decomposition: Some(include_str!("golden/interprocedural.dl")),
            golden_costs: Some(include_str!("golden/interprocedural.cost")),
            summary: row("p^2 × h", &[(&["C1", "C2", "C3"], "p")]),
        },
        "arrays" => CatalogEntry {
            name: "arrays",
            title: "Interprocedural may-point-to with arrays",
            source: include_str!("rules/arrays.dl"),
            schema: {
                let mut s = interprocedural_schema();
                s.extend(array_schema());
                s
            },
            golden_decomposition: Some(include_str!("golden/arrays.dl")),
            golden_costs: Some(include_str!("golden/arrays.cost")),
            summary: row("p^2 × h", &[(&["C1", "C2", "C3"], "p")]),
        },
        "exceptions" => CatalogEntry {
            name: "exceptions",
            title: "Interprocedural may-point-to with exceptions",
            source: include_str!("rules/exceptions.dl"),
            schema: {
                let mut s = interprocedural_schema();
                s.extend(exception_schema());
                s
            },
            golden_decomposition: Some(include_str!("golden/exceptions.dl")),
            golden_costs: Some(include_str!("golden/exceptions.cost")),
            summary: row("p^2 × h", &[(&["C1", "C3"], "p")]),
        },
        "context-0-1" => CatalogEntry {
            name: "context-0-1",
            title: "Context-insensitive methods, 1-call-site sensitive heap",
            source: include_str!("rules/context-0-1.dl"),
            schema: context_schema(false),
            golden_decomposition: None,
            golden_costs: None,
            summary: row("p^3 × h^2", &[]),
        },
        "context-1-1" => CatalogEntry {
            name: "context-1-1",
            title: "1-call-site sensitive, 1-call-site sensitive heap",
            source: include_str!("rules/context-1-1.dl"),
            schema: context_schema(true),
            golden_decomposition: None,
            golden_costs: None,
            summary: row("p^4 × h^2", &[]),
        },
        "context-2-1" => CatalogEntry {
            name: "context-2-1",
            title: "2-call-site sensitive, 1-call-site sensitive heap",
            source: include_str!("rules/context-2-1.dl"),
            schema: context_schema(true),
            golden_decomposition: Some(include_str!("golden/context-2-1.dl")),
            golden_costs: Some(include_str!("golden/context-2-1.cost")),
            summary: row("p^5 × h^2", &[]),
        },
        "flow-must" => CatalogEntry {
            name: "flow-must",
            title: "Flow-sensitive must-point-to",
            source: include_str!("rules/flow-must.dl"),
            schema: flow_schema(),
            golden_decomposition: None,
            golden_costs: None,
            summary: row("p × h^2 × f", &[(&["C5", "C6"], "p × h")]),
        },
        other => return Err(UnknownEntry(other.to_string())),
    };
    Ok(e)
}

pub fn entries() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| get_entry(n).unwrap()).collect()
}

/// C1 to C6 as (stat atom, bound) pairs in cost notation.
pub fn conditions() -> BTreeMap<&'static str, Vec<(&'static str, &'static str)>> {
    BTreeMap::from([
        ("C1", vec![("#v_pt.2/1", "1")]),
        ("C2", vec![("#f_pt.3/1,2", "1")]),
        (
            "C3",
            vec![
                ("#lookup.1,3/2", "1"),
                ("#this.2/1", "1"),
                ("#call.2/1", "1"),
                ("#farg.3/1,2", "1"),
                ("#fret.2/1", "1"),
            ],
        ),
        ("C4", vec![("#htype.2/1", "1"), ("#in.2/1", "1"), ("#t_pt.2/1", "1"), ("#throw.2/1", "1")]),
        ("C5", vec![("#must_pt.2/1", "1")]),
        ("C6", vec![("#f_must_pt.2,3,4", "h")]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{validate, Literal};

    #[test]
    fn entries_parse_and_validate() {
        for e in entries() {
            let p = e.program();
            assert!(validate(&p).is_empty(), "{}: {:?}", e.name, validate(&p));
            for (pred, arity) in p.predicates() {
                let cols = e.column_classes(&pred).unwrap_or_else(|| panic!("{}: {pred}", e.name));
                assert_eq!(cols.len(), arity, "{}: {pred}", e.name);
            }
            if let Some(g) = e.golden_program() {
                assert!(validate(&g).is_empty(), "{}", e.name);
            }
        }
    }

    #[test]
    fn rule_counts() {
        assert_eq!(get_entry("andersen-oo").unwrap().program().rules.len(), 4);
        let flow = get_entry("flow-must").unwrap().program();
        assert_eq!(flow.rules.len(), 7);
        let guarded = flow
            .rules
            .iter()
            .filter(|r| r.hypotheses.iter().any(|l| matches!(l, Literal::UniversalGuard { .. })))
            .count();
        assert_eq!(guarded, 2);
        assert!(get_entry("nonexistent").is_err());
    }

    #[test]
    fn labels_survive_multiline_rules() {
        let p = get_entry("context-2-1").unwrap().program();
        assert!(p.rule("R19").is_some());
        assert_eq!(p.rules.iter().filter(|r| r.label.is_none()).count(), 0);
    }
}
