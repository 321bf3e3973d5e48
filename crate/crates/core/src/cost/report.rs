//! Cost tables as text or JSON.

use std::collections::BTreeMap;

use super::expr::{instantiate, CostError, CostExpr};
use super::poly::Poly;
use super::preset::{apply_conditions, k_sparse, worst_case};
use super::rule::{program_cost, CostTable};
use super::simplify::{simplify_poly, Assumptions};
use crate::catalog::CatalogEntry;
use crate::decompose::{decompose_program, infer_columns, DecomposeOptions, DomainInfo};
use crate::eval::optimize_inequalities;
use crate::ir::Program;
use crate::num::ExtNat;

type Values<'a> = (&'a BTreeMap<String, ExtNat>, &'a BTreeMap<String, ExtNat>);

/// A decomposed program with its cost table and column classes.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub original: Program,
    pub binary: Program,
    pub domain: DomainInfo,
    pub table: CostTable,
}

impl Analysis {
    pub fn new(original: &Program, base: &DomainInfo) -> Result<Analysis, CostError> {
        let rewritten = optimize_inequalities(original);
        let binary = decompose_program(&rewritten, &DecomposeOptions { domain: Some(base), edb_sizes: None });
        Analysis::of_binary(original, binary, base)
    }

    pub fn of_binary(original: &Program, binary: Program, base: &DomainInfo) -> Result<Analysis, CostError> {
        let domain = infer_columns(&binary, base);
        let table = program_cost(&binary)?;
        Ok(Analysis { original: original.clone(), binary, domain, table })
    }

    pub fn of_entry(entry: &CatalogEntry) -> Analysis {
        let binary = entry.decomposed();
        Analysis::of_binary(&entry.program(), binary, &entry.domain_info()).expect("catalog entries are binary")
    }

    pub fn worst_case(&self) -> Assumptions {
        worst_case(&self.binary, &self.original, &self.domain, &self.table)
    }

    pub fn k_sparse(&self) -> Assumptions {
        k_sparse(&self.binary, &self.original, &self.domain, &self.table)
    }

    /// Worst-case total, tightened by the named conditions.
    pub fn total_under(&self, conditions: &[&str]) -> Result<Poly, String> {
        let mut a = self.worst_case();
        apply_conditions(&mut a, conditions)?;
        Ok(simplify_poly(&self.table.total, &a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ReportRow {
    pub label: String,
    pub expr: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<ExtNat>,
    #[serde(skip)]
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub total: String,
    pub total_value: Option<ExtNat>,
    pub simplified: Option<Poly>,
}

impl Report {
    /// `values` instantiates every row; `simplified` is the O(..) line.
    pub fn new(table: &CostTable, values: Option<Values>, simplified: Option<Poly>) -> Result<Report, CostError> {
        let value = |e: &CostExpr| values.map(|(s, p)| instantiate(e, s, p)).transpose();
        let mut rows = Vec::new();
        for r in &table.rows {
            let note = if r.omissible { "omissible" } else { "" };
            rows.push(ReportRow { label: r.label.clone(), expr: r.expr.to_string(), value: value(&r.expr)?, note });
            for (i, g) in r.guards.iter().enumerate() {
                let tag = if r.guards.len() > 1 { format!("{}", i + 1) } else { String::new() };
                for (kind, e) in [("init", &g.init), ("maint", &g.maintenance)] {
                    rows.push(ReportRow {
                        label: format!("{} forall{tag} {kind}", r.label),
                        expr: e.to_string(),
                        value: value(e)?,
                        note: "",
                    });
                }
            }
        }
        Ok(Report { rows, total: table.total.to_string(), total_value: value(&table.total)?, simplified })
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(0).max(5);
        let ewidth = self.rows.iter().map(|r| r.expr.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
        for r in &self.rows {
            let mut line = format!("{}  {}", pad(&r.label, width), pad(&r.expr, ewidth));
            if let Some(v) = r.value {
                line.push_str(&format!("  = {v}"));
            }
            if !r.note.is_empty() {
                line.push_str(&format!("  ({})", r.note));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&format!("{}  {}", pad("total", width), self.total));
        if let Some(v) = self.total_value {
            out.push_str(&format!("  = {v}"));
        }
        out.push('\n');
        if let Some(s) = &self.simplified {
            out.push_str(&format!("O({s})\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rules: serde_json::Map<String, serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut o = serde_json::json!({ "expr": r.expr });
                if let Some(v) = r.value {
                    o["value"] = serde_json::to_value(v).unwrap();
                }
                if !r.note.is_empty() {
                    o[r.note] = true.into();
                }
                (r.label.clone(), o)
            })
            .collect();
        let mut doc = serde_json::json!({ "rules": rules, "total": self.total });
        if let Some(v) = self.total_value {
            doc["total_value"] = serde_json::to_value(v).unwrap();
        }
        if let Some(s) = &self.simplified {
            doc["simplified"] = format!("O({s})").into();
        }
        doc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;

    #[test]
    fn andersen_text_report() {
        let a = Analysis::of_entry(&get_entry("andersen-oo").unwrap());
        let total = a.total_under(&["C1", "C2"]).unwrap();
        let text = Report::new(&a.table, None, Some(total)).unwrap().to_text();
        assert!(text.lines().next().unwrap().ends_with("(omissible)"), "{text}");
        assert!(text.contains("#f_pt.3/1,2"), "{text}");
        assert_eq!(text.lines().last(), Some("O(p)"));
    }

    #[test]
    fn json_shape() {
        let a = Analysis::of_entry(&get_entry("andersen-oo").unwrap());
        let j = Report::new(&a.table, None, Some(a.total_under(&[]).unwrap())).unwrap().to_json();
        assert_eq!(j["simplified"], "O(p × h^2)");
        assert!(j["rules"]["R1"]["omissible"].as_bool().unwrap());
    }
}
