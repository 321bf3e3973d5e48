//! Named assumption sets for the shipped analyses.

use super::expr::CostExpr;
use super::rule::CostTable;
use super::simplify::Assumptions;
use crate::catalog;
use crate::decompose::DomainInfo;
use crate::ir::Program;
use crate::stats::compute_count_bound;

fn base(binary: &Program, original: &Program, domain: &DomainInfo, table: &CostTable) -> Assumptions {
    let p = CostExpr::param("p");
    let counts: Vec<CostExpr> = compute_count_bound(original).into_values().collect();
    let context = if counts.is_empty() { CostExpr::Infinity } else { CostExpr::sum(counts) };
    let class_bounds = [
        (catalog::POINT, p.clone()),
        (catalog::VARIABLE, p.clone()),
        (catalog::HEAP, CostExpr::param("h")),
        (catalog::FIELD, CostExpr::param("f")),
        (catalog::METHOD, p.clone()),
        (catalog::SIGNATURE, p.clone()),
        (catalog::TYPE, CostExpr::Const(1)),
        (catalog::INDEX, CostExpr::Const(1)),
        (catalog::CONTEXT, context),
    ]
    .into_iter()
    .map(|(c, e)| (c.to_string(), e))
    .collect();
    let a =
        Assumptions { columns: domain.columns.clone(), class_bounds, default_edb_size: Some(p), ..Default::default() };
    let costs: Vec<_> = table.rows.clone();
    a.with_program(binary, &costs)
}

/// Every class bounded by the program size `p`, except heaps (`h`), fields
/// (`f`) and the constant-size type and index domains.
pub fn worst_case(binary: &Program, original: &Program, domain: &DomainInfo, table: &CostTable) -> Assumptions {
    base(binary, original, domain, table)
}

fn concluded_by<'a>(binary: &'a Program, label: &str) -> Option<&'a str> {
    binary.rule(label).and_then(|r| r.conclusions.first()).map(|c| c.pred.as_str())
}

/// Sparse programs: a constant number of loads and stores per variable and
/// `v + h` bounding the copy relations.
pub fn k_sparse(binary: &Program, original: &Program, domain: &DomainInfo, table: &CostTable) -> Assumptions {
    let mut a = base(binary, original, domain, table);
    a.class_bounds.insert(catalog::VARIABLE.to_string(), CostExpr::param("v"));
    a.add_constraints(&[("#store.2,3/1", "1"), ("#load.1,3/2", "1"), ("#move", "v + h")]);
    for label in ["R3/1", "R4/1"] {
        if let Some(q) = concluded_by(binary, label) {
            a.constraints.push((CostExpr::size(q), super::parse_cost("v + h").unwrap()));
        }
    }
    a.free.insert(super::parse_cost("#v_pt.2/1").unwrap());
    a.free.insert(super::parse_cost("#f_pt.3/1,2").unwrap());
    a
}

/// Adds conditions C1..C6 by name.
pub fn apply_conditions(a: &mut Assumptions, ids: &[&str]) -> Result<(), String> {
    let all = catalog::conditions();
    for id in ids {
        let pairs = all.get(id).ok_or_else(|| format!("unknown condition `{id}`"))?;
        a.add_constraints(pairs);
    }
    Ok(())
}
