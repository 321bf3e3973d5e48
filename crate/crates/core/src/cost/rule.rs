//! Per-rule time bounds for binary rules.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::{CostError, CostExpr};
use crate::ir::{Atom, Literal, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct GuardCost {
    pub init: CostExpr,
    pub maintenance: CostExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RuleCost {
    pub label: String,
    pub expr: CostExpr,
    /// Positions (1-based) in the second hypothesis of variables shared with the first.
    pub c12: Vec<usize>,
    pub c21: Vec<usize>,
    /// Single-hypothesis rules, dominated by the rule producing their hypothesis.
    pub omissible: bool,
    pub guards: Vec<GuardCost>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CostTable {
    pub rows: Vec<RuleCost>,
    pub total: CostExpr,
}

/// `#q`, or `#q.<essential columns>` when some columns are wildcards.
pub fn atom_size(a: &Atom) -> CostExpr {
    let ess = a.essential_columns();
    if ess.len() == a.arity() {
        CostExpr::size(&a.pred)
    } else {
        let cols: Vec<usize> = ess.iter().map(|c| c + 1).collect();
        CostExpr::proj(&a.pred, &cols, &[])
    }
}

/// Split of the non-wildcard columns into those fully determined by `shared`
/// and the rest.
fn split_columns(a: &Atom, shared: &BTreeSet<&str>) -> (Vec<usize>, Vec<usize>) {
    let (mut given, mut out) = (Vec::new(), Vec::new());
    for (i, t) in a.args.iter().enumerate() {
        if *t == Term::Wildcard {
            continue;
        }
        if t.vars().iter().all(|v| shared.contains(v)) {
            given.push(i + 1);
        } else {
            out.push(i + 1);
        }
    }
    (given, out)
}

fn guard_cost(bound_var: &str, domain: &Atom, body: &Atom) -> GuardCost {
    let has_bound = |t: &Term| t.vars().contains(&bound_var);
    let (mut dom_out, mut dom_given) = (Vec::new(), Vec::new());
    for i in domain.essential_columns() {
        if has_bound(&domain.args[i]) {
            dom_given.push(i + 1);
        } else {
            dom_out.push(i + 1);
        }
    }
    let body_free: Vec<usize> =
        body.essential_columns().into_iter().filter(|&i| !has_bound(&body.args[i])).map(|i| i + 1).collect();
    GuardCost {
        init: atom_size(domain),
        maintenance: CostExpr::min(vec![
            CostExpr::product(vec![CostExpr::proj(&domain.pred, &dom_out, &dom_given), atom_size(body)]),
            CostExpr::product(vec![atom_size(domain), CostExpr::proj(&body.pred, &body_free, &[])]),
        ]),
    }
}

pub fn rule_cost(rule: &Rule) -> Result<RuleCost, CostError> {
    let pos: Vec<&Atom> = rule.positives().collect();
    let label = rule.display_label();
    let guards = rule
        .hypotheses
        .iter()
        .filter_map(|l| match l {
            Literal::UniversalGuard { bound_var, domain, body } => Some(guard_cost(bound_var, domain, body)),
            _ => None,
        })
        .collect();
    let (expr, c12, c21, omissible) = match pos.as_slice() {
        [] => (CostExpr::Const(1), vec![], vec![], true),
        [a] => (atom_size(a), vec![], vec![], true),
        [a, b] => {
            let va: BTreeSet<&str> = a.vars().into_iter().collect();
            let vb: BTreeSet<&str> = b.vars().into_iter().collect();
            let shared: BTreeSet<&str> = va.intersection(&vb).copied().collect();
            let (given_b, out_b) = split_columns(b, &shared);
            let (given_a, out_a) = split_columns(a, &shared);
            let c12 = shared_positions(b, &shared);
            let c21 = shared_positions(a, &shared);
            let (sa, sb) = (atom_size(a), atom_size(b));
            let expr = if out_b.is_empty() {
                sa
            } else if out_a.is_empty() {
                sb
            } else {
                CostExpr::min(vec![
                    CostExpr::product(vec![sa, CostExpr::proj(&b.pred, &out_b, &given_b)]),
                    CostExpr::product(vec![sb, CostExpr::proj(&a.pred, &out_a, &given_a)]),
                ])
            };
            (expr, c12, c21, false)
        }
        _ => return Err(CostError::NotBinary(label)),
    };
    Ok(RuleCost { label, expr, c12, c21, omissible, guards })
}

fn shared_positions(a: &Atom, shared: &BTreeSet<&str>) -> Vec<usize> {
    a.args.iter().enumerate().filter(|(_, t)| t.vars().iter().any(|v| shared.contains(v))).map(|(i, _)| i + 1).collect()
}

pub fn program_cost(program: &Program) -> Result<CostTable, CostError> {
    let rows = program.rules.iter().map(rule_cost).collect::<Result<Vec<_>, _>>()?;
    let mut terms = Vec::new();
    for r in &rows {
        if !r.omissible {
            terms.push(r.expr.clone());
        }
        for g in &r.guards {
            terms.push(g.init.clone());
            terms.push(g.maintenance.clone());
        }
    }
    Ok(CostTable { total: CostExpr::sum(terms), rows })
}

/// Bound on each IDB relation: the smaller of the total firing cost of its
/// rules and the product of its columns' domain bounds.
pub fn derive_idb_size_bounds(
    program: &Program,
    rule_costs: &[RuleCost],
    domain_bounds: &BTreeMap<String, Vec<CostExpr>>,
) -> BTreeMap<String, CostExpr> {
    let mut out = BTreeMap::new();
    for pred in program.idb_predicates() {
        let mut costs = Vec::new();
        for (rule, cost) in program.rules.iter().zip(rule_costs) {
            if rule.conclusions.iter().any(|c| c.pred == pred) {
                costs.push(cost.expr.clone());
            }
        }
        let dom = domain_bounds.get(&pred).map(|cols| CostExpr::product(cols.clone())).unwrap_or(CostExpr::Infinity);
        out.insert(pred, CostExpr::min(vec![CostExpr::sum(costs), dom]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::parse_cost;
    use crate::ir::parse_program;

    fn cost_of(src: &str) -> CostExpr {
        rule_cost(&parse_program(src).unwrap().rules[0]).unwrap().expr
    }

    #[test]
    fn two_hypotheses() {
        assert_eq!(cost_of("p(x,z) :- q(x,y), r(y,z)."), parse_cost("min(#q × #r.2/1, #r × #q.1/2)").unwrap());
        assert_eq!(
            cost_of("v_pt(v,h) :- int1(v,f,h2), f_pt(h2,f,h)."),
            parse_cost("min(#int1 × #f_pt.3/1,2, #f_pt × #int1.1/2,3)").unwrap()
        );
    }

    #[test]
    fn subset_join_is_one_sided() {
        assert_eq!(cost_of("i(s,p,h) :- i25(s,p,m1,P(a,b),h), r(m1,P(a,b))."), parse_cost("#i25").unwrap());
    }

    #[test]
    fn guard_rule() {
        let r =
            &parse_program("f(j,h) :- next(_,j), f(_,h), (forall i: next(i,j) => f(i,h)), not s(j).").unwrap().rules[0];
        let c = rule_cost(r).unwrap();
        assert_eq!(c.expr, parse_cost("#next.2 × #f.2").unwrap());
        assert_eq!(c.guards[0].init, parse_cost("#next").unwrap());
        assert_eq!(c.guards[0].maintenance, parse_cost("min(#next.2/1 × #f, #next × #f.2)").unwrap());
    }

    #[test]
    fn not_binary() {
        let r = &parse_program("o(x) :- a(x), b(x), c(x).").unwrap().rules[0];
        assert!(matches!(rule_cost(r), Err(CostError::NotBinary(_))));
    }

    #[test]
    fn empty_program() {
        let t = program_cost(&Program::default()).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.total, CostExpr::Const(0));
    }
}
