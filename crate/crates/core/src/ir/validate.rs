//! Static checks over parsed programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{Literal, PredKind, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// A conclusion variable is not bound by any positive hypothesis.
    UnsafeVariable {
        var: String,
    },
    /// A variable of a negation, inequality or guard is not bound by a positive hypothesis.
    UnboundVariable {
        var: String,
        literal: String,
    },
    NegationOnIdb {
        pred: String,
    },
    WildcardInConclusion,
    FunctionInInequality,
    GuardVariableMissing {
        var: String,
    },
    GuardDomainNotEdb {
        pred: String,
    },
    GuardBodyNotIdb {
        pred: String,
    },
    EdbWithRules {
        pred: String,
    },
    NonGroundFact {
        fact: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostic {
    pub rule: Option<String>,
    #[serde(flatten)]
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = &self.rule {
            write!(f, "({r}) ")?;
        }
        match &self.kind {
            DiagnosticKind::UnsafeVariable { var } => {
                write!(f, "conclusion variable `{var}` is not bound by a positive hypothesis")
            }
            DiagnosticKind::UnboundVariable { var, literal } => {
                write!(f, "variable `{var}` of `{literal}` is not bound by a positive hypothesis")
            }
            DiagnosticKind::NegationOnIdb { pred } => {
                write!(f, "negated predicate `{pred}` is not an EDB predicate")
            }
            DiagnosticKind::WildcardInConclusion => write!(f, "`_` in a conclusion"),
            DiagnosticKind::FunctionInInequality => {
                write!(f, "inequality operands must be variables or constants")
            }
            DiagnosticKind::GuardVariableMissing { var } => {
                write!(f, "quantified variable `{var}` must occur in both guard atoms")
            }
            DiagnosticKind::GuardDomainNotEdb { pred } => {
                write!(f, "guard domain `{pred}` is not an EDB predicate")
            }
            DiagnosticKind::GuardBodyNotIdb { pred } => {
                write!(f, "guard body `{pred}` is not an IDB predicate")
            }
            DiagnosticKind::EdbWithRules { pred } => {
                write!(f, "`{pred}` is declared EDB but concluded by a rule")
            }
            DiagnosticKind::NonGroundFact { fact } => write!(f, "fact `{fact}` is not ground"),
        }
    }
}

fn positive_vars(rule: &Rule) -> BTreeSet<&str> {
    rule.positives().flat_map(|a| a.vars()).collect()
}

fn rule_diag(rule: &Rule, kind: DiagnosticKind) -> Diagnostic {
    Diagnostic { rule: rule.label.clone(), kind }
}

/// Conclusion variables not bound by any positive hypothesis.
pub fn safety_violations(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for rule in &program.rules {
        let bound = positive_vars(rule);
        let mut seen = BTreeSet::new();
        for c in &rule.conclusions {
            for v in c.vars() {
                if !bound.contains(v) && seen.insert(v) {
                    out.push(rule_diag(rule, DiagnosticKind::UnsafeVariable { var: v.to_string() }));
                }
            }
        }
    }
    out
}

pub fn validate(program: &Program) -> Vec<Diagnostic> {
    let mut out = safety_violations(program);
    let is_idb = |p: &str| program.is_idb(p);

    for (name, decl) in &program.declarations {
        if decl.kind == Some(PredKind::Edb)
            && program.rules.iter().any(|r| r.conclusions.iter().any(|c| &c.pred == name))
        {
            out.push(Diagnostic { rule: None, kind: DiagnosticKind::EdbWithRules { pred: name.clone() } });
        }
    }

    for rule in &program.rules {
        let bound = positive_vars(rule);
        if rule.conclusions.iter().any(|c| c.args.iter().any(Term::has_wildcard)) {
            out.push(rule_diag(rule, DiagnosticKind::WildcardInConclusion));
        }
        for lit in &rule.hypotheses {
            if lit.is_positive() {
                continue;
            }
            for v in lit.vars() {
                if !bound.contains(v) {
                    out.push(rule_diag(
                        rule,
                        DiagnosticKind::UnboundVariable { var: v.to_string(), literal: lit.to_string() },
                    ));
                }
            }
            match lit {
                Literal::NegatedEdb(a) if is_idb(&a.pred) => {
                    out.push(rule_diag(rule, DiagnosticKind::NegationOnIdb { pred: a.pred.clone() }));
                }
                Literal::Inequality(l, r) => {
                    if matches!(l, Term::App(..)) || matches!(r, Term::App(..)) {
                        out.push(rule_diag(rule, DiagnosticKind::FunctionInInequality));
                    }
                }
                Literal::UniversalGuard { bound_var, domain, body } => {
                    if !domain.vars().contains(&bound_var.as_str()) || !body.vars().contains(&bound_var.as_str()) {
                        out.push(rule_diag(rule, DiagnosticKind::GuardVariableMissing { var: bound_var.clone() }));
                    }
                    if is_idb(&domain.pred) {
                        out.push(rule_diag(rule, DiagnosticKind::GuardDomainNotEdb { pred: domain.pred.clone() }));
                    }
                    if !is_idb(&body.pred) {
                        out.push(rule_diag(rule, DiagnosticKind::GuardBodyNotIdb { pred: body.pred.clone() }));
                    }
                }
                _ => {}
            }
        }
    }

    for fact in &program.facts {
        if !fact.is_ground() {
            out.push(Diagnostic { rule: None, kind: DiagnosticKind::NonGroundFact { fact: fact.to_string() } });
        }
    }
    out
}

/// EDB/IDB classification of every predicate in the program.
pub fn classify(program: &Program) -> BTreeMap<String, PredKind> {
    program
        .predicates()
        .into_keys()
        .map(|p| {
            let k = program.kind_of(&p);
            (p, k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const FIG1: &str = "
        v_pt(v,h) :- alloc(v,h,m).                            // (R1)
        v_pt(v,h) :- move(v,v2), v_pt(v2,h).                  // (R2)
        v_pt(v,h) :- load(v,v2,f), v_pt(v2,h2), f_pt(h2,f,h). // (R3)
        f_pt(h,f,h2) :- store(v,f,v2), v_pt(v,h), v_pt(v2,h2).// (R4)
    ";

    #[test]
    fn andersen_rules_are_valid() {
        let p = parse_program(FIG1).unwrap();
        assert!(validate(&p).is_empty());
        let kinds = classify(&p);
        assert_eq!(kinds["v_pt"], PredKind::Idb);
        assert_eq!(kinds["alloc"], PredKind::Edb);
    }

    #[test]
    fn negation_on_idb_is_reported() {
        let src = format!("{FIG1}\nq(v) :- move(v,w), not v_pt(v,w).");
        let p = parse_program(&src).unwrap();
        let d = validate(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::NegationOnIdb { pred: "v_pt".into() });
    }

    #[test]
    fn unbound_negation_variable() {
        let p = parse_program("q(x) :- e(x), not f(x,y).").unwrap();
        let d = validate(&p);
        assert!(matches!(&d[0].kind, DiagnosticKind::UnboundVariable { var, .. } if var == "y"));
    }

    #[test]
    fn guard_domain_must_be_edb() {
        let p = parse_program("q(j) :- n(_,j), q(_), (forall i: q(i) => q(j)).").unwrap();
        assert!(validate(&p)
            .iter()
            .any(|d| matches!(&d.kind, DiagnosticKind::GuardDomainNotEdb { pred } if pred == "q")));
    }
}
