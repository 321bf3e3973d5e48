//! Rule rewrites applied before evaluation.

use crate::ir::{Literal, Program, Rule, Term};

fn occurrences(rule: &Rule, x: &str) -> usize {
    let in_concl: usize = rule.conclusions.iter().map(|c| c.vars().iter().filter(|v| **v == x).count()).sum();
    let in_hyps: usize = rule.hypotheses.iter().map(|l| l.vars().iter().filter(|v| **v == x).count()).sum();
    in_concl + in_hyps
}

/// Replaces `q(…, x), x != y` by `exists_other(q(…), y)` when `x` is used nowhere else.
pub fn apply_inequality_optimization(rule: &Rule) -> Rule {
    let mut rule = rule.clone();
    loop {
        let Some((pos, neq, x_other)) = find_pattern(&rule) else {
            return rule;
        };
        let Literal::Positive(atom) = rule.hypotheses[pos].clone() else { unreachable!() };
        let mut prefix = atom.args.clone();
        prefix.pop();
        rule.hypotheses[pos] = Literal::ExistsOther { pred: atom.pred, prefix, excluded: x_other };
        rule.hypotheses.remove(neq);
    }
}

fn find_pattern(rule: &Rule) -> Option<(usize, usize, Term)> {
    for (ni, lit) in rule.hypotheses.iter().enumerate() {
        let Literal::Inequality(l, r) = lit else { continue };
        for (x, y) in [(l, r), (r, l)] {
            let Term::Var(x) = x else { continue };
            if occurrences(rule, x) != 2 {
                continue;
            }
            let found = rule.hypotheses.iter().position(|h| match h {
                Literal::Positive(a) => {
                    matches!(a.args.last(), Some(Term::Var(v)) if v == x)
                        && a.args[..a.args.len() - 1].iter().all(|t| !t.vars().contains(&x.as_str()))
                }
                _ => false,
            });
            if let Some(pi) = found {
                return Some((pi, ni, y.clone()));
            }
        }
    }
    None
}

pub fn optimize_inequalities(program: &Program) -> Program {
    let mut p = program.clone();
    p.rules = p.rules.iter().map(apply_inequality_optimization).collect();
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    fn first(src: &str) -> Rule {
        parse_program(src).unwrap().rules.remove(0)
    }

    #[test]
    fn removes_extra_variable() {
        let r = first("f(j,h) :- store(j,v,f,_), must_pt(v,h3), h3 != h, g(h).");
        let out = apply_inequality_optimization(&r);
        assert_eq!(out.to_string(), first("f(j,h) :- store(j,v,f,_), exists_other(must_pt(v), h), g(h).").to_string());
    }

    #[test]
    fn used_in_conclusion_is_unchanged() {
        let r = first("f(j,h3,h) :- store(j,v,f,_), must_pt(v,h3), h3 != h, g(h).");
        assert_eq!(apply_inequality_optimization(&r), r);
    }
}
