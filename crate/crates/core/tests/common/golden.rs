//! Comparisons against the reference decompositions and cost tables.

use ptlog::catalog::get_entry;
use ptlog::cost::{parse_cost, program_cost};
use ptlog::decompose::{decompose_program, DecomposeOptions};
use ptlog::ir::Program;

use super::iso::{match_programs, rename_cost};

fn decompose(name: &str) -> (Program, Program, Program) {
    let e = get_entry(name).unwrap();
    let d = e.domain_info();
    let prog = e.program();
    let out = decompose_program(&prog, &DecomposeOptions { domain: Some(&d), edb_sizes: None });
    (out, e.golden_program().unwrap(), prog)
}

/// Rules of the reference decomposition with no isomorphic counterpart.
pub fn decomposition_mismatches(name: &str) -> Vec<String> {
    let (out, gold, prog) = decompose(name);
    match_programs(&out, &gold, &prog).err().unwrap_or_default()
}

/// Rows that differ from the reference table, as `label: produced != expected`.
pub fn cost_mismatches(name: &str) -> Vec<String> {
    let (out, gold, prog) = decompose(name);
    let map = match match_programs(&out, &gold, &prog) {
        Ok(m) => m,
        Err(_) => {
            // Fall back to the partial mapping of the rules that do line up.
            let mut ok = gold.clone();
            ok.rules.retain(|g| {
                let one = Program { rules: vec![g.clone()], ..Default::default() };
                match_programs(&out, &one, &prog).is_ok()
            });
            match_programs(&out, &ok, &prog).unwrap()
        }
    };
    let table = program_cost(&out).unwrap();
    let mut bad = Vec::new();
    for (label, expected) in get_entry(name).unwrap().golden_cost_rows() {
        let want = parse_cost(expected).unwrap();
        match table.rows.iter().find(|r| r.label == label) {
            Some(r) => {
                let got = rename_cost(&r.expr, &map);
                if got != want {
                    bad.push(format!("{label}: {got} != {want}"));
                }
            }
            None => bad.push(format!("{label}: missing")),
        }
    }
    bad
}
