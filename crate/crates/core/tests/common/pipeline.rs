use ptlog::catalog::get_entry;
use ptlog::cost::{parse_cost, poly_of, simplify_poly, Analysis, Poly};

pub fn analyze(name: &str) -> Analysis {
    Analysis::of_entry(&get_entry(name).unwrap())
}

pub fn sparse_total(a: &Analysis, keep_free: bool) -> Poly {
    let mut s = a.k_sparse();
    if !keep_free {
        s.free.clear();
    }
    simplify_poly(&a.table.total, &s)
}

pub fn expected(text: &str) -> Poly {
    poly_of(&parse_cost(text).unwrap())
}
