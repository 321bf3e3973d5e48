mod common;

use common::golden::cost_mismatches;

#[test]
fn andersen_table() {
    assert_eq!(cost_mismatches("andersen-oo"), Vec::<String>::new());
}

#[test]
fn interprocedural_table() {
    assert_eq!(cost_mismatches("interprocedural"), Vec::<String>::new());
}

#[test]
fn arrays_table() {
    assert_eq!(cost_mismatches("arrays"), Vec::<String>::new());
}

#[test]
fn exceptions_table() {
    assert_eq!(cost_mismatches("exceptions"), Vec::<String>::new());
}

#[test]
fn context_table_differs_only_on_r18() {
    let bad = cost_mismatches("context-2-1");
    assert!(bad.iter().all(|b| b.starts_with("R18/")), "{bad:?}");
}
