mod common;

use common::golden::decomposition_mismatches;

#[test]
fn andersen_matches_reference() {
    assert_eq!(decomposition_mismatches("andersen-oo"), Vec::<String>::new());
}

#[test]
fn interprocedural_matches_reference() {
    assert_eq!(decomposition_mismatches("interprocedural"), Vec::<String>::new());
}

#[test]
fn arrays_matches_reference() {
    assert_eq!(decomposition_mismatches("arrays"), Vec::<String>::new());
}

#[test]
fn exceptions_matches_reference() {
    assert_eq!(decomposition_mismatches("exceptions"), Vec::<String>::new());
}

#[test]
fn context_matches_reference_except_r18() {
    let failed = decomposition_mismatches("context-2-1");
    assert!(!failed.is_empty() && failed.iter().all(|f| f.starts_with("R18/")), "{failed:?}");
}
