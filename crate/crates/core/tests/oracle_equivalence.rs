mod common;

use ptlog::catalog::NAMES;

#[test]
fn decomposed_matches_naive_on_random_facts() {
    for (i, name) in NAMES.iter().enumerate() {
        let t = common::oracle::check_entry(name, 40, 7 + i as u64);
        assert!(t.mismatches.is_empty(), "{:?}", &t.mismatches[..t.mismatches.len().min(5)]);
        assert!(t.violations.is_empty(), "{:?}", &t.violations[..t.violations.len().min(5)]);
    }
}
