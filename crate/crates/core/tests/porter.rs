//! Stems agree with a reference implementation of the original algorithm on
//! a few thousand English words (pairs in data/porter_pairs.tsv).

use genoboost::corpus::porter_stem;

#[test]
fn matches_reference_stems() {
    let pairs = include_str!("data/porter_pairs.tsv");
    let mut mismatches = Vec::new();
    let mut total = 0;
    for line in pairs.lines() {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = porter_stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    assert!(total > 3000);
    assert!(mismatches.is_empty(), "{} of {total} differ:\n{}", mismatches.len(), mismatches.join("\n"));
}

#[test]
fn stemming_is_idempotent_on_common_stems() {
    for w in ["connect", "gener", "hope", "run", "spam"] {
        assert_eq!(porter_stem(w), w);
    }
}
