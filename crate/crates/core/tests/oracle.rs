mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use cohere::oracle::{all_diagrams, valid};
use cohere::syntax::{Signature, Theory};

/// Stirling numbers of the second kind, `s[n][j]`.
fn stirling(n: usize) -> Vec<Vec<u64>> {
    let mut s = vec![vec![0u64; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for j in 1..=i {
            s[i][j] = j as u64 * s[i - 1][j] + s[i - 1][j - 1];
        }
    }
    s
}

/// Diagrams on up to `k` elements: a partition into `j` classes, then any
/// fact set over the classes.
fn expected(sig: &Signature, k: usize) -> u64 {
    let s = stirling(k);
    (0..=k)
        .map(|n| {
            (0..=n)
                .map(|j| {
                    let bits: u32 = sig.relations().map(|(_, a)| j.pow(a as u32) as u32).sum();
                    s[n][j] << bits
                })
                .sum::<u64>()
        })
        .sum()
}

#[test]
fn diagram_counts_follow_partitions() {
    for sig in [
        Signature::new().with("A", 1),
        Signature::new().with("P", 0).with("A", 1),
        Signature::new().with("R", 2),
    ] {
        for k in 0..=3 {
            let all: Vec<String> = all_diagrams(&sig, k).unwrap().map(|d| d.summary()).collect();
            assert_eq!(all.len() as u64, expected(&sig, k), "{sig:?} at {k}");
            assert_eq!(all.iter().collect::<HashSet<_>>().len(), all.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn validity_shrinks_with_the_bound(axs in prop::collection::vec(common::sequent(false), 0..2), s in common::sequent(false)) {
        let mut t = Theory::new(common::signature());
        for a in axs {
            t = t.with_axiom(a);
        }
        if valid(&t, &s, 2).unwrap() {
            prop_assert!(valid(&t, &s, 1).unwrap());
        }
    }
}
