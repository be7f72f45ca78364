#![allow(dead_code)]

use proptest::prelude::*;

use cohere::diagram::{Diagram, ElementId};
use cohere::syntax::{Formula, Sequent, Signature, Sym};

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn signature() -> Signature {
    Signature::new().with("P", 0).with("A", 1).with("B", 1).with("R", 2)
}

fn var() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&VARS[..])
}

pub fn atomic() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::atom("P", &[])),
        var().prop_map(|v| Formula::atom("A", &[v])),
        var().prop_map(|v| Formula::atom("B", &[v])),
        (var(), var()).prop_map(|(a, b)| Formula::atom("R", &[a, b])),
        (var(), var()).prop_map(|(a, b)| Formula::eq(a, b)),
    ]
}

/// Formulas over [`signature`]; `first_order` admits `→` and `∀`.
pub fn formula(first_order: bool) -> impl Strategy<Value = Formula> {
    atomic().prop_recursive(3, 16, 2, move |inner| {
        let coherent = prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (var(), inner.clone()).prop_map(|(v, b)| Formula::exists(v, b)),
        ];
        if first_order {
            prop_oneof![
                3 => coherent,
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                1 => (var(), inner).prop_map(|(v, b)| Formula::forall(v, b)),
            ]
            .boxed()
        } else {
            coherent.boxed()
        }
    })
}

/// Conjunctions of atoms, without `⊥`.
pub fn horn() -> impl Strategy<Value = Formula> {
    prop::collection::vec(
        prop_oneof![
            Just(Formula::atom("P", &[])),
            var().prop_map(|v| Formula::atom("A", &[v])),
            var().prop_map(|v| Formula::atom("B", &[v])),
            (var(), var()).prop_map(|(a, b)| Formula::atom("R", &[a, b])),
        ],
        0..3,
    )
    .prop_map(Formula::conj)
}

pub fn sequent(first_order: bool) -> impl Strategy<Value = Sequent> {
    (formula(first_order), formula(first_order)).prop_map(|(a, c)| Sequent::new(a, c))
}

/// A diagram on up to `n` input elements over [`signature`], with optional equalities.
pub fn diagram(n: usize) -> impl Strategy<Value = Diagram> {
    (
        1..=n,
        prop::collection::vec((0..4usize, 0..n, 0..n), 0..8),
        prop::collection::vec((0..n, 0..n), 0..2),
    )
        .prop_map(|(size, facts, eqs)| {
            let mut d = Diagram::new();
            let els: Vec<ElementId> = (0..size).map(|i| d.add_input(&format!("a{i}"))).collect();
            for (r, i, j) in facts {
                let (i, j) = (els[i % size], els[j % size]);
                match r {
                    0 => d.add_input_fact("P", &[]),
                    1 => d.add_input_fact("A", &[i]),
                    2 => d.add_input_fact("B", &[i]),
                    _ => d.add_input_fact("R", &[i, j]),
                }
                .unwrap();
            }
            for (i, j) in eqs {
                d.add_input_fact("=", &[els[i % size], els[j % size]]).unwrap();
            }
            d
        })
}

/// Renames every bound occurrence of `from` to `to`, which must be unused.
pub fn rename_bound(f: &Formula, from: &str, to: &str) -> Formula {
    match f {
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let body = rename_bound(b, from, to);
            let (v, body) = if &**v == from {
                let map = |s: &Sym| (&**s == from).then(|| cohere::syntax::sym(to));
                (cohere::syntax::sym(to), body.rename_free(&map))
            } else {
                (v.clone(), body)
            };
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(v, Box::new(body))
            } else {
                Formula::Forall(v, Box::new(body))
            }
        }
        Formula::And(a, b) => Formula::and(rename_bound(a, from, to), rename_bound(b, from, to)),
        Formula::Or(a, b) => Formula::or(rename_bound(a, from, to), rename_bound(b, from, to)),
        Formula::Implies(a, b) => Formula::implies(rename_bound(a, from, to), rename_bound(b, from, to)),
        other => other.clone(),
    }
}
