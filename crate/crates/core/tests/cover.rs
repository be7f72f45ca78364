mod common;

use proptest::prelude::*;

use cohere::cover::{check_certificates, prove, Verdict};
use cohere::oracle;
use cohere::syntax::{parse_sequent, parse_theory, Formula, Sequent, Theory};

/// Coherent axioms `horn ⊢ disjunction of (∃) horn or ⊥`, which keep the chase small.
fn axiom() -> impl Strategy<Value = Sequent> {
    let disjunct = prop_oneof![
        1 => Just(Formula::False),
        3 => common::horn(),
        1 => common::horn().prop_map(|h| Formula::exists("y", h)),
    ];
    (common::horn(), prop::collection::vec(disjunct, 1..3))
        .prop_map(|(a, ds)| Sequent::new(a, Formula::disj(ds)))
}

fn theory() -> impl Strategy<Value = Theory> {
    prop::collection::vec(axiom(), 0..4).prop_map(|axs| {
        let mut t = Theory::new(common::signature());
        for a in axs {
            t = t.with_axiom(a);
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn proofs_are_sound(t in theory(), s in axiom()) {
        let v = prove(&t, &s, 6).unwrap();
        if v.is_proved() {
            check_certificates(&t, &s, &v.to_json()).unwrap();
            prop_assert!(oracle::valid(&t, &s, 3).unwrap(), "proved but refuted: {}", s);
            let deeper = prove(&t, &s, 11).unwrap();
            prop_assert_eq!(deeper.to_json(), v.to_json());
        }
    }

    #[test]
    fn axioms_prove_themselves(t in theory()) {
        for a in &t.axioms {
            let v = prove(&t, a, 12).unwrap();
            prop_assert!(v.is_proved(), "{} unproved", a);
            check_certificates(&t, a, &v.to_json()).unwrap();
        }
    }
}

#[test]
fn unknown_reports_an_open_branch() {
    let t = parse_theory("rel A/0, B/0, C/0. axiom true |- A | B. axiom A |- C.").unwrap();
    let s = parse_sequent("true |- C", &t.signature).unwrap();
    let Verdict::Unknown { branch, .. } = prove(&t, &s, 8).unwrap() else { panic!() };
    let leaf = branch.diagrams.last().unwrap();
    assert!(leaf.holds("B", &[]) && !leaf.holds("C", &[]));
    assert!(!oracle::valid(&t, &s, 1).unwrap());
}
