mod common;

use proptest::prelude::*;

use cohere::chase::{
    applications, chase_regular, check_witness, conservativity_witness, is_redundant, replay, weak_reflection_lift,
    ChaseStatus, Program,
};
use cohere::diagram::{check_homomorphism, inclusion_hom, Diagram, ElementId};
use cohere::syntax::{parse_theory, EQ};

/// Terminating regular theories over the common signature.
const THEORIES: [&str; 5] = [
    "axiom A(x) |- B(x). axiom R(x,y) & B(x) |- B(y).",
    "axiom A(x) |- exists y. (R(x,y) & B(y)). axiom B(x) & P |- A(x) & R(x,x).",
    "axiom R(x,y) & R(x,z) |- y = z. axiom A(x) |- exists y. R(x,y).",
    "axiom true |- exists x. A(x). axiom A(x) & A(y) |- R(x,y).",
    "axiom R(x,y) |- R(y,x). axiom R(x,y) & R(y,z) |- R(x,z). axiom B(x) |- exists y. (R(x,y) & A(y)).",
];

fn program(i: usize) -> Program {
    let t = parse_theory(&format!("rel P/0, A/1, B/1, R/2. {}", THEORIES[i])).unwrap();
    Program::compile(&t).unwrap()
}

fn extend(d: &Diagram, picks: &[(usize, usize)]) -> Diagram {
    let mut big = d.clone();
    let extra = big.add_input("extra");
    let els: Vec<ElementId> = big.domain().collect();
    for &(r, i) in picks {
        let e = els[i % els.len()];
        match r % 3 {
            0 => big.add_input_fact("A", &[e]),
            1 => big.add_input_fact("B", &[e]),
            _ => big.add_input_fact("R", &[e, extra]),
        }
        .unwrap();
    }
    big
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn chase_extends_and_saturates(i in 0..THEORIES.len(), d in common::diagram(3)) {
        let p = program(i);
        let r = chase_regular(&p, &d, 10_000).unwrap();
        prop_assert_eq!(r.status, ChaseStatus::Saturated);
        prop_assert!(d.is_subdiagram_of(&r.diagram));
        for app in applications(&p, &r.diagram) {
            prop_assert!(is_redundant(&p, &app, &r.diagram));
        }
    }

    #[test]
    fn traces_replay_exactly(i in 0..THEORIES.len(), d in common::diagram(3)) {
        let p = program(i);
        let r = chase_regular(&p, &d, 10_000).unwrap();
        let again = replay(&p, &d, &r.trace).unwrap();
        prop_assert_eq!(again.to_json(), r.diagram.to_json());
    }

    #[test]
    fn inclusions_lift_through_the_chase(
        i in 0..THEORIES.len(),
        d in common::diagram(3),
        picks in prop::collection::vec((0..3usize, 0..4usize), 0..4),
    ) {
        let p = program(i);
        let big = extend(&d, &picks);
        let small = chase_regular(&p, &d, 10_000).unwrap();
        let large = chase_regular(&p, &big, 10_000).unwrap();
        let h = inclusion_hom(&d, &large.diagram).unwrap();
        let lift = weak_reflection_lift(&p, &d, &small, &h, &large.diagram).unwrap();
        prop_assert!(check_homomorphism(&lift, &small.diagram, &large.diagram));
    }

    #[test]
    fn facts_over_input_elements_have_witnesses(i in 0..THEORIES.len(), d in common::diagram(3)) {
        let p = program(i);
        let r = chase_regular(&p, &d, 10_000).unwrap();
        let out = &r.diagram;
        let old = |e: ElementId| out.class_of(e).iter().copied().find(|x| d.contains(*x));
        let mut targets: Vec<(String, Vec<ElementId>)> = out
            .facts()
            .filter_map(|(rel, t, _)| t.iter().map(|&e| old(e)).collect::<Option<Vec<_>>>().map(|a| (rel.to_string(), a)))
            .collect();
        let inputs: Vec<ElementId> = d.domain().collect();
        for (k, &a) in inputs.iter().enumerate() {
            for &b in &inputs[k + 1..] {
                if out.equal(a, b) {
                    targets.push((EQ.to_string(), vec![a, b]));
                }
            }
        }
        for (rel, args) in targets {
            let w = conservativity_witness(&d, &r, &rel, &args).unwrap();
            prop_assert!(d.satisfies(&w.formula, &w.context.iter().cloned().zip(w.elements.iter().copied()).collect::<Vec<_>>(), None).unwrap());
            check_witness(&p, &d, &r, &w, &rel, &args).unwrap();
        }
    }
}

#[test]
fn fuel_exhaustion_is_a_status() {
    let t = parse_theory("rel A/1, R/2. axiom A(x) |- exists y. (R(x,y) & A(y)).").unwrap();
    let p = Program::compile(&t).unwrap();
    let mut d = Diagram::new();
    let a = d.add_input("a");
    d.add_input_fact("A", &[a]).unwrap();
    let r = chase_regular(&p, &d, 5).unwrap();
    assert_eq!(r.status, ChaseStatus::FuelExhausted);
    assert_eq!(r.diagram.len(), 6);
    assert!(chase_regular(&p, &d, 0).is_err());
}
