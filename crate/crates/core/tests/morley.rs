mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use cohere::morley::{fold_to_atom, morleyize, subformula_closure, MorleyMap, Target};
use cohere::oracle::{structures, Finite};
use cohere::syntax::{Formula, Fragment, Sequent, Sym, Theory};

fn theory(first_order: bool) -> impl Strategy<Value = Theory> {
    prop::collection::vec(common::sequent(first_order), 0..3).prop_map(|axs| {
        let mut t = Theory::new(common::signature());
        for a in axs {
            t = t.with_axiom(a);
        }
        t
    })
}

/// `f` in the canonical expansion of `m`: each `P_φ` holds of exactly the
/// tuples satisfying `φ`.
fn eval_expanded(m: &Finite, map: &MorleyMap, f: &Formula, env: &mut Vec<(Sym, usize)>) -> bool {
    match f {
        Formula::Atom(r, args) if map.entry(r).is_some() => {
            let e = map.entry(r).unwrap();
            let vals: Vec<usize> = args
                .iter()
                .map(|a| env.iter().rev().find(|(n, _)| n == a).unwrap().1)
                .collect();
            let mut inner: Vec<(Sym, usize)> = e.context.vars().iter().cloned().zip(vals).collect();
            m.eval(&e.formula, &mut inner).unwrap()
        }
        Formula::And(a, b) => eval_expanded(m, map, a, env) && eval_expanded(m, map, b, env),
        Formula::Or(a, b) => eval_expanded(m, map, a, env) || eval_expanded(m, map, b, env),
        Formula::Implies(a, b) => !eval_expanded(m, map, a, env) || eval_expanded(m, map, b, env),
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let want = matches!(f, Formula::Exists(..));
            for x in 0..m.size {
                env.push((v.clone(), x));
                let r = eval_expanded(m, map, b, env);
                env.pop();
                if r == want {
                    return want;
                }
            }
            !want
        }
        other => m.eval(other, env).unwrap(),
    }
}

fn holds_expanded(m: &Finite, map: &MorleyMap, s: &Sequent) -> bool {
    let vars = s.context.vars();
    if m.size == 0 && !vars.is_empty() {
        return true;
    }
    let mut tuple = vec![0usize; vars.len()];
    loop {
        let mut env: Vec<(Sym, usize)> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
        if eval_expanded(m, map, &s.antecedent, &mut env) && !eval_expanded(m, map, &s.consequent, &mut env) {
            return false;
        }
        let mut carry = true;
        for x in tuple.iter_mut().rev() {
            *x += 1;
            if *x < m.size {
                carry = false;
                break;
            }
            *x = 0;
        }
        if carry {
            return true;
        }
    }
}

fn shape_counts(closure: &[Formula]) -> [usize; 5] {
    // [∨, →, ∀, atomic/⊤/∧/∃, ⊥]
    let mut c = [0; 5];
    for f in closure {
        match f {
            Formula::Or(..) => c[0] += 1,
            Formula::Implies(..) => c[1] += 1,
            Formula::Forall(..) => c[2] += 1,
            Formula::False => c[4] += 1,
            _ => c[3] += 1,
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn targets_land_in_their_fragment(t in theory(true), extras in prop::collection::vec(common::formula(true), 0..2)) {
        let r = morleyize(&t, &extras, Target::Regular);
        prop_assert!(r.result.fragment().within(Fragment::Regular), "{:?}", r.result.fragment());
        let c = morleyize(&t, &extras, Target::Coherent);
        prop_assert!(c.result.fragment().within(Fragment::Coherent));
    }

    #[test]
    fn predicates_have_context_arity(t in theory(true), extras in prop::collection::vec(common::formula(true), 0..2)) {
        let m = morleyize(&t, &extras, Target::Regular);
        for f in t.axioms.iter().flat_map(|s| [&s.antecedent, &s.consequent]).chain(&extras) {
            prop_assert!(m.map.contains(f));
        }
        for e in m.map.entries() {
            prop_assert_eq!(m.result.signature.arity(&e.name), Some(e.context.len()));
            prop_assert_eq!(e.context.vars().iter().cloned().collect::<std::collections::BTreeSet<_>>(), e.formula.free_vars());
        }
    }

    #[test]
    fn extras_only_add_axioms(t in theory(true), extras in prop::collection::vec(common::formula(true), 1..3)) {
        let small = morleyize(&t, &[], Target::Coherent);
        let big = morleyize(&t, &extras, Target::Coherent);
        let have: HashSet<String> = big.result.axioms.iter().map(|s| s.to_string()).collect();
        for s in &small.result.axioms {
            prop_assert!(have.contains(&s.to_string()), "lost {}", s);
        }
    }

    #[test]
    fn axiom_count_follows_closure_shapes(t in theory(true), extras in prop::collection::vec(common::formula(true), 0..2)) {
        let closure = subformula_closure(&t, &extras);
        let [or, imp, all, plain, bot] = shape_counts(&closure);
        let m = morleyize(&t, &extras, Target::Regular);
        let implications = t
            .axioms
            .iter()
            .filter(|s| m.map.contains(&Formula::implies(s.antecedent.clone(), s.consequent.clone())))
            .count();
        let shared = t.axioms.len() + implications + 2 * or + 2 * imp + all
            + if bot > 0 { closure.len() - 1 } else { 0 } + 2 * plain;
        prop_assert_eq!(m.result.axioms.len(), shared);
        let c = morleyize(&t, &extras, Target::Coherent);
        prop_assert_eq!(c.result.axioms.len(), shared + 2 * (or + bot));
    }

    #[test]
    fn regular_formulas_fold(f in common::formula(false)) {
        prop_assume!(!f.features().or && !f.features().bottom);
        let t = Theory::new(common::signature());
        let m = morleyize(&t, std::slice::from_ref(&f), Target::Regular);
        prop_assert_eq!(fold_to_atom(&m.map, &t.signature, &f), m.map.atom(&f));
    }

    #[test]
    fn canonical_expansions_of_models_are_models(t in theory(true), extras in prop::collection::vec(common::formula(true), 0..2)) {
        let r = morleyize(&t, &extras, Target::Regular);
        let c = morleyize(&t, &extras, Target::Coherent);
        for m in structures(&t.signature, 2).unwrap() {
            if !t.axioms.iter().all(|a| m.satisfies(a).unwrap()) {
                continue;
            }
            for s in r.result.axioms.iter().chain(&c.result.axioms) {
                prop_assert!(holds_expanded(&m, &r.map, s), "{} fails in {:?}", s, m);
            }
        }
    }
}
