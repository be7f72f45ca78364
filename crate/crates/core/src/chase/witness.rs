use std::collections::{BTreeMap, BTreeSet};

use super::{is_model, replay_steps, ChaseError, ChaseResult, ChaseStatus, ChaseStep, Program};
use crate::diagram::{check_homomorphism, hom_violation, inclusion_hom, present_lits, Diagram, ElementId, Homomorphism};
use crate::syntax::{sym, Formula, Lit, Sym, EQ};

/// A regular formula over input elements that the input satisfies and from
/// which the theory derives a given fact, with the derivation as chase steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Input elements named by `context`, position by position.
    pub elements: Vec<ElementId>,
    pub context: Vec<Sym>,
    pub formula: Formula,
    pub lits: Vec<Lit>,
    /// Trace step numbers, ascending.
    pub derivation: Vec<usize>,
}

/// Builds the witness from the fact's dependency cone: the conjunction of the
/// input facts it rests on, over the input elements those facts and the
/// contributing steps mention.
pub fn conservativity_witness(
    input: &Diagram,
    result: &ChaseResult,
    rel: &str,
    args: &[ElementId],
) -> Result<Witness, ChaseError> {
    let out = &result.diagram;
    if let Some(e) = args.iter().find(|e| !input.contains(**e)) {
        return Err(ChaseError::Witness(format!("{e} is not an input element")));
    }
    if !out.holds(rel, args) {
        return Err(ChaseError::Witness(format!("{rel} does not hold in the output")));
    }
    if !out.is_tracking() {
        return Err(ChaseError::Witness("dependency tracking is disabled".into()));
    }
    let deps = if rel == EQ {
        if args[0] == args[1] {
            Default::default()
        } else {
            out.class_deps(args[0])
        }
    } else {
        out.prov(rel, args).expect("fact holds").deps.clone()
    };
    let by_step: BTreeMap<usize, &ChaseStep> = result.trace.steps.iter().map(|s| (s.step, s)).collect();
    let mut elements: BTreeSet<ElementId> = args.iter().copied().collect();
    for (_, t) in &deps.inputs {
        elements.extend(t.iter().copied());
    }
    for s in &deps.steps {
        let st = by_step
            .get(s)
            .ok_or_else(|| ChaseError::Witness(format!("step {s} is not in the trace")))?;
        elements.extend(st.app.subst.iter().copied().filter(|e| input.contains(*e)));
    }
    let elements: Vec<ElementId> = elements.into_iter().collect();
    let context: Vec<Sym> = (0..elements.len()).map(|i| sym(&format!("x{i}"))).collect();
    let var = |e: &ElementId| context[elements.iter().position(|x| x == e).expect("collected")].clone();
    let lits: Vec<Lit> = deps
        .inputs
        .iter()
        .map(|(r, t)| {
            if &**r == EQ {
                Lit::Eq(var(&t[0]), var(&t[1]))
            } else {
                Lit::Rel(r.clone(), t.iter().map(var).collect())
            }
        })
        .collect();
    let formula = Formula::conj(lits.iter().map(Lit::to_formula));
    Ok(Witness {
        elements,
        context,
        formula,
        lits,
        derivation: deps.steps.iter().copied().collect(),
    })
}

/// Checks that the input satisfies the witness formula and that replaying the
/// derivation from the formula's presentation yields the fact.
pub fn check_witness(
    p: &Program,
    input: &Diagram,
    result: &ChaseResult,
    w: &Witness,
    rel: &str,
    args: &[ElementId],
) -> Result<(), ChaseError> {
    let env: Vec<(Sym, ElementId)> = w.context.iter().cloned().zip(w.elements.iter().copied()).collect();
    if !input.satisfies(&w.formula, &env, None)? {
        return Err(ChaseError::Witness("input does not satisfy the witness formula".into()));
    }
    let (presented, els) = present_lits(&w.lits, &w.context)?;
    let map: BTreeMap<ElementId, ElementId> = w.elements.iter().copied().zip(els).collect();
    let by_step: BTreeMap<usize, &ChaseStep> = result.trace.steps.iter().map(|s| (s.step, s)).collect();
    let steps = w
        .derivation
        .iter()
        .map(|s| by_step.get(s).copied().ok_or_else(|| ChaseError::Witness(format!("missing step {s}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (d, map) = replay_steps(p, presented, &steps, map)?;
    let mapped: Vec<ElementId> = args.iter().map(|e| map[e]).collect();
    if !d.holds(rel, &mapped) {
        return Err(ChaseError::Witness(format!("derivation does not produce {rel}")));
    }
    Ok(())
}

/// Extends `h: d → m` along a saturated chase of `d` into the model `m`,
/// sending each fresh element to the least witness in `m`. The triangle
/// `ĥ ∘ (d ⊆ Ch d) = h` is checked before returning.
pub fn weak_reflection_lift(
    p: &Program,
    d: &Diagram,
    result: &ChaseResult,
    h: &Homomorphism,
    m: &Diagram,
) -> Result<Homomorphism, ChaseError> {
    if result.status != ChaseStatus::Saturated {
        return Err(ChaseError::Lift("the chase did not saturate".into()));
    }
    if !is_model(p, m) {
        return Err(ChaseError::Lift("target is not a model of the theory".into()));
    }
    if let Some(why) = hom_violation(h, d, m) {
        return Err(ChaseError::Lift(format!("h is not a homomorphism: {why}")));
    }
    let mut choice: BTreeMap<ElementId, ElementId> = BTreeMap::new();
    for e in d.domain() {
        let img = h.image(e).map(|x| m.find(x)).min().expect("left-total");
        choice.insert(e, img);
    }
    for s in &result.trace.steps {
        let c = &p.axioms[s.app.axiom];
        let dj = &c.disjuncts[s.app.disjunct];
        let fixed = c
            .context
            .iter()
            .zip(&s.app.subst)
            .map(|(v, e)| {
                choice
                    .get(e)
                    .map(|x| (v.clone(), *x))
                    .ok_or_else(|| ChaseError::Lift(format!("{e} has no image")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ws = m.matches(&dj.body, &dj.vars, &fixed);
        let w = ws
            .first()
            .ok_or_else(|| ChaseError::Lift(format!("no witness in the target for step {}", s.step)))?;
        for (f, x) in s.fresh.iter().zip(w) {
            choice.insert(*f, *x);
        }
    }
    let out = &result.diagram;
    let mut pairs = BTreeSet::new();
    for e in out.domain() {
        let x = choice
            .get(&e)
            .ok_or_else(|| ChaseError::Lift(format!("{e} has no image")))?;
        for &y in m.class_of(*x) {
            pairs.insert((e, y));
        }
    }
    let lift = Homomorphism { pairs };
    if let Some(why) = hom_violation(&lift, out, m) {
        return Err(ChaseError::Lift(why));
    }
    let incl = inclusion_hom(d, out)?;
    if incl.then(&lift) != *h {
        return Err(ChaseError::Lift("triangle does not commute".into()));
    }
    debug_assert!(check_homomorphism(&lift, out, m));
    Ok(lift)
}

#[cfg(test)]
mod tests {
    use super::super::{chase_regular, Program};
    use super::*;
    use crate::syntax::parse_theory;

    fn program(src: &str) -> Program {
        Program::compile(&parse_theory(src).unwrap()).unwrap()
    }

    #[test]
    fn two_step_witness() {
        let p = program("rel A/1, R/2, B/1. axiom A(x) |- exists y. R(x,y). axiom R(x,y) |- B(x).");
        let mut d = Diagram::new();
        let a = d.add_input("a");
        d.add_input_fact("A", &[a]).unwrap();
        let r = chase_regular(&p, &d, 10).unwrap();
        let w = conservativity_witness(&d, &r, "B", &[a]).unwrap();
        assert_eq!(w.formula, Formula::atom("A", &["x0"]));
        assert_eq!(w.derivation.len(), 2);
        check_witness(&p, &d, &r, &w, "B", &[a]).unwrap();
    }

    #[test]
    fn input_fact_and_reflexivity() {
        let p = program("rel A/1.");
        let mut d = Diagram::new();
        let a = d.add_input("a");
        d.add_input_fact("A", &[a]).unwrap();
        let r = chase_regular(&p, &d, 10).unwrap();
        let w = conservativity_witness(&d, &r, "A", &[a]).unwrap();
        assert_eq!(w.formula, Formula::atom("A", &["x0"]));
        let w = conservativity_witness(&d, &r, EQ, &[a, a]).unwrap();
        assert_eq!(w.formula, Formula::True);
        assert_eq!(w.elements, vec![a]);
        check_witness(&p, &d, &r, &w, EQ, &[a, a]).unwrap();
    }

    #[test]
    fn lift_into_cycle() {
        let p = program("rel A/1, R/2. axiom A(x) |- exists y. (R(x,y) & A(y)).");
        let mut d = Diagram::new();
        let a = d.add_input("a");
        d.add_input_fact("A", &[a]).unwrap();
        // The chase does not terminate, so lift along a terminating variant instead.
        let q = program("rel A/1, R/2. axiom A(x) |- exists y. R(x,y).");
        let r = chase_regular(&q, &d, 10).unwrap();
        let mut m = Diagram::new();
        let u = ElementId::new(9, 0);
        let v = ElementId::new(9, 1);
        m.add_element(u, "u").unwrap();
        m.add_element(v, "v").unwrap();
        for (x, y) in [(u, v), (v, u)] {
            m.add_input_fact("A", &[x]).unwrap();
            m.add_input_fact("R", &[x, y]).unwrap();
        }
        assert!(is_model(&p, &m));
        let h = Homomorphism::from_pairs([(a, u)]);
        let lift = weak_reflection_lift(&q, &d, &r, &h, &m).unwrap();
        assert_eq!(lift.image(r.trace.steps[0].fresh[0]).collect::<Vec<_>>(), vec![v]);
    }

    #[test]
    fn habitative_lift() {
        let p = program("habitative.");
        let d = Diagram::new();
        let r = chase_regular(&p, &d, 10).unwrap();
        let mut m = Diagram::new();
        let u = m.add_input("u");
        let lift = weak_reflection_lift(&p, &d, &r, &Homomorphism::default(), &m).unwrap();
        assert_eq!(lift.pairs.len(), 1);
        assert_eq!(lift.pairs.iter().next().unwrap().1, u);
    }
}
