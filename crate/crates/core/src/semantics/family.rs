//! Exhaustive comparison of forcing with membership of Morleyized facts.

use std::collections::HashSet;

use super::{BethEngine, BethTree, Forcer, SemanticsError, Verdict};
use crate::diagram::ElementId;
use crate::syntax::{alpha_key, canonical_context, sym, Formula, Signature, Sym};

/// Formulas up to connective depth `depth` over `sig`, one per α-class.
///
/// Depth 0 holds `⊤`, `⊥` and one atom per relation on the distinct
/// variables `x, y, z, …`. Each further level adds `∧` and `∨` of unordered
/// distinct pairs, `→` of ordered distinct pairs, and `∃v`, `∀v` for each
/// such variable `v` free in the body.
pub fn formula_family(sig: &Signature, depth: usize) -> Vec<Formula> {
    let arity = sig.relations().map(|(_, a)| a).max().unwrap_or(0);
    let basis: Vec<Sym> = (0..arity)
        .map(|i| match i {
            0 => sym("x"),
            1 => sym("y"),
            2 => sym("z"),
            _ => sym(&format!("x{i}")),
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |f: Formula, out: &mut Vec<Formula>| {
        if seen.insert(alpha_key(&canonical_context(&f), &f)) {
            out.push(f);
        }
    };
    push(Formula::True, &mut out);
    push(Formula::False, &mut out);
    for (r, a) in sig.relations() {
        push(Formula::Atom(r.clone(), basis[..a].to_vec()), &mut out);
    }
    for _ in 0..depth {
        let prev = out.clone();
        for (i, a) in prev.iter().enumerate() {
            for (j, b) in prev.iter().enumerate() {
                if i < j {
                    push(Formula::and(a.clone(), b.clone()), &mut out);
                    push(Formula::or(a.clone(), b.clone()), &mut out);
                }
                if i != j {
                    push(Formula::implies(a.clone(), b.clone()), &mut out);
                }
            }
            let free = a.free_vars();
            for v in basis.iter().filter(|v| free.contains(*v)) {
                push(Formula::Exists(v.clone(), Box::new(a.clone())), &mut out);
                push(Formula::Forall(v.clone(), Box::new(a.clone())), &mut out);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub node: usize,
    pub formula: Formula,
    pub tuple: Vec<ElementId>,
    pub forced: Verdict,
    pub truth: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// Instances with a definite verdict.
    pub checked: usize,
    /// Instances the truncation left `Unknown`.
    pub skipped: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Compares `p ⊩ φ(ā)` with `P_φ(ā) ∈ D_p` (or `D_p` exploding) for every
/// node of level at most `max_level`, every `φ` in `family` and every tuple
/// of class representatives. Each `φ` must be in the engine's closure.
pub fn check_forcing_truth_equivalence(
    engine: &BethEngine,
    tree: &BethTree,
    family: &[Formula],
    max_level: usize,
) -> Result<EquivalenceReport, SemanticsError> {
    let s = &tree.structure;
    let mut forcer = Forcer::new(s);
    let mut report = EquivalenceReport::default();
    let contexts: Vec<Vec<Sym>> = family.iter().map(|f| canonical_context(f).0).collect();
    for (p, node) in s.nodes.iter().enumerate() {
        if node.level > max_level {
            continue;
        }
        let reps: Vec<ElementId> = node.diagram.reps().collect();
        for (f, vars) in family.iter().zip(&contexts) {
            let mut tuple = vec![0usize; vars.len()];
            if !vars.is_empty() && reps.is_empty() {
                continue;
            }
            loop {
                let args: Vec<ElementId> = tuple.iter().map(|&i| reps[i]).collect();
                let mut env: Vec<(Sym, ElementId)> = vars.iter().cloned().zip(args.iter().copied()).collect();
                let forced = forcer.force(p, f, &mut env)?;
                let truth = engine.truth(&node.diagram, f, &args)?;
                match (forced, truth) {
                    (Verdict::Unknown, _) => report.skipped += 1,
                    (Verdict::Forced, true) | (Verdict::NotForced, false) => report.checked += 1,
                    _ => {
                        report.checked += 1;
                        report.mismatches.push(Mismatch {
                            node: p,
                            formula: f.clone(),
                            tuple: args,
                            forced,
                            truth,
                        });
                    }
                }
                if !next_tuple(&mut tuple, reps.len()) {
                    break;
                }
            }
        }
    }
    Ok(report)
}

fn next_tuple(t: &mut [usize], base: usize) -> bool {
    for x in t.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        let sig = Signature::new().with("A", 0);
        let f0 = formula_family(&sig, 0);
        assert_eq!(f0.len(), 3);
        // Level one: three ∧, three ∨ and six → over {⊤, ⊥, A}.
        assert_eq!(formula_family(&sig, 1).len(), 3 + 12);
    }

    #[test]
    fn quantifiers_bind_free_basis_variables() {
        let sig = Signature::new().with("R", 2);
        let fam = formula_family(&sig, 1);
        assert!(fam.contains(&Formula::exists("y", Formula::atom("R", &["x", "y"]))));
        assert!(fam.iter().all(|f| f.free_vars().len() <= 2));
    }
}
