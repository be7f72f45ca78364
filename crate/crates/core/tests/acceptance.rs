//! Release acceptance: one line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cohere::chase::{check_witness, conservativity_witness, chase_regular, ChaseStatus, Program};
use cohere::cover::{self, check_certificates, prove, search, Verdict};
use cohere::diagram::{check_homomorphism, merge_along_hom, Diagram, ElementId, Homomorphism};
use cohere::morley::{morleyize, Target};
use cohere::oracle;
use cohere::semantics::{build_beth_tree, check_forcing_truth_equivalence, formula_family, BethEngine};
use cohere::syntax::{canonicalize, parse_formula_in_context, parse_sequent, parse_theory, Formula, Sequent, Theory, EQ};

type Outcome = Result<String, String>;

/// A proof found while running the criteria, kept for certificate checks and reruns.
struct Proof {
    theory: Theory,
    sequent: Sequent,
    json: String,
}

fn theory(src: &str) -> Theory {
    parse_theory(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn sequent(t: &Theory, src: &str) -> Sequent {
    parse_sequent(src, &t.signature).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn record(proofs: &mut Vec<Proof>, t: &Theory, s: &Sequent, v: &Verdict) {
    if v.is_proved() {
        proofs.push(Proof {
            theory: t.clone(),
            sequent: s.clone(),
            json: v.to_json().to_string(),
        });
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    if spent > limit {
        return Err(format!("took {spent:.2?}, limit {limit:?}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 1. Fan

const FAN: &str = "rel P/0, P0/0, P1/0, P00/0, P01/0, P10/0, P11/0, B/0.
    axiom true |- P.
    axiom P |- P0 | P1.
    axiom P0 |- P00 | P01.
    axiom P1 |- P10 | P11.
    axiom P00 |- B. axiom P01 |- B. axiom P10 |- B. axiom P11 |- B.";

const FAN_LEAVES: [&str; 4] = ["P00", "P01", "P10", "P11"];

fn fan(proofs: &mut Vec<Proof>) -> Outcome {
    let start = Instant::now();
    let t = theory(FAN);
    let s = sequent(&t, "true |- B");
    let v = prove(&t, &s, cover::DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    let Verdict::Proved(certs) = &v else {
        return Err("full fan is not proved".into());
    };
    let tree = search(&cover::compile(&t).unwrap(), canonicalize(&s).unwrap().remove(0), cover::DEFAULT_MAX_DEPTH).unwrap();
    let cert = &certs[0];
    let bar: BTreeSet<usize> = cert.bar.iter().map(|b| b.leaf).collect();
    let leaves: BTreeSet<usize> = cert.leaves().into_iter().collect();
    if bar != leaves {
        return Err(format!("bar {bar:?} differs from certificate leaves {leaves:?}"));
    }
    let mut hit = Vec::new();
    for &leaf in &leaves {
        let d = &tree.nodes[leaf].diagram;
        let on: Vec<&str> = FAN_LEAVES.iter().copied().filter(|r| d.holds(r, &[])).collect();
        if on.len() != 1 {
            return Err(format!("leaf {leaf} lies on fan nodes {on:?}"));
        }
        hit.push(on[0]);
    }
    hit.sort_unstable();
    if hit != FAN_LEAVES {
        return Err(format!("leaves map to {hit:?}"));
    }
    record(proofs, &t, &s, &v);

    let cut = theory(&FAN.replace("axiom P10 |- B.", ""));
    match prove(&cut, &s, 10).map_err(|e| e.to_string())? {
        Verdict::Unknown { depth: 10, branch } => {
            if branch.diagrams.iter().any(|d| d.holds("B", &[])) {
                return Err("open branch contains B".into());
            }
        }
        other => return Err(format!("pruned fan gave {}", other.to_json())),
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("4 bar leaves ↔ 4 fan leaves; pruned fan unknown at depth 10; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 2. Chase contract

/// A regular theory whose axioms only conclude relations of index at least
/// that of any they read, and existential ones strictly higher, so every
/// chase terminates.
fn random_regular(rng: &mut ChaCha8Rng) -> String {
    let nrel = rng.gen_range(1..=3);
    let arity: Vec<usize> = (0..nrel).map(|_| rng.gen_range(1..=2)).collect();
    let decl: Vec<String> = arity.iter().enumerate().map(|(i, a)| format!("R{i}/{a}")).collect();
    let mut src = format!("rel {}.", decl.join(", "));
    // Arguments cycle through `vars` from a random offset, repeating only when short.
    let atom = |rng: &mut ChaCha8Rng, r: usize, vars: &[&str]| {
        let k = rng.gen_range(0..vars.len());
        let args: Vec<&str> = (0..arity[r]).map(|i| vars[(k + i) % vars.len()]).collect();
        format!("R{r}({})", args.join(","))
    };
    for _ in 0..rng.gen_range(1..=4) {
        if rng.gen_bool(0.1) {
            let r = rng.gen_range(0..nrel);
            let z = vec!["z"; arity[r]].join(",");
            src.push_str(&format!(" axiom true |- exists z. R{r}({z})."));
            continue;
        }
        let pool: &[&str] = if rng.gen_bool(0.4) { &["x"] } else { &["x", "y"] };
        let low = if nrel > 1 { nrel - 1 } else { 1 };
        let n = rng.gen_range(1..=2);
        let rels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..low)).collect();
        let mut text = Vec::new();
        let mut used: Vec<&str> = Vec::new();
        for &r in &rels {
            let a = atom(rng, r, pool);
            for v in pool {
                if a.contains(v) && !used.contains(v) {
                    used.push(v);
                }
            }
            text.push(a);
        }
        let ante = text.join(" & ");
        let level = *rels.iter().max().unwrap();
        let above: Vec<usize> = (level + 1..nrel).collect();
        let cons = if !above.is_empty() && rng.gen_bool(0.5) {
            let r = *above.choose(rng).unwrap();
            let mut with_z = vec!["z"];
            with_z.extend(used.iter().copied());
            let args: Vec<&str> = (0..arity[r]).map(|i| if i == 0 { "z" } else { *with_z.choose(rng).unwrap() }).collect();
            let mut body = vec![format!("R{r}({})", args.join(","))];
            if rng.gen_bool(0.4) {
                let r2 = *above.choose(rng).unwrap();
                body.push(atom(rng, r2, &with_z));
            }
            format!("exists z. ({})", body.join(" & "))
        } else if used.len() == 2 && rng.gen_bool(0.15) {
            "x = y".to_string()
        } else {
            let r = *above.choose(rng).unwrap_or(&level);
            atom(rng, r, &used)
        };
        src.push_str(&format!(" axiom {ante} |- {cons}."));
    }
    src
}

fn random_diagram(rng: &mut ChaCha8Rng, t: &Theory) -> Diagram {
    let mut d = Diagram::new();
    let els: Vec<ElementId> = (0..rng.gen_range(1..=3)).map(|i| d.add_input(&format!("a{i}"))).collect();
    let rels: Vec<(String, usize)> = t.signature.relations().map(|(r, a)| (r.to_string(), a)).collect();
    for _ in 0..rng.gen_range(1..=6) {
        let (r, a) = rels.choose(rng).unwrap();
        let args: Vec<ElementId> = (0..*a).map(|_| *els.choose(rng).unwrap()).collect();
        d.add_input_fact(r, &args).unwrap();
    }
    if els.len() > 1 && rng.gen_bool(0.15) {
        d.add_input_fact(EQ, &[els[0], els[1]]).unwrap();
    }
    d
}

fn chase_contract() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut facts, mut steps) = (0usize, 0usize);
    for case in 0..200 {
        let src = random_regular(&mut rng);
        let t = theory(&src);
        let p = Program::compile(&t).map_err(|e| format!("{src}: {e}"))?;
        let input = random_diagram(&mut rng, &t);
        let fail = |what: String| format!("case {case} ({src}; {}): {what}", input.summary());
        let res = chase_regular(&p, &input, 10_000).map_err(|e| fail(e.to_string()))?;
        steps += res.fuel_used;
        let out = &res.diagram;
        if !input.is_subdiagram_of(out) {
            return Err(fail("input is not included in the output".into()));
        }
        if res.status != ChaseStatus::Saturated {
            return Err(fail(format!("status {}", res.status.name())));
        }
        for ax in &t.axioms {
            if !out.satisfies_sequent(ax, None).map_err(|e| fail(e.to_string()))? {
                return Err(fail(format!("output violates {ax}")));
            }
        }
        let old = |e: ElementId| out.class_of(e).iter().copied().find(|x| input.contains(*x));
        let mut targets: Vec<(String, Vec<ElementId>)> = Vec::new();
        for (r, args, _) in out.facts() {
            if let Some(a) = args.iter().map(|&e| old(e)).collect::<Option<Vec<_>>>() {
                targets.push((r.to_string(), a));
            }
        }
        let inputs: Vec<ElementId> = input.domain().collect();
        for (i, &a) in inputs.iter().enumerate() {
            for &b in &inputs[i + 1..] {
                if out.equal(a, b) {
                    targets.push((EQ.to_string(), vec![a, b]));
                }
            }
        }
        for (r, args) in &targets {
            let w = conservativity_witness(&input, &res, r, args).map_err(|e| fail(format!("{r}{args:?}: {e}")))?;
            check_witness(&p, &input, &res, &w, r, args).map_err(|e| fail(format!("{r}{args:?}: {e}")))?;
        }
        facts += targets.len();
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("200 theories, {steps} chase steps, {facts} witnesses replayed; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 3. Merge along a homomorphism

fn random_hom(rng: &mut ChaCha8Rng) -> (Homomorphism, Diagram, Diagram) {
    let rels = [("A", 1), ("B", 1), ("R", 2)];
    let mut d1 = Diagram::new();
    let n1 = rng.gen_range(1..=4);
    let t: Vec<ElementId> = (0..n1).map(|i| d1.add_input(&format!("t{i}"))).collect();
    for _ in 0..rng.gen_range(0..=5) {
        let (r, a) = rels.choose(rng).unwrap();
        let args: Vec<ElementId> = (0..*a).map(|_| *t.choose(rng).unwrap()).collect();
        d1.add_input_fact(r, &args).unwrap();
    }
    if n1 > 1 && rng.gen_bool(0.3) {
        d1.add_input_fact(EQ, &[t[0], t[1]]).unwrap();
    }
    let mut d0 = Diagram::new();
    let n0 = rng.gen_range(1..=4);
    let s: Vec<ElementId> = (0..n0)
        .map(|i| {
            let e = ElementId::new(9, i);
            d0.add_element(e, &format!("s{i}")).unwrap();
            e
        })
        .collect();
    let f: Vec<ElementId> = (0..n0).map(|_| *t.choose(rng).unwrap()).collect();
    // Pull back a random subset of facts along f.
    for (r, a) in rels {
        for _ in 0..3 {
            let idx: Vec<usize> = (0..a).map(|_| rng.gen_range(0..n0 as usize)).collect();
            let img: Vec<ElementId> = idx.iter().map(|&i| f[i]).collect();
            if d1.holds(r, &img) && rng.gen_bool(0.7) {
                let args: Vec<ElementId> = idx.iter().map(|&i| s[i]).collect();
                d0.add_input_fact(r, &args).unwrap();
            }
        }
    }
    for i in 0..n0 as usize {
        for j in i + 1..n0 as usize {
            if d1.equal(f[i], f[j]) && rng.gen_bool(0.3) {
                d0.add_input_fact(EQ, &[s[i], s[j]]).unwrap();
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, &x) in s.iter().enumerate() {
        for &y in d1.class_of(f[i]) {
            pairs.push((x, y));
        }
    }
    let mut h = Homomorphism::from_pairs(pairs);
    // Close under d0's own equalities so condition (1) is met.
    let mut closed = BTreeSet::new();
    for &(x, y) in &h.pairs {
        for &x2 in d0.class_of(x) {
            closed.insert((x2, y));
        }
    }
    h.pairs = closed;
    (h, d0, d1)
}

fn merges() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut generated = 0;
    for case in 0..100 {
        let (h, d0, d1) = random_hom(&mut rng);
        if !check_homomorphism(&h, &d0, &d1) {
            return Err(format!("case {case}: generator produced a non-homomorphism"));
        }
        generated += 1;
        let m = merge_along_hom(&h, &d0, &d1).map_err(|e| format!("case {case}: {e}"))?;
        let d2 = &m.diagram;
        for (name, f, src, dst) in [("a", &m.a, &d0, d2), ("i", &m.i, &d1, d2), ("r", &m.r, d2, &d1)] {
            if !check_homomorphism(f, src, dst) {
                return Err(format!("case {case}: {name} is not a homomorphism"));
            }
        }
        if m.i.then(&m.r) != Homomorphism::identity(&d1) {
            return Err(format!("case {case}: r ∘ i ≠ id"));
        }
        let ih = h.then(&m.i);
        if !ih.pairs.is_subset(&m.a.pairs) || !m.a.pairs.is_subset(&ih.pairs) {
            return Err(format!("case {case}: triangle does not commute"));
        }
    }
    Ok(format!("{generated} homomorphisms merged"))
}

// ---------------------------------------------------------------------------
// 4. Oracle cross-check

/// Hand-derivable (theory, goal) pairs.
const DERIVABLE: [(&str, &str); 20] = [
    ("rel A/1, B/1. axiom A(x) |- B(x).", "A(x) |- B(x)"),
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x). axiom B(x) |- C(x).", "A(x) |- C(x)"),
    ("rel A/0, B/0, C/0. axiom true |- A | B. axiom A |- C. axiom B |- C.", "true |- C"),
    ("rel A/1, B/1, R/2. axiom A(x) |- exists y. R(x,y). axiom R(x,y) |- B(y).", "A(x) |- exists y. B(y)"),
    ("rel A/0, B/0. axiom A |- false.", "A |- B"),
    ("rel R/2. axiom R(x,y) & R(y,z) |- R(x,z).", "R(x,y) & R(y,z) & R(z,w) |- R(x,w)"),
    ("rel A/1, R/2. axiom R(x,y) & R(x,z) |- y = z.", "R(x,y) & R(x,z) & A(y) |- A(z)"),
    ("rel A/0, B/0, C/0, D/0. axiom true |- A | B. axiom A |- C. axiom B |- D.", "true |- C | D"),
    (FAN, "true |- B"),
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x) | C(x). axiom B(x) |- false.", "A(x) |- C(x)"),
    ("rel A/1, B/1. axiom true |- exists x. A(x). axiom A(x) |- B(x).", "true |- exists x. (A(x) & B(x))"),
    ("rel A/1, B/1.", "A(x) & B(x) |- A(x)"),
    ("rel A/1, B/1.", "A(x) |- A(x) | B(x)"),
    ("rel A/0, B/0. axiom true |- A | B. axiom A |- false. axiom B |- false.", "true |- false"),
    ("rel A/1, R/2. axiom A(x) |- exists y. R(x,y). axiom R(x,y) |- A(y).", "A(x) |- exists y. exists z. (R(x,y) & R(y,z))"),
    ("rel A/1.", "x = y |- y = x"),
    ("rel A/1, R/2. axiom R(x,y) & A(x) |- A(y).", "R(x,y) & R(y,z) & A(x) |- A(z)"),
    ("rel A/0, B/0, C/0, D/0. axiom true |- A | B. axiom A |- C | D. axiom B |- D.", "true |- C | D"),
    ("rel A/1, B/1, C/1, D/1. axiom A(x) |- B(x) | C(x). axiom B(x) |- D(x). axiom C(x) |- D(x).", "A(x) |- D(x)"),
    ("rel A/1, B/1, R/2. axiom A(x) & B(x) |- false.", "A(x) & B(x) |- exists y. R(x,y)"),
];

fn random_coherent(rng: &mut ChaCha8Rng) -> (String, String) {
    const ATOMS: [&str; 7] = ["A(x)", "B(x)", "C(x)", "A(y)", "B(y)", "R(x,y)", "R(y,x)"];
    let horn = |rng: &mut ChaCha8Rng, n: usize| -> String {
        let parts: Vec<&str> = (0..n).map(|_| *ATOMS.choose(rng).unwrap()).collect();
        parts.join(" & ")
    };
    let disjunct = |rng: &mut ChaCha8Rng| -> String {
        match rng.gen_range(0..6) {
            0 => "false".into(),
            1 => format!("exists y. ({})", horn(rng, 1)),
            _ => horn(rng, 1),
        }
    };
    let side = |rng: &mut ChaCha8Rng| -> String {
        let n = rng.gen_range(1..=2);
        let ds: Vec<String> = (0..n).map(|_| disjunct(rng)).collect();
        ds.join(" | ")
    };
    let mut src = "rel A/1, B/1, C/1, R/2.".to_string();
    for _ in 0..rng.gen_range(1..=3) {
        let n = rng.gen_range(1..=2);
        let ante = horn(rng, n);
        src.push_str(&format!(" axiom {ante} |- {}.", side(rng)));
    }
    let n = rng.gen_range(1..=2);
    let ante = horn(rng, n);
    (src, format!("{ante} |- {}", side(rng)))
}

fn oracle_crosscheck(proofs: &mut Vec<Proof>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut corpus: Vec<(String, String)> = DERIVABLE.iter().map(|(t, s)| (t.to_string(), s.to_string())).collect();
    while corpus.len() < 50 {
        corpus.push(random_coherent(&mut rng));
    }
    let (mut proved, mut refuted) = (0, 0);
    for (i, (src, goal)) in corpus.iter().enumerate() {
        let t = theory(src);
        let s = sequent(&t, goal);
        let v = prove(&t, &s, 8).map_err(|e| format!("{goal}: {e}"))?;
        if i < DERIVABLE.len() && !v.is_proved() {
            return Err(format!("derivable `{goal}` over `{src}` is not proved within depth 8"));
        }
        if let Some((m, tuple)) = oracle::refute(&t, &s, 3).map_err(|e| format!("{goal}: {e}"))? {
            refuted += 1;
            if v.is_proved() {
                return Err(format!("`{goal}` over `{src}` proved but refuted on {} elements at {tuple:?}", m.size));
            }
        }
        if v.is_proved() {
            proved += 1;
            record(proofs, &t, &s, &v);
        }
    }
    Ok(format!("50 pairs: {proved} proved, {refuted} refuted at k=3, none both; 20/20 derivable proved at depth 8"))
}

// ---------------------------------------------------------------------------
// 5. Disjunction property

const DISJUNCTIONS: [(&str, &str, &str, &str); 10] = [
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x).", "A(x)", "B(x)", "C(x)"),
    ("rel A/1, B/1. axiom true |- exists x. A(x).", "true", "exists x. A(x)", "exists x. B(x)"),
    ("rel A/0, B/0, C/0. axiom A |- false.", "A", "B", "C"),
    ("rel A/1, R/2. axiom R(x,y) & R(y,z) |- R(x,z).", "R(x,y) & R(y,z)", "R(x,z)", "A(x)"),
    ("rel A/1, B/1, C/1, R/2. axiom A(x) |- exists y. R(x,y). axiom R(x,y) |- B(y).", "A(x)", "exists y. B(y)", "C(x)"),
    ("rel A/1, R/2. axiom R(x,y) & R(x,z) |- y = z.", "R(x,y) & R(x,z)", "y = z", "A(y)"),
    ("rel A/1, B/1.", "A(x) & B(x)", "B(x)", "A(x)"),
    ("rel A/0, B/0, C/0, D/0. axiom A |- B. axiom B |- C.", "A", "D", "C"),
    ("rel A/0. habitative.", "true", "exists x. x = x", "A"),
    ("rel R/2. axiom R(x,y) |- R(y,x).", "R(x,y)", "R(y,x)", "R(x,x)"),
];

fn disjunction_property(proofs: &mut Vec<Proof>) -> Outcome {
    for (src, ante, left, right) in DISJUNCTIONS {
        let t = theory(src);
        let whole = sequent(&t, &format!("{ante} |- ({left}) | ({right})"));
        let v = prove(&t, &whole, 12).map_err(|e| e.to_string())?;
        if !v.is_proved() {
            return Err(format!("`{whole}` is not proved"));
        }
        record(proofs, &t, &whole, &v);
        let mut one = false;
        for side in [left, right] {
            let s = Sequent::with_context(
                sequent(&t, &format!("{ante} |- {side}")).antecedent,
                parse_formula_in_context(side, &t.signature).unwrap().1,
                whole.context.clone(),
            );
            let v = prove(&t, &s, 12).map_err(|e| e.to_string())?;
            if v.is_proved() {
                record(proofs, &t, &s, &v);
                one = true;
                break;
            }
        }
        if !one {
            return Err(format!("neither disjunct of `{whole}` is proved within depth 12"));
        }
    }
    Ok("10/10 theories prove a disjunct at depth 12".into())
}

// ---------------------------------------------------------------------------
// 6. Truncated forcing/truth equivalence

const EQUIVALENCE_FUEL: usize = 100_000;

fn equivalence() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (src, seeded) in [
        ("rel A/0, B/0. axiom true |- A | B. habitative.", false),
        ("rel B/1, Bb/1, R/2. axiom B(x) & Bb(x) |- false. axiom B(x) |- exists y. R(x,y). habitative.", true),
    ] {
        let t = theory(src);
        let family = formula_family(&t.signature, 2);
        let mut e = BethEngine::new(&t, &family).map_err(|e| e.to_string())?;
        e.fuel = EQUIVALENCE_FUEL;
        let root = if seeded {
            let d = e.close_empty().map_err(|e| e.to_string())?;
            let star = d.reps().next().ok_or("no habitative element")?;
            let b = Formula::or(Formula::atom("B", &["x"]), Formula::atom("Bb", &["x"]));
            e.assume(&d, &b, &[star]).map_err(|e| e.to_string())?
        } else {
            Diagram::untracked()
        };
        let tree = build_beth_tree(&e, &root, 6).map_err(|e| e.to_string())?;
        tree.structure.check_tree_axioms()?;
        let r = check_forcing_truth_equivalence(&e, &tree, &family, 3).map_err(|e| e.to_string())?;
        if let Some(m) = r.mismatches.first() {
            return Err(format!(
                "{} mismatches; first at node {}: {} on {:?} forced={} truth={}",
                r.mismatches.len(),
                m.node,
                m.formula,
                m.tuple,
                m.forced,
                m.truth
            ));
        }
        if tree.unsaturated > 0 {
            return Err(format!("{} node closures ran out of fuel", tree.unsaturated));
        }
        lines.push(format!("{} formulas: {} checked, {} skipped", family.len(), r.checked, r.skipped));
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{}; {:.2?}", lines.join("; "), start.elapsed()))
}

// ---------------------------------------------------------------------------
// 7. Morleyization transfer

const TRANSFERS: [(&str, &str, &str); 20] = [
    ("rel A/1, B/1. axiom A(x) |- B(x).", "A(x)", "B(x)"),
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x). axiom B(x) |- C(x).", "A(x)", "C(x)"),
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x).", "A(x)", "B(x) | C(x)"),
    ("rel A/1, B/1.", "A(x) & B(x)", "A(x)"),
    ("rel A/1, B/1.", "A(x) & (A(x) -> B(x))", "B(x)"),
    ("rel A/1, B/1. axiom A(x) |- B(x).", "true", "A(x) -> B(x)"),
    ("rel R/2.", "forall y. R(x,y)", "R(x,x)"),
    ("rel R/2.", "forall y. R(x,y)", "exists y. R(x,y)"),
    ("rel A/1, R/2. axiom A(x) |- exists y. R(x,y).", "A(x)", "exists y. R(x,y)"),
    ("rel A/1, B/1, R/2. axiom A(x) |- exists y. R(x,y). axiom R(x,y) |- B(y).", "A(x)", "exists y. B(y)"),
    ("rel A/0, B/0. axiom true |- A | B.", "true", "A | B"),
    ("rel A/1, B/1. axiom A(x) |- false.", "A(x)", "B(x)"),
    ("rel A/1, B/1.", "B(x)", "A(x) -> B(x)"),
    ("rel A/1, B/1, C/1, D/1. axiom A(x) & B(x) |- C(x).", "A(x) & B(x)", "C(x) | D(x)"),
    ("rel A/1, B/1, C/1.", "(A(x) | B(x)) & C(x)", "C(x)"),
    ("rel A/1, B/1, C/1. axiom A(x) |- B(x) -> C(x).", "A(x) & B(x)", "C(x)"),
    ("rel A/1. axiom true |- forall x. A(x).", "true", "A(x)"),
    ("rel R/2. axiom R(x,y) |- R(y,x).", "R(x,y)", "exists z. R(y,z)"),
    ("rel A/1, R/2. axiom A(x) |- forall y. R(x,y).", "A(x)", "R(x,x)"),
    ("rel A/1.", "x = y & A(x)", "A(y)"),
];

fn transfer(proofs: &mut Vec<Proof>) -> Outcome {
    for (src, ante, cons) in TRANSFERS {
        let t = theory(src);
        let s = sequent(&t, &format!("{ante} |- {cons}"));
        let m = morleyize(&t, &[s.antecedent.clone(), s.consequent.clone()], Target::Regular);
        let ms = m.translate(&s).ok_or_else(|| format!("`{s}` is outside the closure"))?;
        let v = prove(&m.result, &ms, 12).map_err(|e| format!("{s}: {e}"))?;
        if !v.is_proved() {
            return Err(format!("`{ms}` (for `{s}`) is not proved within depth 12"));
        }
        record(proofs, &m.result, &ms, &v);
    }
    Ok("20/20 Morleyized sequents proved at depth 12".into())
}

// ---------------------------------------------------------------------------
// 8. Certificates and reruns

fn replay(proofs: &[Proof]) -> Outcome {
    for p in proofs {
        let json: serde_json::Value = serde_json::from_str(&p.json).unwrap();
        check_certificates(&p.theory, &p.sequent, &json).map_err(|e| format!("`{}`: {e}", p.sequent))?;
        let again = prove(&p.theory, &p.sequent, 12).map_err(|e| e.to_string())?;
        if again.to_json() != json {
            return Err(format!("`{}` reran differently", p.sequent));
        }
    }
    Ok(format!("{} certificates checked; reruns byte-identical", proofs.len()))
}

fn main() {
    let mut proofs = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, r: Outcome| {
        match &r {
            Ok(detail) => println!("criterion {n} {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} {name}: FAIL ({why})");
            }
        }
    };
    report(1, "fan", fan(&mut proofs));
    report(2, "chase contract", chase_contract());
    report(3, "merge along homomorphism", merges());
    report(4, "oracle cross-check", oracle_crosscheck(&mut proofs));
    report(5, "disjunction property", disjunction_property(&mut proofs));
    report(6, "truncated forcing equivalence", equivalence());
    report(7, "Morleyization transfer", transfer(&mut proofs));
    report(8, "determinism and replay", replay(&proofs));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
