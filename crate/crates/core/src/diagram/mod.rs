//! Diagrams `(D, F)`: a finite domain and a set of atomic facts in which `=`
//! is read as a congruence.
//!
//! Facts are stored over union-find representatives (the least element of each
//! class), so congruence closure holds by construction. Reflexive, symmetric and
//! transitive `=`-facts are implicit in the class partition.

mod hom;
mod json;
mod quotient;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::syntax::{canonicalize, sym, Formula, Lit, Sequent, Sym, EQ};

pub use hom::{check_homomorphism, hom_violation, inclusion_hom, merge_along_hom, rename_apart, Homomorphism, Merge};
pub use quotient::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId {
    pub gen: u32,
    pub serial: u32,
}

impl ElementId {
    pub fn new(gen: u32, serial: u32) -> Self {
        ElementId { gen, serial }
    }

    /// Parses the `e{gen}_{serial}` form produced by `Display`.
    pub fn parse(s: &str) -> Option<Self> {
        let rest = s.strip_prefix('e')?;
        let (g, n) = rest.split_once('_')?;
        Some(ElementId::new(g.parse().ok()?, n.parse().ok()?))
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}_{}", self.gen, self.serial)
    }
}

/// A ground atomic fact in its original (unnormalized) element tuple.
pub type FactKey = (Sym, Vec<ElementId>);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Deps {
    pub inputs: BTreeSet<FactKey>,
    pub steps: BTreeSet<usize>,
}

impl Deps {
    pub fn join(a: &Arc<Deps>, b: &Arc<Deps>) -> Arc<Deps> {
        if Arc::ptr_eq(a, b) || b.is_empty() {
            return a.clone();
        }
        if a.is_empty() {
            return b.clone();
        }
        let mut d = (**a).clone();
        d.inputs.extend(b.inputs.iter().cloned());
        d.steps.extend(b.steps.iter().copied());
        Arc::new(d)
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.steps.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Input,
    Reflexive,
    Axiom { step: usize, axiom: usize },
    Congruence,
    Presented,
    Cover,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Input => f.write_str("input"),
            Origin::Reflexive => f.write_str("reflexive"),
            Origin::Axiom { step, axiom } => write!(f, "axiom:{axiom}@{step}"),
            Origin::Congruence => f.write_str("congruence"),
            Origin::Presented => f.write_str("presented"),
            Origin::Cover => f.write_str("cover"),
        }
    }
}

/// How a fact entered the diagram. `deps` is the cone of input facts and chase
/// steps it rests on; it is empty when tracking is disabled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prov {
    pub origin: Origin,
    pub deps: Arc<Deps>,
}

impl Prov {
    pub fn new(origin: Origin) -> Self {
        Prov {
            origin,
            deps: Arc::default(),
        }
    }

    pub fn input(key: FactKey) -> Self {
        let mut deps = Deps::default();
        deps.inputs.insert(key);
        Prov {
            origin: Origin::Input,
            deps: Arc::new(deps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("element {0} is not in the domain")]
    UnknownElement(ElementId),
    #[error("element {0} already exists")]
    DuplicateElement(ElementId),
    #[error("relation `{rel}` used with {used} arguments but expected {expected}")]
    Arity { rel: String, expected: usize, used: usize },
    #[error("formula is not Horn: {0}")]
    NotHorn(String),
    #[error("formula is not positive-coherent: {0}")]
    NotPositive(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("not an inclusion: {0}")]
    NotInclusion(String),
    #[error("domains are not disjoint: {0} occurs in both")]
    NotDisjoint(ElementId),
    #[error("invalid homomorphism: {0}")]
    InvalidHom(String),
    #[error("merge postcondition failed: {0}")]
    MergeFailed(String),
    #[error("malformed diagram JSON: {0}")]
    Json(String),
}

#[derive(Clone, Debug, Default)]
pub struct Diagram {
    names: BTreeMap<ElementId, String>,
    rep: BTreeMap<ElementId, ElementId>,
    classes: BTreeMap<ElementId, BTreeSet<ElementId>>,
    class_deps: BTreeMap<ElementId, Arc<Deps>>,
    elem_deps: BTreeMap<ElementId, Arc<Deps>>,
    rels: BTreeMap<Sym, BTreeMap<Vec<ElementId>, Prov>>,
    next_gen: u32,
    untracked: bool,
}

impl PartialEq for Diagram {
    /// Equal domains, names, partitions and stored facts; provenance is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.classes == other.classes
            && self.rels.len() == other.rels.len()
            && self.rels.iter().zip(other.rels.iter()).all(|((r1, f1), (r2, f2))| {
                r1 == r2 && f1.len() == f2.len() && f1.keys().eq(f2.keys())
            })
    }
}

impl Diagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// A diagram that records no dependency cones. Facts still carry origins.
    pub fn untracked() -> Self {
        Diagram {
            untracked: true,
            ..Self::default()
        }
    }

    pub fn is_tracking(&self) -> bool {
        !self.untracked
    }

    pub fn set_tracking(&mut self, on: bool) {
        self.untracked = !on;
    }

    /// Adds an element with an explicit id. Fresh generations stay above it.
    pub fn add_element(&mut self, id: ElementId, name: &str) -> Result<(), DiagramError> {
        if self.names.contains_key(&id) {
            return Err(DiagramError::DuplicateElement(id));
        }
        self.names.insert(id, name.to_string());
        self.rep.insert(id, id);
        self.classes.insert(id, BTreeSet::from([id]));
        self.next_gen = self.next_gen.max(id.gen + 1);
        Ok(())
    }

    /// Adds an input element at generation 0 with the next free serial.
    pub fn add_input(&mut self, name: &str) -> ElementId {
        let serial = self
            .names
            .keys()
            .filter(|e| e.gen == 0)
            .map(|e| e.serial + 1)
            .max()
            .unwrap_or(0);
        let id = ElementId::new(0, serial);
        self.add_element(id, name).expect("fresh serial");
        id
    }

    /// Reserves a generation number for one batch of fresh elements.
    pub fn begin_generation(&mut self) -> u32 {
        let g = self.next_gen.max(1);
        self.next_gen = g + 1;
        g
    }

    pub fn next_generation(&self) -> u32 {
        self.next_gen.max(1)
    }

    /// Adds `names.len()` fresh elements in a new generation.
    pub fn fresh_elements(&mut self, names: &[String], deps: Arc<Deps>) -> Vec<ElementId> {
        let g = self.begin_generation();
        names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let id = ElementId::new(g, i as u32);
                self.add_element(id, n).expect("fresh generation");
                if !self.untracked && !deps.is_empty() {
                    self.elem_deps.insert(id, deps.clone());
                }
                id
            })
            .collect()
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.names.contains_key(&e)
    }

    /// Elements in creation order.
    pub fn domain(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.names.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: ElementId) -> Option<&str> {
        self.names.get(&e).map(String::as_str)
    }

    pub fn find(&self, e: ElementId) -> ElementId {
        self.rep.get(&e).copied().unwrap_or(e)
    }

    pub fn equal(&self, a: ElementId, b: ElementId) -> bool {
        self.contains(a) && self.contains(b) && self.find(a) == self.find(b)
    }

    /// Class representatives in creation order.
    pub fn reps(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.classes.keys().copied()
    }

    pub fn class_of(&self, e: ElementId) -> &BTreeSet<ElementId> {
        &self.classes[&self.find(e)]
    }

    pub fn classes(&self) -> impl Iterator<Item = &BTreeSet<ElementId>> + '_ {
        self.classes.values()
    }

    /// Dependencies of the equalities that formed `e`'s class.
    pub fn class_deps(&self, e: ElementId) -> Arc<Deps> {
        self.class_deps.get(&self.find(e)).cloned().unwrap_or_default()
    }

    /// Dependencies of the step that created `e`, if any.
    pub fn element_deps(&self, e: ElementId) -> Arc<Deps> {
        self.elem_deps.get(&e).cloned().unwrap_or_default()
    }

    pub fn relations(&self) -> impl Iterator<Item = &Sym> + '_ {
        self.rels.iter().filter(|(_, f)| !f.is_empty()).map(|(r, _)| r)
    }

    /// Stored facts of one relation, keyed by representative tuples.
    pub fn facts_of(&self, rel: &str) -> impl Iterator<Item = (&Vec<ElementId>, &Prov)> + '_ {
        self.rels.get(rel).into_iter().flat_map(|m| m.iter())
    }

    /// All stored relational facts, excluding `=`.
    pub fn facts(&self) -> impl Iterator<Item = (&Sym, &Vec<ElementId>, &Prov)> + '_ {
        self.rels
            .iter()
            .flat_map(|(r, m)| m.iter().map(move |(t, p)| (r, t, p)))
    }

    pub fn fact_count(&self) -> usize {
        self.rels.values().map(BTreeMap::len).sum()
    }

    pub fn prov(&self, rel: &str, args: &[ElementId]) -> Option<&Prov> {
        if rel == EQ {
            return None;
        }
        let key: Vec<ElementId> = args.iter().map(|&a| self.find(a)).collect();
        self.rels.get(rel)?.get(&key)
    }

    /// Membership up to congruence; `=` is the class partition.
    pub fn holds(&self, rel: &str, args: &[ElementId]) -> bool {
        if args.iter().any(|a| !self.contains(*a)) {
            return false;
        }
        if rel == EQ {
            return args.len() == 2 && self.find(args[0]) == self.find(args[1]);
        }
        let key: Vec<ElementId> = args.iter().map(|&a| self.find(a)).collect();
        self.rels.get(rel).is_some_and(|m| m.contains_key(&key))
    }

    pub fn has_relation(&self, rel: &str) -> bool {
        self.rels.get(rel).is_some_and(|m| !m.is_empty())
    }

    /// Inserts a fact; `=` facts merge classes. Returns whether anything changed.
    pub fn add_fact(&mut self, rel: &str, args: &[ElementId], prov: Prov) -> Result<bool, DiagramError> {
        for a in args {
            if !self.contains(*a) {
                return Err(DiagramError::UnknownElement(*a));
            }
        }
        if rel == EQ {
            if args.len() != 2 {
                return Err(DiagramError::Arity {
                    rel: EQ.into(),
                    expected: 2,
                    used: args.len(),
                });
            }
            return Ok(self.union(args[0], args[1], prov));
        }
        if let Some((t, _)) = self.rels.get(rel).and_then(|m| m.iter().next()) {
            if t.len() != args.len() {
                return Err(DiagramError::Arity {
                    rel: rel.into(),
                    expected: t.len(),
                    used: args.len(),
                });
            }
        }
        let key: Vec<ElementId> = args.iter().map(|&a| self.find(a)).collect();
        let prov = if self.untracked {
            Prov::new(prov.origin)
        } else {
            prov
        };
        let facts = self.rels.entry(sym(rel)).or_default();
        if facts.contains_key(&key) {
            return Ok(false);
        }
        facts.insert(key, prov);
        Ok(true)
    }

    /// Adds an input fact whose dependency cone is itself.
    pub fn add_input_fact(&mut self, rel: &str, args: &[ElementId]) -> Result<bool, DiagramError> {
        let prov = Prov::input((sym(rel), args.to_vec()));
        self.add_fact(rel, args, prov)
    }

    /// Merges the classes of `a` and `b`, renormalizing stored facts.
    pub fn union(&mut self, a: ElementId, b: ElementId, prov: Prov) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        let deps = if self.untracked {
            Arc::default()
        } else {
            let d = Deps::join(&self.class_deps(keep), &self.class_deps(gone));
            Deps::join(&d, &prov.deps)
        };
        let moved = self.classes.remove(&gone).expect("class of representative");
        for m in &moved {
            self.rep.insert(*m, keep);
        }
        self.classes.get_mut(&keep).expect("class").extend(moved);
        self.class_deps.remove(&gone);
        if !deps.is_empty() {
            self.class_deps.insert(keep, deps.clone());
        }
        for facts in self.rels.values_mut() {
            let stale: Vec<Vec<ElementId>> = facts.keys().filter(|t| t.contains(&gone)).cloned().collect();
            for t in stale {
                let p = facts.remove(&t).expect("stale fact");
                let nt: Vec<ElementId> = t.iter().map(|&e| if e == gone { keep } else { e }).collect();
                facts.entry(nt).or_insert_with(|| Prov {
                    origin: Origin::Congruence,
                    deps: Deps::join(&p.deps, &deps),
                });
            }
        }
        true
    }

    /// Adds the instances of `lits` under `env`; returns the facts that were new.
    pub fn add_lits(
        &mut self,
        lits: &[Lit],
        env: &[(Sym, ElementId)],
        prov: &Prov,
    ) -> Result<Vec<FactKey>, DiagramError> {
        let mut added = Vec::new();
        for l in lits {
            let args = instantiate(l, env)?;
            if self.add_fact(l.rel(), &args, prov.clone())? {
                added.push((sym(l.rel()), args));
            }
        }
        Ok(added)
    }

    /// Every assignment of `vars` satisfying the conjunction `lits`, with the
    /// bindings in `fixed` imposed. Values are representatives; the result is
    /// duplicate-free and sorted lexicographically in creation order.
    pub fn matches(&self, lits: &[Lit], vars: &[Sym], fixed: &[(Sym, ElementId)]) -> Vec<Vec<ElementId>> {
        let mut out = BTreeSet::new();
        self.for_each_match(lits, vars, fixed, &mut |t| {
            out.insert(t.to_vec());
            true
        });
        out.into_iter().collect()
    }

    /// Whether some assignment extending `fixed` satisfies `lits`.
    pub fn has_match(&self, lits: &[Lit], fixed: &[(Sym, ElementId)]) -> bool {
        self.has_witness(lits, &[], fixed)
    }

    /// Whether some assignment of `vars` extending `fixed` satisfies `lits`;
    /// `vars` not occurring in `lits` still need an element each.
    pub fn has_witness(&self, lits: &[Lit], vars: &[Sym], fixed: &[(Sym, ElementId)]) -> bool {
        let mut found = false;
        self.for_each_match(lits, vars, fixed, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Calls `f` on each match (possibly with repeats); stops when `f` returns false.
    pub fn for_each_match(
        &self,
        lits: &[Lit],
        vars: &[Sym],
        fixed: &[(Sym, ElementId)],
        f: &mut dyn FnMut(&[ElementId]) -> bool,
    ) {
        let mut names: Vec<Sym> = Vec::new();
        let slot = |v: &Sym, names: &mut Vec<Sym>| -> usize {
            names.iter().position(|n| n == v).unwrap_or_else(|| {
                names.push(v.clone());
                names.len() - 1
            })
        };
        let mut env: Vec<Option<ElementId>> = Vec::new();
        for (v, e) in fixed {
            let i = slot(v, &mut names);
            env.resize(names.len(), None);
            if !self.contains(*e) {
                return;
            }
            env[i] = Some(self.find(*e));
        }
        let mut compiled: Vec<CLit> = lits
            .iter()
            .map(|l| match l {
                Lit::Rel(r, args) => CLit::Rel(r.clone(), args.iter().map(|a| slot(a, &mut names)).collect()),
                Lit::Eq(a, b) => CLit::Eq(slot(a, &mut names), slot(b, &mut names)),
            })
            .collect();
        let out_slots: Vec<usize> = vars.iter().map(|v| slot(v, &mut names)).collect();
        env.resize(names.len(), None);

        let mut bound: Vec<bool> = env.iter().map(Option::is_some).collect();
        let mut order = Vec::with_capacity(compiled.len());
        while !compiled.is_empty() {
            let best = (0..compiled.len())
                .max_by_key(|&i| {
                    let s = compiled[i].slots();
                    let b = s.iter().filter(|&&x| bound[x]).count();
                    (b * 4 + usize::from(b == s.len()) * 100, usize::MAX - i)
                })
                .expect("nonempty");
            let l = compiled.remove(best);
            for s in l.slots() {
                bound[s] = true;
            }
            order.push(l);
        }
        let free_tail: Vec<usize> = out_slots.iter().copied().filter(|&s| !bound[s]).fold(Vec::new(), |mut acc, s| {
            if !acc.contains(&s) {
                acc.push(s);
            }
            acc
        });
        let reps: Vec<ElementId> = self.reps().collect();
        let mut stop = false;
        self.search(&order, 0, &mut env, &free_tail, &reps, &out_slots, f, &mut stop);
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        lits: &[CLit],
        at: usize,
        env: &mut Vec<Option<ElementId>>,
        tail: &[usize],
        reps: &[ElementId],
        out: &[usize],
        f: &mut dyn FnMut(&[ElementId]) -> bool,
        stop: &mut bool,
    ) {
        if *stop {
            return;
        }
        if at == lits.len() {
            if let Some((&s, rest)) = tail.split_first() {
                for &e in reps {
                    env[s] = Some(e);
                    self.search(lits, at, env, rest, reps, out, f, stop);
                    if *stop {
                        break;
                    }
                }
                env[s] = None;
                return;
            }
            let tuple: Vec<ElementId> = out.iter().map(|&s| env[s].expect("bound")).collect();
            if !f(&tuple) {
                *stop = true;
            }
            return;
        }
        match &lits[at] {
            CLit::Eq(a, b) => match (env[*a], env[*b]) {
                (Some(x), Some(y)) => {
                    if x == y {
                        self.search(lits, at + 1, env, tail, reps, out, f, stop);
                    }
                }
                (Some(x), None) => {
                    env[*b] = Some(x);
                    self.search(lits, at + 1, env, tail, reps, out, f, stop);
                    env[*b] = None;
                }
                (None, Some(y)) => {
                    env[*a] = Some(y);
                    self.search(lits, at + 1, env, tail, reps, out, f, stop);
                    env[*a] = None;
                }
                (None, None) => {
                    for &e in reps {
                        env[*a] = Some(e);
                        env[*b] = Some(e);
                        self.search(lits, at + 1, env, tail, reps, out, f, stop);
                        if *stop {
                            break;
                        }
                    }
                    env[*a] = None;
                    env[*b] = None;
                }
            },
            CLit::Rel(r, slots) => {
                let Some(facts) = self.rels.get(r) else { return };
                if slots.iter().all(|s| env[*s].is_some()) {
                    let key: Vec<ElementId> = slots.iter().map(|s| env[*s].expect("bound")).collect();
                    if facts.contains_key(&key) {
                        self.search(lits, at + 1, env, tail, reps, out, f, stop);
                    }
                    return;
                }
                let candidates: Box<dyn Iterator<Item = &Vec<ElementId>>> = match slots.first().and_then(|s| env[*s]) {
                    Some(first) => Box::new(
                        facts
                            .range(vec![first]..)
                            .map(|(t, _)| t)
                            .take_while(move |t| t.first() == Some(&first)),
                    ),
                    None => Box::new(facts.keys()),
                };
                for t in candidates {
                    if t.len() != slots.len() {
                        continue;
                    }
                    let mut newly: Vec<usize> = Vec::new();
                    let mut ok = true;
                    for (s, &e) in slots.iter().zip(t.iter()) {
                        match env[*s] {
                            Some(x) if x != e => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => {
                                env[*s] = Some(e);
                                newly.push(*s);
                            }
                        }
                    }
                    if ok {
                        self.search(lits, at + 1, env, tail, reps, out, f, stop);
                    }
                    for s in newly {
                        env[s] = None;
                    }
                    if *stop {
                        return;
                    }
                }
            }
        }
    }

    /// Tarski satisfaction of a positive-coherent formula, `=` read as the
    /// congruence and quantifiers ranging over the domain. With `bottom` set,
    /// `⊥` holds iff that nullary relation is present (the fallible reading).
    pub fn satisfies(
        &self,
        f: &Formula,
        assignment: &[(Sym, ElementId)],
        bottom: Option<&str>,
    ) -> Result<bool, DiagramError> {
        for (_, e) in assignment {
            if !self.contains(*e) {
                return Err(DiagramError::UnknownElement(*e));
            }
        }
        let mut env: Vec<(Sym, ElementId)> = assignment.iter().map(|(v, e)| (v.clone(), self.find(*e))).collect();
        self.eval(f, &mut env, bottom)
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(Sym, ElementId)>, bottom: Option<&str>) -> Result<bool, DiagramError> {
        let look = |v: &Sym, env: &Vec<(Sym, ElementId)>| {
            env.iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, e)| *e)
                .ok_or_else(|| DiagramError::Unbound(v.to_string()))
        };
        Ok(match f {
            Formula::True => true,
            Formula::False => bottom.is_some_and(|b| self.holds(b, &[])),
            Formula::Atom(r, args) => {
                let t = args.iter().map(|a| look(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.holds(r, &t)
            }
            Formula::Eq(a, b) => look(a, env)? == look(b, env)?,
            Formula::And(a, b) => self.eval(a, env, bottom)? && self.eval(b, env, bottom)?,
            Formula::Or(a, b) => self.eval(a, env, bottom)? || self.eval(b, env, bottom)?,
            Formula::Exists(v, body) => {
                let reps: Vec<ElementId> = self.reps().collect();
                let mut found = false;
                for e in reps {
                    env.push((v.clone(), e));
                    let r = self.eval(body, env, bottom);
                    env.pop();
                    if r? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Formula::Implies(..) | Formula::Forall(..) => {
                return Err(DiagramError::NotPositive(f.to_string()))
            }
        })
    }

    /// Whether every instance of the sequent holds, with `⊥` read via `bottom`.
    pub fn satisfies_sequent(&self, s: &Sequent, bottom: Option<&str>) -> Result<bool, DiagramError> {
        let vars = s.context.vars().to_vec();
        let reps: Vec<ElementId> = self.reps().collect();
        let mut tuple = vec![0usize; vars.len()];
        if !vars.is_empty() && reps.is_empty() {
            return Ok(true);
        }
        loop {
            let env: Vec<(Sym, ElementId)> = vars.iter().cloned().zip(tuple.iter().map(|&i| reps[i])).collect();
            if self.satisfies(&s.antecedent, &env, bottom)? && !self.satisfies(&s.consequent, &env, bottom)? {
                return Ok(false);
            }
            let mut k = 0;
            loop {
                if k == tuple.len() {
                    return Ok(true);
                }
                tuple[k] += 1;
                if tuple[k] < reps.len() {
                    break;
                }
                tuple[k] = 0;
                k += 1;
            }
        }
    }

    /// Whether every element and fact of `self` is present in `other`.
    pub fn is_subdiagram_of(&self, other: &Diagram) -> bool {
        self.domain().all(|e| other.contains(e))
            && self
                .classes
                .values()
                .all(|c| c.iter().all(|&e| other.equal(e, *c.first().expect("nonempty"))))
            && self.rels.iter().all(|(r, m)| {
                m.keys().all(|t| {
                    let t: Vec<ElementId> = t.to_vec();
                    other.holds(r, &t)
                })
            })
    }

    /// Returns the closure of the pre-diagram under the Horn axioms.
    pub fn generate(pre: &PreDiagram, horn_axioms: &[Sequent]) -> Result<Diagram, DiagramError> {
        let mut d = Diagram::new();
        for (id, name) in &pre.domain {
            d.add_element(*id, name)?;
        }
        for (rel, args) in &pre.facts {
            d.add_input_fact(rel, args)?;
        }
        d.close_horn(horn_axioms)?;
        Ok(d)
    }

    /// Saturates under Horn axioms over the fixed domain.
    pub fn close_horn(&mut self, horn_axioms: &[Sequent]) -> Result<(), DiagramError> {
        let mut rules = Vec::new();
        for s in horn_axioms {
            let bad = || DiagramError::NotHorn(s.to_string());
            let parts = canonicalize(s).map_err(|_| bad())?;
            for c in parts {
                if c.disjuncts.len() != 1 || !c.is_existential_free() {
                    return Err(bad());
                }
                rules.push(c);
            }
        }
        let mut step = 0usize;
        loop {
            let mut changed = false;
            for (ax, c) in rules.iter().enumerate() {
                for t in self.matches(&c.antecedent, &c.context, &[]) {
                    let env: Vec<(Sym, ElementId)> = c.context.iter().cloned().zip(t.iter().copied()).collect();
                    let head = &c.disjuncts[0].body;
                    if self.has_match(head, &env) {
                        continue;
                    }
                    let deps = self.match_deps(&c.antecedent, &env, step);
                    let prov = Prov {
                        origin: Origin::Axiom { step, axiom: ax },
                        deps,
                    };
                    self.add_lits(head, &env, &prov)?;
                    step += 1;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Dependency cone of a match of `lits` under `env`, plus `step`.
    pub fn match_deps(&self, lits: &[Lit], env: &[(Sym, ElementId)], step: usize) -> Arc<Deps> {
        if self.untracked {
            return Arc::default();
        }
        let mut acc: Arc<Deps> = Arc::new(Deps {
            inputs: BTreeSet::new(),
            steps: BTreeSet::from([step]),
        });
        for l in lits {
            let Ok(args) = instantiate(l, env) else { continue };
            match l {
                Lit::Rel(r, _) => {
                    if let Some(p) = self.prov(r, &args) {
                        acc = Deps::join(&acc, &p.deps);
                    }
                }
                Lit::Eq(..) => acc = Deps::join(&acc, &self.class_deps(args[0])),
            }
        }
        for (_, e) in env {
            acc = Deps::join(&acc, &self.element_deps(*e));
        }
        acc
    }

    /// A copy with every element id passed through `f`, which must be injective.
    pub fn map_ids(&self, f: &dyn Fn(ElementId) -> ElementId) -> Diagram {
        let mut d = Diagram {
            untracked: self.untracked,
            ..Diagram::default()
        };
        for (e, n) in &self.names {
            d.add_element(f(*e), n).expect("injective renaming");
        }
        d.next_gen = d.next_gen.max(self.next_gen);
        for c in self.classes.values() {
            let first = *c.first().expect("nonempty class");
            for &m in c.iter().skip(1) {
                d.union(f(first), f(m), Prov::new(Origin::Input));
            }
        }
        for (r, m) in &self.rels {
            for (t, p) in m {
                let nt: Vec<ElementId> = t.iter().map(|&e| f(e)).collect();
                d.add_fact(r, &nt, Prov::new(p.origin.clone())).expect("renamed fact");
            }
        }
        d
    }

    /// Largest generation in use.
    pub fn max_gen(&self) -> Option<u32> {
        self.names.keys().map(|e| e.gen).max()
    }

    /// A compact textual rendering for diagnostics.
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for c in self.classes.values() {
            if c.len() > 1 {
                let names: Vec<String> = c.iter().map(|e| self.label(*e)).collect();
                parts.push(names.join("="));
            }
        }
        for (r, t, _) in self.facts() {
            let args: Vec<String> = t.iter().map(|e| self.label(*e)).collect();
            parts.push(if args.is_empty() {
                r.to_string()
            } else {
                format!("{r}({})", args.join(","))
            });
        }
        let dom: Vec<String> = self.domain().map(|e| self.label(e)).collect();
        format!("{{{}; {}}}", dom.join(","), parts.join(", "))
    }

    pub fn label(&self, e: ElementId) -> String {
        self.name(e).map(str::to_string).unwrap_or_else(|| e.to_string())
    }
}

/// A domain with raw facts, before congruence closure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreDiagram {
    pub domain: Vec<(ElementId, String)>,
    pub facts: Vec<FactKey>,
}

impl PreDiagram {
    /// Decomposes a Horn fact into its conjuncts at `args`.
    pub fn add_horn_fact(&mut self, ctx: &[Sym], horn: &Formula, args: &[ElementId]) -> Result<(), DiagramError> {
        let lits = horn_lits(horn).ok_or_else(|| DiagramError::NotHorn(horn.to_string()))?;
        if ctx.len() != args.len() {
            return Err(DiagramError::Arity {
                rel: "context".into(),
                expected: ctx.len(),
                used: args.len(),
            });
        }
        let env: Vec<(Sym, ElementId)> = ctx.iter().cloned().zip(args.iter().copied()).collect();
        for l in &lits {
            self.facts.push((sym(l.rel()), instantiate(l, &env)?));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum CLit {
    Rel(Sym, Vec<usize>),
    Eq(usize, usize),
}

impl CLit {
    fn slots(&self) -> Vec<usize> {
        match self {
            CLit::Rel(_, s) => s.clone(),
            CLit::Eq(a, b) => vec![*a, *b],
        }
    }
}

/// Ground instance of a literal.
pub fn instantiate(l: &Lit, env: &[(Sym, ElementId)]) -> Result<Vec<ElementId>, DiagramError> {
    l.vars()
        .iter()
        .map(|v| {
            env.iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, e)| *e)
                .ok_or_else(|| DiagramError::Unbound(v.to_string()))
        })
        .collect()
}

/// Conjuncts of a Horn formula; `None` if it is not Horn.
pub fn horn_lits(f: &Formula) -> Option<Vec<Lit>> {
    match f {
        Formula::True => Some(vec![]),
        Formula::Atom(r, a) => Some(vec![Lit::Rel(r.clone(), a.clone())]),
        Formula::Eq(a, b) => Some(vec![Lit::Eq(a.clone(), b.clone())]),
        Formula::And(a, b) => {
            let mut l = horn_lits(a)?;
            l.extend(horn_lits(b)?);
            Some(l)
        }
        _ => None,
    }
}

/// Extends `d` by `fresh` new elements and the Horn conjuncts `body` instantiated
/// at `olds` followed by the new elements. `ctx` lists the x-part then the y-part.
pub fn finitary_extension(
    d: &Diagram,
    ctx: &[Sym],
    body: &Formula,
    olds: &[ElementId],
    fresh: usize,
) -> Result<(Diagram, Vec<ElementId>), DiagramError> {
    let lits = horn_lits(body).ok_or_else(|| DiagramError::NotHorn(body.to_string()))?;
    if ctx.len() != olds.len() + fresh {
        return Err(DiagramError::Arity {
            rel: "context".into(),
            expected: ctx.len(),
            used: olds.len() + fresh,
        });
    }
    for e in olds {
        if !d.contains(*e) {
            return Err(DiagramError::UnknownElement(*e));
        }
    }
    let mut out = d.clone();
    let names: Vec<String> = ctx[olds.len()..].iter().map(|v| v.to_string()).collect();
    let new = out.fresh_elements(&names, Arc::default());
    let env: Vec<(Sym, ElementId)> = ctx
        .iter()
        .cloned()
        .zip(olds.iter().copied().chain(new.iter().copied()))
        .collect();
    out.add_lits(&lits, &env, &Prov::new(Origin::Presented))?;
    Ok((out, new))
}

/// The diagram presented by a Horn formula-in-context: one fresh element per
/// context variable, carrying the formula's conjuncts.
pub fn present(f: &Formula, ctx: &[Sym]) -> Result<(Diagram, Vec<ElementId>), DiagramError> {
    let lits = horn_lits(f).ok_or_else(|| DiagramError::NotHorn(f.to_string()))?;
    present_lits(&lits, ctx)
}

pub fn present_lits(lits: &[Lit], ctx: &[Sym]) -> Result<(Diagram, Vec<ElementId>), DiagramError> {
    let mut d = Diagram::new();
    let els: Vec<ElementId> = ctx.iter().map(|v| d.add_input(v)).collect();
    let env: Vec<(Sym, ElementId)> = ctx.iter().cloned().zip(els.iter().copied()).collect();
    for l in lits {
        let args = instantiate(l, &env)?;
        let prov = Prov::input((sym(l.rel()), args.clone()));
        let prov = Prov {
            origin: Origin::Presented,
            deps: prov.deps,
        };
        d.add_fact(l.rel(), &args, prov)?;
    }
    Ok((d, els))
}
