//! Beth trees over a regular Morleyization.
//!
//! Node diagrams are closed under `Ch*`: the chase, followed by adding every
//! fact over existing elements that holds on all non-exploding leaves of a
//! bounded split on the non-redundant disjunction facts (or `P_⊥` when every
//! leaf explodes), repeated until nothing changes. Facts true on a cover of
//! chase pairs are thereby true at the node, as the truth side of the forcing
//! equivalence requires.

use std::collections::{BTreeSet, HashSet};

use super::{ForcingStructure, Kind, Node, SemanticsError};
use crate::chase::{chase_with, ChaseOptions, ChaseStatus, Dirty, Program};
use crate::diagram::{Diagram, ElementId, Origin, Prov};
use crate::morley::{morleyize, MorleyTheory, Target};
use crate::syntax::{canonical_context, Formula, Sym, Theory, EQ};

/// Chase fuel for each diagram the tree construction chases.
pub const DEFAULT_PAIR_FUEL: usize = 1_000;
/// Nesting bound on the disjunctive split inside `Ch*`.
pub const DEFAULT_SPLIT_DEPTH: usize = 4;

#[derive(Clone, Debug)]
struct Split {
    name: Sym,
    /// Predicate and argument positions (into the disjunction's tuple) of each side.
    sides: [(Sym, Vec<usize>); 2],
}

/// A regular Morleyization compiled for building and closing node diagrams.
#[derive(Clone, Debug)]
pub struct BethEngine {
    pub morley: MorleyTheory,
    pub program: Program,
    /// `P_⊥`, when `⊥` is in the closure.
    pub bottom: Option<Sym>,
    splits: Vec<Split>,
    pub fuel: usize,
    pub split_depth: usize,
}

impl BethEngine {
    /// Regular Morleyization of `t` over its closure with `extras`.
    pub fn new(t: &Theory, extras: &[Formula]) -> Result<BethEngine, SemanticsError> {
        BethEngine::from_morley(morleyize(t, extras, Target::Regular))
    }

    pub fn from_morley(morley: MorleyTheory) -> Result<BethEngine, SemanticsError> {
        if morley.target != Target::Regular {
            return Err(SemanticsError::Provenance("the Beth construction needs the regular Morleyization".into()));
        }
        let program = Program::compile(&morley.result)?;
        let map = &morley.map;
        let bottom = map.name_of(&Formula::False).cloned();
        let mut splits = Vec::new();
        for e in map.entries() {
            if let Formula::Or(a, b) = &e.formula {
                let side = |g: &Formula| {
                    let pos = canonical_context(g)
                        .0
                        .iter()
                        .map(|v| e.context.0.iter().position(|w| w == v).expect("subformula variables are free"))
                        .collect();
                    (map.name_of(g).expect("closure member").clone(), pos)
                };
                splits.push(Split {
                    name: e.name.clone(),
                    sides: [side(a), side(b)],
                });
            }
        }
        Ok(BethEngine {
            morley,
            program,
            bottom,
            splits,
            fuel: DEFAULT_PAIR_FUEL,
            split_depth: DEFAULT_SPLIT_DEPTH,
        })
    }

    pub fn exploding(&self, d: &Diagram) -> bool {
        self.bottom.as_ref().is_some_and(|b| d.has_relation(b))
    }

    /// The chase, halting on `P_⊥`. The flag is false when fuel ran out.
    pub fn chase(&self, d: &Diagram, dirty: Option<Dirty>) -> Result<(Diagram, bool), SemanticsError> {
        let (d, complete, _) = self.chase_fuelled(d, dirty, self.fuel)?;
        Ok((d, complete))
    }

    fn chase_fuelled(&self, d: &Diagram, dirty: Option<Dirty>, fuel: usize) -> Result<(Diagram, bool, usize), SemanticsError> {
        if fuel == 0 {
            return Ok((d.clone(), false, 0));
        }
        let r = chase_with(
            &self.program,
            d,
            &ChaseOptions {
                fuel,
                halt_on: self.bottom.clone(),
                dirty,
                record_trace: false,
            },
        )?;
        Ok((r.diagram, r.status != ChaseStatus::FuelExhausted, r.fuel_used))
    }

    fn side_fact(&self, j: usize, side: usize, tuple: &[ElementId]) -> (Sym, Vec<ElementId>) {
        let (name, pos) = &self.splits[j].sides[side];
        (name.clone(), pos.iter().map(|&i| tuple[i]).collect())
    }

    /// Disjunction facts of `d`, by closure order then tuple.
    pub fn disjunction_facts(&self, d: &Diagram) -> Vec<(Sym, Vec<ElementId>)> {
        let mut out = Vec::new();
        for s in &self.splits {
            for (t, _) in d.facts_of(&s.name) {
                out.push((s.name.clone(), t.clone()));
            }
        }
        out
    }

    /// The first disjunction fact neither of whose sides holds.
    fn open_disjunction(&self, d: &Diagram) -> Option<(usize, Vec<ElementId>)> {
        self.splits.iter().enumerate().find_map(|(j, s)| {
            d.facts_of(&s.name).map(|(t, _)| t.clone()).find(|t| {
                (0..2).all(|side| {
                    let (r, args) = self.side_fact(j, side, t);
                    !d.holds(&r, &args)
                })
            }).map(|t| (j, t))
        })
    }

    fn extend(&self, d: &Diagram, rel: &Sym, args: &[ElementId]) -> Result<(Diagram, Dirty), SemanticsError> {
        let mut c = d.clone();
        c.add_fact(rel, args, Prov::new(Origin::Cover))?;
        let dirty = Dirty {
            rels: BTreeSet::from([rel.clone()]),
            ..Dirty::default()
        };
        Ok((c, dirty))
    }

    fn leaves(&self, d: &Diagram, depth: usize, out: &mut Vec<Diagram>) -> Result<bool, SemanticsError> {
        if self.exploding(d) {
            return Ok(true);
        }
        let open = if depth == 0 { None } else { self.open_disjunction(d) };
        let Some((j, t)) = open else {
            out.push(d.clone());
            return Ok(true);
        };
        let mut complete = true;
        for side in 0..2 {
            let (r, args) = self.side_fact(j, side, &t);
            let (c, dirty) = self.extend(d, &r, &args)?;
            let (c, ok) = self.chase(&c, Some(dirty))?;
            complete &= ok;
            complete &= self.leaves(&c, depth - 1, out)?;
        }
        Ok(complete)
    }

    /// `Ch*` of `d`; `dirty` says what changed since `d` was last closed.
    /// The chases of `d` itself share one budget of `fuel`; the flag is false
    /// when some chase ran out, which also ends the iteration.
    pub fn close(&self, d: &Diagram, dirty: Option<Dirty>) -> Result<(Diagram, bool), SemanticsError> {
        let (mut d, mut complete, used) = self.chase_fuelled(d, dirty, self.fuel)?;
        let mut budget = self.fuel - used;
        loop {
            if !complete || self.exploding(&d) || self.open_disjunction(&d).is_none() {
                return Ok((d, complete));
            }
            let mut leaves = Vec::new();
            complete &= self.leaves(&d, self.split_depth, &mut leaves)?;
            let Some((first, rest)) = leaves.split_first() else {
                let bottom = self.bottom.as_ref().expect("leaves explode only through P_⊥");
                d.add_fact(bottom, &[], Prov::new(Origin::Cover))?;
                return Ok((d, complete));
            };
            let old = |leaf: &Diagram, e: ElementId| leaf.class_of(e).iter().copied().find(|x| d.contains(*x));
            let mut dirty = Dirty::default();
            let mut adds: Vec<(Sym, Vec<ElementId>)> = Vec::new();
            for (r, args, _) in first.facts() {
                let Some(olds) = args.iter().map(|&a| old(first, a)).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                if !d.holds(r, &olds) && rest.iter().all(|l| l.holds(r, &olds)) {
                    adds.push((r.clone(), olds));
                }
            }
            let reps: Vec<ElementId> = d.reps().collect();
            for (i, &a) in reps.iter().enumerate() {
                for &b in &reps[i + 1..] {
                    if leaves.iter().all(|l| l.equal(a, b)) {
                        adds.push((crate::syntax::sym(EQ), vec![a, b]));
                    }
                }
            }
            let mut changed = false;
            for (r, args) in adds {
                if d.add_fact(&r, &args, Prov::new(Origin::Cover))? {
                    changed = true;
                    if &*r == EQ {
                        dirty.equality = true;
                    } else {
                        dirty.rels.insert(r);
                    }
                }
            }
            if !changed {
                return Ok((d, complete));
            }
            let (next, ok, used) = self.chase_fuelled(&d, Some(dirty), budget)?;
            d = next;
            complete &= ok;
            budget -= used;
        }
    }

    /// `Ch*` of the empty diagram.
    pub fn close_empty(&self) -> Result<Diagram, SemanticsError> {
        Ok(self.close(&Diagram::untracked(), None)?.0)
    }

    /// `P_⊥ ∈ d` or `P_f(tuple) ∈ d`.
    pub fn truth(&self, d: &Diagram, f: &Formula, tuple: &[ElementId]) -> Result<bool, SemanticsError> {
        if self.exploding(d) {
            return Ok(true);
        }
        let name = self
            .morley
            .map
            .name_of(f)
            .ok_or_else(|| SemanticsError::NotInClosure(f.to_string()))?;
        Ok(tuple.iter().all(|e| d.contains(*e)) && d.holds(name, tuple))
    }

    /// Adds `P_f(tuple)` to `d` and closes.
    pub fn assume(&self, d: &Diagram, f: &Formula, tuple: &[ElementId]) -> Result<Diagram, SemanticsError> {
        let name = self
            .morley
            .map
            .name_of(f)
            .ok_or_else(|| SemanticsError::NotInClosure(f.to_string()))?
            .clone();
        let (c, dirty) = self.extend(d, &name, tuple)?;
        Ok(self.close(&c, Some(dirty))?.0)
    }
}

/// The two closed extensions of `d` by the sides of the disjunction fact `rel(args)`.
pub fn chase_pair(e: &BethEngine, d: &Diagram, rel: &str, args: &[ElementId]) -> Result<(Diagram, Diagram), SemanticsError> {
    let ([a, b], _) = pair(e, d, rel, args)?;
    Ok((a, b))
}

fn pair(e: &BethEngine, d: &Diagram, rel: &str, args: &[ElementId]) -> Result<([Diagram; 2], [bool; 2]), SemanticsError> {
    let j = e
        .splits
        .iter()
        .position(|s| &*s.name == rel)
        .ok_or_else(|| SemanticsError::MissingFact(format!("{rel} is not a disjunction predicate")))?;
    if !args.iter().all(|a| d.contains(*a)) || !d.holds(rel, args) {
        return Err(SemanticsError::MissingFact(format!("{rel}{args:?}")));
    }
    let side = |k: usize| -> Result<(Diagram, bool), SemanticsError> {
        let (r, t) = e.side_fact(j, k, args);
        let (c, dirty) = e.extend(d, &r, &t)?;
        e.close(&c, Some(dirty))
    };
    let (a, oa) = side(0)?;
    let (b, ob) = side(1)?;
    Ok(([a, b], [oa, ob]))
}

/// A Beth★ structure with the schedule that built it.
#[derive(Clone, Debug)]
pub struct BethTree {
    pub structure: ForcingStructure,
    /// `g(n)`, the disjunction fact chased at level `n`, if any.
    pub schedule: Vec<Option<(Sym, Vec<ElementId>)>>,
    pub fuel: usize,
    /// Nodes whose closure ran out of fuel.
    pub unsaturated: usize,
}

/// Builds the binary tree to `depth` levels below the closed `root`. At level
/// `n` every node holding `g(n)` gets its chase pair as children; the others
/// get two copies of themselves. `g` walks a rotation of disjunction facts in
/// order of discovery, each batch sorted by closure order then tuple; new
/// facts join at the end, so every fact is reached within one pass.
pub fn build_beth_tree(e: &BethEngine, root: &Diagram, depth: usize) -> Result<BethTree, SemanticsError> {
    let mut start = root.clone();
    start.set_tracking(false);
    let (root, complete) = e.close(&start, None)?;
    let mut unsaturated = usize::from(!complete);
    let mut nodes = vec![Node {
        diagram: root,
        level: 0,
        parent: None,
        children: Vec::new(),
        up: Vec::new(),
        horizon: depth == 0,
    }];
    let mut level = vec![0usize];
    let mut rotation: Vec<(Sym, Vec<ElementId>)> = Vec::new();
    let mut seen: HashSet<(Sym, Vec<ElementId>)> = HashSet::new();
    let mut cursor = 0;
    let mut schedule = Vec::with_capacity(depth);
    for n in 0..depth {
        let order: Vec<Sym> = e.splits.iter().map(|s| s.name.clone()).collect();
        let mut found: Vec<(usize, Vec<ElementId>, Sym)> = Vec::new();
        for &i in &level {
            for (r, t) in e.disjunction_facts(&nodes[i].diagram) {
                if seen.insert((r.clone(), t.clone())) {
                    let k = order.iter().position(|x| *x == r).expect("split predicate");
                    found.push((k, t, r));
                }
            }
        }
        found.sort();
        rotation.extend(found.into_iter().map(|(_, t, r)| (r, t)));
        let g = (!rotation.is_empty()).then(|| {
            if cursor >= rotation.len() {
                cursor = 0;
            }
            cursor += 1;
            rotation[cursor - 1].clone()
        });
        let mut next = Vec::with_capacity(level.len() * 2);
        for &i in &level {
            let d = &nodes[i].diagram;
            let (kids, done) = match &g {
                Some((r, t)) if t.iter().all(|x| d.contains(*x)) && d.holds(r, t) => pair(e, d, r, t)?,
                _ => ([d.clone(), d.clone()], [true; 2]),
            };
            unsaturated += done.iter().filter(|ok| !**ok).count();
            for k in kids {
                let id = nodes.len();
                nodes.push(Node {
                    diagram: k,
                    level: n + 1,
                    parent: Some(i),
                    children: Vec::new(),
                    up: Vec::new(),
                    horizon: n + 1 == depth,
                });
                nodes[i].children.push(id);
                next.push(id);
            }
        }
        schedule.push(g);
        level = next;
    }
    for i in (0..nodes.len()).rev() {
        let mut up = vec![i];
        for &c in &nodes[i].children.clone() {
            up.extend(nodes[c].up.iter().copied());
        }
        up.sort_unstable();
        nodes[i].up = up;
    }
    Ok(BethTree {
        structure: ForcingStructure {
            kind: Kind::BethStar,
            nodes,
            bottom: e.bottom.clone(),
        },
        schedule,
        fuel: e.fuel,
        unsaturated,
    })
}
