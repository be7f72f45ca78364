//! Fallible forcing over finite posets and trees of diagrams.
//!
//! Verdicts are three-valued. On a truncated tree the clauses for `→` and `∀`
//! range over an incomplete up-set, and covers may continue below the leaves,
//! so any conclusion that unexplored nodes could overturn is `Unknown`.

mod beth;
mod family;

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::chase::ChaseError;
use crate::diagram::{Diagram, DiagramError, ElementId};
use crate::morley::MorleyError;
use crate::syntax::{canonical_context, Formula, Sym};

pub use beth::{build_beth_tree, chase_pair, BethEngine, BethTree, DEFAULT_PAIR_FUEL, DEFAULT_SPLIT_DEPTH};
pub use family::{check_forcing_truth_equivalence, formula_family, EquivalenceReport, Mismatch};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("variable `{0}` is unbound")]
    Unbound(String),
    #[error("no node {0}")]
    NoNode(usize),
    #[error("the theory is not habitative")]
    NotHabitative,
    #[error("fact {0} is not in the diagram")]
    MissingFact(String),
    #[error("`{0}` is not in the Morleyization's closure")]
    NotInClosure(String),
    #[error("{0}")]
    Provenance(String),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Morley(#[from] MorleyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Forced,
    NotForced,
    Unknown,
}

impl Verdict {
    pub fn of(b: bool) -> Verdict {
        if b {
            Verdict::Forced
        } else {
            Verdict::NotForced
        }
    }

    pub fn and(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::NotForced, _) | (_, Verdict::NotForced) => Verdict::NotForced,
            (Verdict::Forced, Verdict::Forced) => Verdict::Forced,
            _ => Verdict::Unknown,
        }
    }

    pub fn or(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::Forced, _) | (_, Verdict::Forced) => Verdict::Forced,
            (Verdict::NotForced, Verdict::NotForced) => Verdict::NotForced,
            _ => Verdict::Unknown,
        }
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Forced => Verdict::NotForced,
            Verdict::NotForced => Verdict::Forced,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Forced => "forced",
            Verdict::NotForced => "not_forced",
            Verdict::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Every tree is the one-node tree.
    Kripke,
    /// Covers matter only for disjunctions.
    BethStar,
    /// Atoms, disjunctions and existentials may all be covered.
    GeneralizedBeth,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Kripke => "kripke",
            Kind::BethStar => "beth_star",
            Kind::GeneralizedBeth => "generalized_beth",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub diagram: Diagram,
    pub level: usize,
    pub parent: Option<usize>,
    /// Tree children; a covered node has two. Empty in inclusion posets.
    pub children: Vec<usize>,
    /// Nodes above this one, itself included.
    pub up: Vec<usize>,
    /// Nodes above this one may exist beyond the explored fragment.
    pub horizon: bool,
}

/// A finite fragment of a forcing structure. `bottom` names the relation
/// interpreting `⊥`; nodes where it holds force everything.
#[derive(Clone, Debug)]
pub struct ForcingStructure {
    pub kind: Kind,
    pub nodes: Vec<Node>,
    pub bottom: Option<Sym>,
}

impl ForcingStructure {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exploding(&self, p: usize) -> bool {
        self.bottom.as_ref().is_some_and(|b| self.nodes[p].diagram.has_relation(b))
    }

    /// Up-set of `p` reaches the edge of the explored fragment.
    pub fn truncated_above(&self, p: usize) -> bool {
        self.nodes[p].up.iter().any(|&q| self.nodes[q].horizon)
    }

    pub fn with_kind(&self, kind: Kind) -> ForcingStructure {
        ForcingStructure {
            kind,
            ..self.clone()
        }
    }

    /// Structural checks on the explored fragment: children sit one level
    /// down, extend their parent, and come in pairs; up-sets are reflexive
    /// and upward closed; unexpanded tree nodes are marked as horizon.
    pub fn check_tree_axioms(&self) -> Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.up.contains(&i) {
                return Err(format!("node {i}: up-set is not reflexive"));
            }
            for &q in &n.up {
                if self.nodes[q].up.iter().any(|r| !n.up.contains(r)) {
                    return Err(format!("node {i}: up-set is not upward closed"));
                }
                if !n.diagram.is_subdiagram_of(&self.nodes[q].diagram) {
                    return Err(format!("node {i}: node {q} above it does not extend it"));
                }
            }
            if self.kind == Kind::Kripke {
                continue;
            }
            match n.children.len() {
                0 if !n.horizon => return Err(format!("node {i}: leaf inside the explored fragment")),
                0 | 2 => {}
                k => return Err(format!("node {i}: {k} children")),
            }
            for &c in &n.children {
                if self.nodes[c].parent != Some(i) || self.nodes[c].level != n.level + 1 {
                    return Err(format!("node {i}: child {c} is misplaced"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "nodes": self.nodes.iter().enumerate().map(|(i, n)| json!({
                "id": i,
                "level": n.level,
                "parent": n.parent,
                "children": n.children,
                "exploding": self.exploding(i),
                "horizon": n.horizon,
                "summary": n.diagram.summary(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph forcing {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if self.exploding(i) { "box" } else { "ellipse" };
            out.push_str(&format!("  n{i} [label=\"{i}\" shape={shape}];\n"));
            let succ: Vec<usize> = if n.children.is_empty() && self.kind == Kind::Kripke {
                n.up.iter().copied().filter(|&q| q != i).collect()
            } else {
                n.children.clone()
            };
            for c in succ {
                out.push_str(&format!("  n{i} -> n{c};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// The Kripke structure of `diagrams` ordered by inclusion.
pub fn poset_of_inclusions(diagrams: Vec<Diagram>) -> ForcingStructure {
    let n = diagrams.len();
    let up: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| diagrams[i].is_subdiagram_of(&diagrams[j])).collect())
        .collect();
    let nodes = diagrams
        .into_iter()
        .zip(up)
        .map(|(diagram, up)| Node {
            diagram,
            level: 0,
            parent: None,
            children: Vec::new(),
            up,
            horizon: false,
        })
        .collect();
    ForcingStructure {
        kind: Kind::Kripke,
        nodes,
        bottom: None,
    }
}

type MemoKey = (usize, usize, Vec<ElementId>);

/// Memoised forcing over one structure. Formulas are identified by address,
/// so every formula passed in must outlive the forcer.
pub struct Forcer<'s, 'f> {
    s: &'s ForcingStructure,
    memo: HashMap<MemoKey, Verdict>,
    free: HashMap<usize, Vec<Sym>>,
    _formulas: std::marker::PhantomData<&'f Formula>,
}

impl<'s, 'f> Forcer<'s, 'f> {
    pub fn new(s: &'s ForcingStructure) -> Self {
        Forcer {
            s,
            memo: HashMap::new(),
            free: HashMap::new(),
            _formulas: std::marker::PhantomData,
        }
    }

    fn look(env: &[(Sym, ElementId)], v: &Sym) -> Result<ElementId, SemanticsError> {
        env.iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, e)| *e)
            .ok_or_else(|| SemanticsError::Unbound(v.to_string()))
    }

    fn elements(&self, q: usize) -> Vec<ElementId> {
        self.s.nodes[q].diagram.reps().collect()
    }

    pub fn force(&mut self, p: usize, f: &'f Formula, env: &mut Vec<(Sym, ElementId)>) -> Result<Verdict, SemanticsError> {
        if p >= self.s.len() {
            return Err(SemanticsError::NoNode(p));
        }
        if self.s.exploding(p) {
            return Ok(Verdict::Forced);
        }
        let addr = f as *const Formula as usize;
        let vars = self.free.entry(addr).or_insert_with(|| canonical_context(f).0).clone();
        let d = &self.s.nodes[p].diagram;
        let tuple = vars
            .iter()
            .map(|v| Self::look(env, v).map(|e| if d.contains(e) { d.find(e) } else { e }))
            .collect::<Result<Vec<_>, _>>()?;
        let key = (p, addr, tuple);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.clause(p, f, env)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    /// `local` at `p`, or else on a cover of `p` built from its tree children.
    fn covered(
        &mut self,
        p: usize,
        f: &'f Formula,
        env: &mut Vec<(Sym, ElementId)>,
        local: Verdict,
    ) -> Result<Verdict, SemanticsError> {
        if local == Verdict::Forced || self.s.kind == Kind::Kripke {
            return Ok(local);
        }
        let children = self.s.nodes[p].children.clone();
        if children.is_empty() {
            let rest = if self.s.nodes[p].horizon { Verdict::Unknown } else { Verdict::NotForced };
            return Ok(local.or(rest));
        }
        let mut all = Verdict::Forced;
        for c in children {
            all = all.and(self.force(c, f, env)?);
            if all == Verdict::NotForced {
                break;
            }
        }
        Ok(local.or(all))
    }

    fn truncate(&self, p: usize, v: Verdict) -> Verdict {
        if v == Verdict::Forced && self.s.truncated_above(p) {
            Verdict::Unknown
        } else {
            v
        }
    }

    fn clause(&mut self, p: usize, f: &'f Formula, env: &mut Vec<(Sym, ElementId)>) -> Result<Verdict, SemanticsError> {
        let general = self.s.kind == Kind::GeneralizedBeth;
        Ok(match f {
            Formula::True => Verdict::Forced,
            Formula::False => {
                if general {
                    self.covered(p, f, env, Verdict::NotForced)?
                } else {
                    Verdict::NotForced
                }
            }
            Formula::Atom(r, args) => {
                let d = &self.s.nodes[p].diagram;
                let t = args.iter().map(|a| Self::look(env, a)).collect::<Result<Vec<_>, _>>()?;
                let local = Verdict::of(t.iter().all(|e| d.contains(*e)) && d.holds(r, &t));
                if general {
                    self.covered(p, f, env, local)?
                } else {
                    local
                }
            }
            Formula::Eq(a, b) => {
                let d = &self.s.nodes[p].diagram;
                let (a, b) = (Self::look(env, a)?, Self::look(env, b)?);
                let local = Verdict::of(d.contains(a) && d.contains(b) && d.equal(a, b));
                if general {
                    self.covered(p, f, env, local)?
                } else {
                    local
                }
            }
            Formula::And(a, b) => {
                let l = self.force(p, a, env)?;
                if l == Verdict::NotForced {
                    l
                } else {
                    l.and(self.force(p, b, env)?)
                }
            }
            Formula::Or(a, b) => {
                let l = self.force(p, a, env)?;
                let local = if l == Verdict::Forced { l } else { l.or(self.force(p, b, env)?) };
                self.covered(p, f, env, local)?
            }
            Formula::Exists(y, body) => {
                let mut local = Verdict::NotForced;
                for e in self.elements(p) {
                    env.push((y.clone(), e));
                    let v = self.force(p, body, env);
                    env.pop();
                    local = local.or(v?);
                    if local == Verdict::Forced {
                        break;
                    }
                }
                if general {
                    self.covered(p, f, env, local)?
                } else {
                    local
                }
            }
            Formula::Implies(a, b) => {
                // Forcing persists upwards, so a forced consequent settles every q ≥ p.
                if self.force(p, b, env)? == Verdict::Forced {
                    return Ok(Verdict::Forced);
                }
                let mut all = Verdict::Forced;
                for q in self.s.nodes[p].up.clone() {
                    let pre = self.force(q, a, env)?;
                    let step = if pre == Verdict::NotForced {
                        Verdict::Forced
                    } else {
                        pre.negate().or(self.force(q, b, env)?)
                    };
                    all = all.and(step);
                    if all == Verdict::NotForced {
                        break;
                    }
                }
                self.truncate(p, all)
            }
            Formula::Forall(y, body) => {
                let mut all = Verdict::Forced;
                'up: for q in self.s.nodes[p].up.clone() {
                    for e in self.elements(q) {
                        env.push((y.clone(), e));
                        let v = self.force(q, body, env);
                        env.pop();
                        all = all.and(v?);
                        if all == Verdict::NotForced {
                            break 'up;
                        }
                    }
                }
                self.truncate(p, all)
            }
        })
    }
}

/// `p ⊩ f[env]` on `s`.
pub fn force(s: &ForcingStructure, p: usize, f: &Formula, env: &[(Sym, ElementId)]) -> Result<Verdict, SemanticsError> {
    let mut env = env.to_vec();
    Forcer::new(s).force(p, f, &mut env)
}
