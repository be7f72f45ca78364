//! Proof search by dynamical covers.
//!
//! The tree grows one level at a time. Every open frontier node fires the least
//! non-redundant application found by scanning axioms cyclically from its
//! cursor; the resulting children (one per disjunct) continue the scan at the
//! next axiom. Nodes that witness the goal (the bar) and nodes closed by a `⊥`
//! axiom are frozen. The sequent is proved at the first level where every
//! frontier node is frozen.

mod check;

use serde_json::{json, Value};

use crate::chase::{fire, is_redundant, Application, ChaseError, Program};
use crate::diagram::{present_lits, Diagram, DiagramError, ElementId, Origin};
use crate::syntax::{canonicalize, Canonical, Disjunct, NormalizeError, Sequent, Sym, Theory};

pub use check::{check_certificate, check_certificates, CertificateError};

pub const DEFAULT_MAX_DEPTH: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CoverError {
    #[error("not a coherent sequent: {0}")]
    NotCoherent(String),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeState {
    Open,
    /// The goal's disjunct holds with these witnesses for its variables.
    Bar { disjunct: usize, witness: Vec<ElementId> },
    /// A `⊥` axiom applies.
    Closed,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub diagram: Diagram,
    /// The application that produced this node from its parent; `disjunct` is
    /// `None` for a closure.
    pub app: Option<(Application, Option<usize>)>,
    /// Elements created for the disjunct's existential variables.
    pub fresh: Vec<ElementId>,
    pub state: NodeState,
    cursor: usize,
}

#[derive(Clone, Debug)]
pub struct CoverTree {
    pub goal: Canonical,
    /// The presented elements, one per context variable of the goal.
    pub base: Vec<ElementId>,
    pub nodes: Vec<Node>,
    pub frontier: Vec<usize>,
    pub depth: usize,
}

/// Whether `node` witnesses some goal disjunct at the base tuple.
pub fn bar_member(d: &Diagram, goal: &[Disjunct], context: &[Sym], base: &[ElementId]) -> Option<(usize, Vec<ElementId>)> {
    let fixed: Vec<(Sym, ElementId)> = context.iter().cloned().zip(base.iter().copied()).collect();
    goal.iter().enumerate().find_map(|(i, dj)| {
        let mut found = None;
        d.for_each_match(&dj.body, &dj.vars, &fixed, &mut |w| {
            found = Some(w.to_vec());
            false
        });
        found.map(|w| (i, w))
    })
}

/// The least non-redundant application, scanning axioms cyclically from
/// `cursor`. Within an axiom, substitutions are ordered by their newest
/// element and then lexicographically, so each substitution over existing
/// elements is reached after finitely many steps.
pub fn next_application(p: &Program, d: &Diagram, cursor: usize) -> Option<Application> {
    let n = p.len();
    (0..n).map(|k| (cursor + k) % n).find_map(|i| {
        let c = &p.axioms[i];
        d.matches(&c.antecedent, &c.context, &[])
            .into_iter()
            .map(|subst| Application {
                axiom: i,
                subst,
                disjunct: 0,
            })
            .filter(|a| !is_redundant(p, a, d))
            .min_by(|a, b| {
                let newest = |a: &Application| a.subst.iter().copied().max();
                newest(a).cmp(&newest(b)).then_with(|| a.subst.cmp(&b.subst))
            })
    })
}

impl CoverTree {
    pub fn new(goal: Canonical) -> Result<CoverTree, CoverError> {
        let (root, base) = present_lits(&goal.antecedent, &goal.context)?;
        let mut t = CoverTree {
            goal,
            base,
            nodes: Vec::new(),
            frontier: vec![0],
            depth: 0,
        };
        let state = t.classify(&root);
        t.nodes.push(Node {
            id: 0,
            parent: None,
            depth: 0,
            diagram: root,
            app: None,
            fresh: Vec::new(),
            state,
            cursor: 0,
        });
        Ok(t)
    }

    fn classify(&self, d: &Diagram) -> NodeState {
        match bar_member(d, &self.goal.disjuncts, &self.goal.context, &self.base) {
            Some((disjunct, witness)) => NodeState::Bar { disjunct, witness },
            None => NodeState::Open,
        }
    }

    pub fn is_uniform_bar(&self) -> bool {
        self.frontier.iter().all(|&i| self.nodes[i].state != NodeState::Open)
    }

    /// The children of `node`: one per disjunct of its next application, a
    /// closure, or `None` when no application remains (the node is its own child).
    pub fn expand_node(&self, p: &Program, node: usize) -> Result<Option<Vec<Node>>, CoverError> {
        let n = &self.nodes[node];
        let Some(app) = next_application(p, &n.diagram, n.cursor) else {
            return Ok(None);
        };
        let c = &p.axioms[app.axiom];
        let cursor = (app.axiom + 1) % p.len();
        if c.disjuncts.is_empty() {
            return Ok(Some(vec![Node {
                id: 0,
                parent: Some(node),
                depth: n.depth + 1,
                diagram: n.diagram.clone(),
                app: Some((app, None)),
                fresh: Vec::new(),
                state: NodeState::Closed,
                cursor,
            }]));
        }
        let mut out = Vec::with_capacity(c.disjuncts.len());
        for i in 0..c.disjuncts.len() {
            let mut d = n.diagram.clone();
            let a = Application {
                disjunct: i,
                ..app.clone()
            };
            let (_, fresh) = fire(p, &a, &mut d, 0, Origin::Cover)?;
            let state = self.classify(&d);
            out.push(Node {
                id: 0,
                parent: Some(node),
                depth: n.depth + 1,
                diagram: d,
                app: Some((a, Some(i))),
                fresh,
                state,
                cursor,
            });
        }
        Ok(Some(out))
    }

    /// Grows the tree by one level. Returns whether anything changed.
    pub fn step(&mut self, p: &Program) -> Result<bool, CoverError> {
        let mut next = Vec::with_capacity(self.frontier.len());
        let mut changed = false;
        for &id in &self.frontier.clone() {
            if self.nodes[id].state != NodeState::Open {
                next.push(id);
                continue;
            }
            match self.expand_node(p, id)? {
                None => next.push(id),
                Some(children) => {
                    changed = true;
                    for mut ch in children {
                        ch.id = self.nodes.len();
                        next.push(ch.id);
                        self.nodes.push(ch);
                    }
                }
            }
        }
        self.frontier = next;
        self.depth += 1;
        Ok(changed)
    }

    /// Node ids from the root to `id`.
    pub fn branch(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut at = id;
        while let Some(p) = self.nodes[at].parent {
            out.push(p);
            at = p;
        }
        out.reverse();
        out
    }

    pub fn certificate(&self) -> Certificate {
        let nodes = self.nodes[1..]
            .iter()
            .map(|n| {
                let (app, disjunct) = n.app.clone().expect("non-root node has an application");
                let mut subst = app.subst.clone();
                subst.extend(n.fresh.iter().copied());
                CertNode {
                    id: n.id,
                    parent: n.parent.expect("non-root"),
                    axiom: app.axiom,
                    subst,
                    disjunct,
                }
            })
            .collect();
        let bar = self
            .frontier
            .iter()
            .filter_map(|&i| match &self.nodes[i].state {
                NodeState::Bar { disjunct, witness } => Some(BarEntry {
                    leaf: i,
                    disjunct: *disjunct,
                    witness: witness.clone(),
                }),
                _ => None,
            })
            .collect();
        Certificate {
            root: self.nodes[0].diagram.clone(),
            nodes,
            bar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertNode {
    pub id: usize,
    pub parent: usize,
    pub axiom: usize,
    /// Images of the axiom's context variables, then the fresh elements.
    pub subst: Vec<ElementId>,
    pub disjunct: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarEntry {
    pub leaf: usize,
    pub disjunct: usize,
    pub witness: Vec<ElementId>,
}

/// A uniform bar on a finite tree of applications over the presented root.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub root: Diagram,
    pub nodes: Vec<CertNode>,
    pub bar: Vec<BarEntry>,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        let ids = |v: &[ElementId]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        json!({
            "root": self.root.to_json(),
            "nodes": self.nodes.iter().map(|n| json!({
                "id": n.id,
                "parent": n.parent,
                "axiom": n.axiom,
                "subst": ids(&n.subst),
                "disjunct": n.disjunct,
            })).collect::<Vec<_>>(),
            "bar": self.bar.iter().map(|b| json!({
                "leaf": b.leaf,
                "disjunct": b.disjunct,
                "witness": ids(&b.witness),
            })).collect::<Vec<_>>(),
        })
    }

    /// Leaves of the certificate tree (nodes without children), root included
    /// when it has none.
    pub fn leaves(&self) -> Vec<usize> {
        let parents: std::collections::BTreeSet<usize> = self.nodes.iter().map(|n| n.parent).collect();
        std::iter::once(0)
            .chain(self.nodes.iter().map(|n| n.id))
            .filter(|i| !parents.contains(i))
            .collect()
    }
}

/// An open frontier node of least depth, with its branch from the root.
#[derive(Clone, Debug)]
pub struct OpenBranch {
    pub part: usize,
    pub nodes: Vec<usize>,
    pub diagrams: Vec<Diagram>,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    /// One certificate per canonical part of the sequent.
    Proved(Vec<Certificate>),
    Unknown { depth: usize, branch: OpenBranch },
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::Proved(cs) => json!({
                "verdict": "proved",
                "certificates": cs.iter().map(Certificate::to_json).collect::<Vec<_>>(),
            }),
            Verdict::Unknown { depth, branch } => json!({
                "verdict": "unknown",
                "depth": depth,
                "open_branch": {
                    "part": branch.part,
                    "nodes": branch.nodes,
                    "leaf": branch.diagrams.last().map(Diagram::to_json),
                },
            }),
        }
    }
}

/// Compiles a coherent theory for proof search.
pub fn compile(t: &Theory) -> Result<Program, CoverError> {
    if let Some(s) = t.axioms.iter().find(|s| s.features().first_order) {
        return Err(CoverError::NotCoherent(s.to_string()));
    }
    Ok(Program::compile(t)?)
}

/// Builds the tree for one canonical goal up to `max_depth` levels.
pub fn search(p: &Program, goal: Canonical, max_depth: usize) -> Result<CoverTree, CoverError> {
    let mut t = CoverTree::new(goal)?;
    while !t.is_uniform_bar() && t.depth < max_depth {
        if !t.step(p)? {
            // Nothing can change any more; deeper levels repeat this one.
            t.depth = max_depth;
            break;
        }
    }
    Ok(t)
}

pub fn prove(t: &Theory, s: &Sequent, max_depth: usize) -> Result<Verdict, CoverError> {
    let p = compile(t)?;
    prove_compiled(&p, s, max_depth)
}

pub fn prove_compiled(p: &Program, s: &Sequent, max_depth: usize) -> Result<Verdict, CoverError> {
    if s.features().first_order {
        return Err(CoverError::NotCoherent(s.to_string()));
    }
    let mut certs = Vec::new();
    for (part, goal) in canonicalize(s)?.into_iter().enumerate() {
        let tree = search(p, goal, max_depth)?;
        if !tree.is_uniform_bar() {
            let open = tree
                .frontier
                .iter()
                .copied()
                .filter(|&i| tree.nodes[i].state == NodeState::Open)
                .min_by_key(|&i| (tree.nodes[i].depth, i))
                .expect("some frontier node is open");
            let nodes = tree.branch(open);
            let diagrams = nodes.iter().map(|&i| tree.nodes[i].diagram.clone()).collect();
            return Ok(Verdict::Unknown {
                depth: tree.depth,
                branch: OpenBranch { part, nodes, diagrams },
            });
        }
        certs.push(tree.certificate());
    }
    Ok(Verdict::Proved(certs))
}
