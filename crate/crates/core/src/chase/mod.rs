//! The restricted chase for regular theories in canonical form.
//!
//! Schedule: existential-free axioms are saturated first; then every pending
//! existential application is processed once in (axiom, tuple) order, each
//! rechecked for redundancy just before it fires; repeat. One fired
//! application costs one unit of fuel.

mod witness;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::diagram::{instantiate, Diagram, DiagramError, ElementId, FactKey, Origin, Prov};
use crate::syntax::{canonicalize, Canonical, NormalizeError, Sym, Theory, EQ};

pub use witness::{check_witness, conservativity_witness, weak_reflection_lift, Witness};

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ChaseError {
    #[error("fuel must be positive")]
    NoFuel,
    #[error("axiom {0} is not regular: {1}")]
    NotRegular(usize, String),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("replay failed at step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error("{0}")]
    Witness(String),
    #[error("lift failed: {0}")]
    Lift(String),
}

/// A theory compiled to canonical-form rules with a relation index.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub axioms: Vec<Canonical>,
    /// Index of the source axiom each rule came from.
    pub source: Vec<usize>,
    by_rel: BTreeMap<Sym, Vec<usize>>,
    /// Rules with a context variable not constrained by a relational literal.
    ranging: Vec<usize>,
    with_eq: Vec<usize>,
}

impl Program {
    pub fn compile(t: &Theory) -> Result<Program, ChaseError> {
        let mut rules = Vec::new();
        let mut source = Vec::new();
        for (i, s) in t.axioms.iter().enumerate() {
            for c in canonicalize(s)? {
                rules.push(c);
                source.push(i);
            }
        }
        Ok(Program::from_rules(rules, source))
    }

    pub fn from_rules(axioms: Vec<Canonical>, source: Vec<usize>) -> Program {
        let mut p = Program {
            axioms,
            source,
            ..Program::default()
        };
        for (i, c) in p.axioms.iter().enumerate() {
            let mut rels = BTreeSet::new();
            let mut constrained = BTreeSet::new();
            for l in &c.antecedent {
                if l.rel() == EQ {
                    p.with_eq.push(i);
                } else {
                    rels.insert(crate::syntax::sym(l.rel()));
                    constrained.extend(l.vars());
                }
            }
            for r in rels {
                p.by_rel.entry(r).or_default().push(i);
            }
            if c.context.iter().any(|v| !constrained.contains(v)) {
                p.ranging.push(i);
            }
        }
        p.with_eq.dedup();
        p
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// Index of the first rule that is not regular (exactly one disjunct).
    pub fn first_irregular(&self) -> Option<usize> {
        self.axioms.iter().position(|c| !c.is_regular())
    }

    /// Rules whose antecedent mentions `rel`.
    pub fn triggered_by(&self, rel: &str) -> &[usize] {
        self.by_rel.get(rel).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn ranging(&self) -> &[usize] {
        &self.ranging
    }

    pub fn with_equality(&self) -> &[usize] {
        &self.with_eq
    }
}

/// A match of a rule's antecedent: the substitution lists the images of the
/// rule's context variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Application {
    pub axiom: usize,
    pub subst: Vec<ElementId>,
    pub disjunct: usize,
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.subst.iter().map(ToString::to_string).collect();
        write!(f, "#{}[{}]/{}", self.axiom, s.join(","), self.disjunct)
    }
}

impl Application {
    pub fn env(&self, rule: &Canonical) -> Vec<(Sym, ElementId)> {
        rule.context.iter().cloned().zip(self.subst.iter().copied()).collect()
    }
}

/// Every antecedent match, ordered by (axiom index, substitution tuple).
pub fn applications(p: &Program, d: &Diagram) -> Vec<Application> {
    let mut out = Vec::new();
    for (i, c) in p.axioms.iter().enumerate() {
        for subst in d.matches(&c.antecedent, &c.context, &[]) {
            out.push(Application {
                axiom: i,
                subst,
                disjunct: 0,
            });
        }
    }
    out
}

/// Some disjunct of the consequent already holds under the substitution.
pub fn is_redundant(p: &Program, app: &Application, d: &Diagram) -> bool {
    let c = &p.axioms[app.axiom];
    let env = app.env(c);
    c.disjuncts.iter().any(|dj| d.has_witness(&dj.body, &dj.vars, &env))
}

/// Fires disjunct `app.disjunct` of an application: fresh elements for its
/// existential variables, then its body. Returns the new facts and elements.
pub fn fire(
    p: &Program,
    app: &Application,
    d: &mut Diagram,
    step: usize,
    origin: Origin,
) -> Result<(Vec<FactKey>, Vec<ElementId>), DiagramError> {
    let c = &p.axioms[app.axiom];
    let dj = &c.disjuncts[app.disjunct];
    let mut env = app.env(c);
    let deps = d.match_deps(&c.antecedent, &env, step);
    let names: Vec<String> = dj.vars.iter().map(|v| v.to_string()).collect();
    let fresh = if names.is_empty() {
        Vec::new()
    } else {
        d.fresh_elements(&names, deps.clone())
    };
    env.extend(dj.vars.iter().cloned().zip(fresh.iter().copied()));
    let prov = Prov { origin, deps };
    let added = d.add_lits(&dj.body, &env, &prov)?;
    Ok((added, fresh))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChaseStatus {
    Saturated,
    FuelExhausted,
    /// The halting relation became nonempty.
    Halted,
}

impl ChaseStatus {
    pub fn name(self) -> &'static str {
        match self {
            ChaseStatus::Saturated => "saturated",
            ChaseStatus::FuelExhausted => "fuel_exhausted",
            ChaseStatus::Halted => "halted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseStep {
    pub step: usize,
    pub app: Application,
    pub added: Vec<FactKey>,
    pub fresh: Vec<ElementId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChaseTrace {
    pub steps: Vec<ChaseStep>,
    pub schedule: String,
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub diagram: Diagram,
    pub trace: ChaseTrace,
    pub status: ChaseStatus,
    pub fuel_used: usize,
}

impl ChaseTrace {
    pub fn to_json(&self) -> Value {
        let ids = |v: &[ElementId]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        json!({
            "schedule": self.schedule,
            "steps": self.steps.iter().map(|s| json!({
                "step": s.step,
                "axiom": s.app.axiom,
                "subst": ids(&s.app.subst),
                "disjunct": s.app.disjunct,
                "added": s.added.iter().map(|(r, t)| json!({"rel": r.to_string(), "args": ids(t)})).collect::<Vec<_>>(),
                "fresh": ids(&s.fresh),
            })).collect::<Vec<_>>(),
        })
    }
}

impl ChaseResult {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.name(),
            "fuel_used": self.fuel_used,
            "diagram": self.diagram.to_json(),
            "trace": self.trace.to_json(),
        })
    }
}

/// What changed in a diagram since it was last saturated.
#[derive(Clone, Debug, Default)]
pub struct Dirty {
    pub rels: BTreeSet<Sym>,
    pub domain: bool,
    pub equality: bool,
}

#[derive(Clone, Debug)]
pub struct ChaseOptions {
    pub fuel: usize,
    /// Stop as soon as this relation holds.
    pub halt_on: Option<Sym>,
    /// When set, the input is assumed saturated apart from these changes.
    pub dirty: Option<Dirty>,
    pub record_trace: bool,
}

impl Default for ChaseOptions {
    fn default() -> Self {
        ChaseOptions {
            fuel: DEFAULT_FUEL,
            halt_on: None,
            dirty: None,
            record_trace: true,
        }
    }
}

pub const SCHEDULE: &str = "datalog-first; existential pass in (axiom, tuple) order; restricted";

pub fn chase_regular(p: &Program, d: &Diagram, fuel: usize) -> Result<ChaseResult, ChaseError> {
    chase_with(
        p,
        d,
        &ChaseOptions {
            fuel,
            ..ChaseOptions::default()
        },
    )
}

pub fn chase_with(p: &Program, d: &Diagram, opts: &ChaseOptions) -> Result<ChaseResult, ChaseError> {
    if opts.fuel == 0 {
        return Err(ChaseError::NoFuel);
    }
    if let Some(i) = p.first_irregular() {
        return Err(ChaseError::NotRegular(i, p.axioms[i].to_sequent().to_string()));
    }
    let mut state = State {
        p,
        d: d.clone(),
        stale: vec![opts.dirty.is_none(); p.len()],
        queue: if opts.dirty.is_none() {
            (0..p.len()).filter(|&i| p.axioms[i].is_existential_free()).collect()
        } else {
            BTreeSet::new()
        },
        trace: Vec::new(),
        fuel_left: opts.fuel,
        steps: 0,
        record: opts.record_trace,
    };
    if let Some(dirty) = &opts.dirty {
        state.mark(dirty);
    }
    let halted = |s: &State| opts.halt_on.as_ref().is_some_and(|r| s.d.has_relation(r));
    let status = loop {
        if halted(&state) {
            break ChaseStatus::Halted;
        }
        if let Some(status) = state.saturate_datalog(opts.halt_on.as_deref())? {
            break status;
        }
        if let Some(status) = state.existential_pass(opts.halt_on.as_deref())? {
            break status;
        }
        if !state.stale.iter().any(|&s| s) {
            break ChaseStatus::Saturated;
        }
    };
    Ok(ChaseResult {
        diagram: state.d,
        trace: ChaseTrace {
            steps: state.trace,
            schedule: SCHEDULE.to_string(),
        },
        status,
        fuel_used: opts.fuel - state.fuel_left,
    })
}

struct State<'a> {
    p: &'a Program,
    d: Diagram,
    stale: Vec<bool>,
    /// Stale existential-free rules.
    queue: BTreeSet<usize>,
    trace: Vec<ChaseStep>,
    fuel_left: usize,
    steps: usize,
    record: bool,
}

impl State<'_> {
    fn touch(&mut self, i: usize) {
        self.stale[i] = true;
        if self.p.axioms[i].is_existential_free() {
            self.queue.insert(i);
        }
    }

    fn mark(&mut self, dirty: &Dirty) {
        let p = self.p;
        if dirty.equality {
            (0..p.len()).for_each(|i| self.touch(i));
            return;
        }
        for r in &dirty.rels {
            for &i in p.triggered_by(r) {
                self.touch(i);
            }
        }
        if dirty.domain {
            for &i in p.ranging() {
                self.touch(i);
            }
        }
    }

    fn note(&mut self, added: &[FactKey], fresh: &[ElementId]) {
        let mut dirty = Dirty {
            domain: !fresh.is_empty(),
            ..Dirty::default()
        };
        for (r, args) in added {
            if &**r == EQ {
                if args.len() == 2 && args[0] != args[1] {
                    dirty.equality = true;
                }
            } else {
                dirty.rels.insert(r.clone());
            }
        }
        self.mark(&dirty);
    }

    fn apply(&mut self, app: Application) -> Result<(), ChaseError> {
        let axiom = app.axiom;
        let step = self.steps;
        let (added, fresh) = fire(self.p, &app, &mut self.d, step, Origin::Axiom { step, axiom })?;
        self.steps += 1;
        self.fuel_left -= 1;
        self.note(&added, &fresh);
        if self.record {
            self.trace.push(ChaseStep {
                step,
                app,
                added,
                fresh,
            });
        }
        Ok(())
    }

    fn pending(&self, i: usize) -> Vec<Application> {
        let c = &self.p.axioms[i];
        self.d
            .matches(&c.antecedent, &c.context, &[])
            .into_iter()
            .map(|subst| Application {
                axiom: i,
                subst,
                disjunct: 0,
            })
            .collect()
    }

    fn run_axiom(&mut self, i: usize, halt_on: Option<&str>) -> Result<Option<ChaseStatus>, ChaseError> {
        self.stale[i] = false;
        for app in self.pending(i) {
            let app = Application {
                subst: app.subst.iter().map(|&e| self.d.find(e)).collect(),
                ..app
            };
            if is_redundant(self.p, &app, &self.d) {
                continue;
            }
            if self.fuel_left == 0 {
                self.touch(i);
                return Ok(Some(ChaseStatus::FuelExhausted));
            }
            self.apply(app)?;
            if halt_on.is_some_and(|r| self.d.has_relation(r)) {
                return Ok(Some(ChaseStatus::Halted));
            }
        }
        Ok(None)
    }

    fn saturate_datalog(&mut self, halt_on: Option<&str>) -> Result<Option<ChaseStatus>, ChaseError> {
        loop {
            let Some(i) = self.queue.pop_first() else { return Ok(None) };
            if let Some(s) = self.run_axiom(i, halt_on)? {
                return Ok(Some(s));
            }
        }
    }

    fn existential_pass(&mut self, halt_on: Option<&str>) -> Result<Option<ChaseStatus>, ChaseError> {
        let todo: Vec<usize> = (0..self.p.len())
            .filter(|&i| self.stale[i] && !self.p.axioms[i].is_existential_free())
            .collect();
        for i in todo {
            if let Some(s) = self.run_axiom(i, halt_on)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}

/// Re-executes a trace from its input; the result must equal the chase output.
pub fn replay(p: &Program, input: &Diagram, trace: &ChaseTrace) -> Result<Diagram, ChaseError> {
    let steps: Vec<&ChaseStep> = trace.steps.iter().collect();
    let map: BTreeMap<ElementId, ElementId> = input.domain().map(|e| (e, e)).collect();
    Ok(replay_steps(p, input.clone(), &steps, map)?.0)
}

/// Replays `steps` on `start`, translating recorded elements through `map` and
/// extending it with the fresh elements created along the way. Each step's
/// antecedent must hold before it fires.
pub fn replay_steps(
    p: &Program,
    start: Diagram,
    steps: &[&ChaseStep],
    mut map: BTreeMap<ElementId, ElementId>,
) -> Result<(Diagram, BTreeMap<ElementId, ElementId>), ChaseError> {
    let mut d = start;
    for s in steps {
        let fail = |reason: String| ChaseError::Replay { step: s.step, reason };
        let c = p
            .axioms
            .get(s.app.axiom)
            .ok_or_else(|| fail(format!("no axiom {}", s.app.axiom)))?;
        if s.app.subst.len() != c.context.len() || s.app.disjunct >= c.disjuncts.len() {
            return Err(fail("application shape does not match the axiom".into()));
        }
        let subst = s
            .app
            .subst
            .iter()
            .map(|e| map.get(e).copied().ok_or_else(|| fail(format!("unknown element {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let app = Application {
            axiom: s.app.axiom,
            subst,
            disjunct: s.app.disjunct,
        };
        if !d.has_match(&c.antecedent, &app.env(c)) {
            return Err(fail("antecedent does not hold".into()));
        }
        let (_, fresh) = fire(p, &app, &mut d, s.step, Origin::Axiom { step: s.step, axiom: s.app.axiom })?;
        if fresh.len() != s.fresh.len() {
            return Err(fail("fresh element count differs".into()));
        }
        for (old, new) in s.fresh.iter().zip(fresh) {
            map.insert(*old, new);
        }
    }
    Ok((d, map))
}

/// Whether every application in `d` is redundant, i.e. `d` satisfies every rule.
pub fn is_model(p: &Program, d: &Diagram) -> bool {
    applications(p, d).iter().all(|a| is_redundant(p, a, d))
}

/// The facts of a trace step as ground literals, for diagnostics.
pub fn describe_step(p: &Program, s: &ChaseStep) -> String {
    let c = &p.axioms[s.app.axiom];
    format!("{} {} with {}", s.step, s.app, c.to_sequent())
}

/// Instantiates an application's chosen disjunct body under its substitution
/// and the given witnesses.
pub fn disjunct_instance(
    p: &Program,
    app: &Application,
    witness: &[ElementId],
) -> Result<Vec<FactKey>, DiagramError> {
    let c = &p.axioms[app.axiom];
    let dj = &c.disjuncts[app.disjunct];
    let mut env = app.env(c);
    env.extend(dj.vars.iter().cloned().zip(witness.iter().copied()));
    dj.body
        .iter()
        .map(|l| Ok((crate::syntax::sym(l.rel()), instantiate(l, &env)?)))
        .collect()
}
