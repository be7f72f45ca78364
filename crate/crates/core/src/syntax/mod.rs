//! Relational first-order syntax with explicit contexts.
//!
//! Formulas carry variables only; there are no function symbols. The equality
//! symbol `=` is implicit in every signature. Fragment membership is computed
//! from the formula, never stored.

mod alpha;
mod normal;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

pub use alpha::{alpha_equal, alpha_key, alpha_normal};
pub use normal::{
    canonicalize, canonicalize_with_limit, normalize_sequent, normalize_sequent_with_limit,
    Canonical, Disjunct, Lit, NormalizeError, DEFAULT_NORMALIZE_LIMIT,
};
pub use parse::{parse_formula_in_context, parse_sequent, parse_theory, ParseError};
pub use print::print_theory;

/// Interned symbol used for variable and relation names.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// Name of the built-in equality symbol.
pub const EQ: &str = "=";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    relations: IndexMap<Sym, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("relation `{0}` is declared twice")]
    Duplicate(String),
    #[error("the equality symbol cannot be declared")]
    Equality,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if name == EQ {
            return Err(SignatureError::Equality);
        }
        if self.relations.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.relations.insert(sym(name), arity);
        Ok(())
    }

    pub fn with(mut self, name: &str, arity: usize) -> Self {
        self.declare(name, arity).expect("fresh relation");
        self
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        if name == EQ {
            return Some(2);
        }
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    /// Declared relations in declaration order (equality excluded).
    pub fn relations(&self) -> impl Iterator<Item = (&Sym, usize)> + '_ {
        self.relations.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Sym, Vec<Sym>),
    Eq(Sym, Sym),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Sym, Box<Formula>),
    Forall(Sym, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, args: &[&str]) -> Self {
        Formula::Atom(sym(rel), args.iter().map(|a| sym(a)).collect())
    }

    pub fn eq(a: &str, b: &str) -> Self {
        Formula::Eq(sym(a), sym(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(sym(v), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(sym(v), Box::new(body))
    }

    /// Left-nested conjunction; the empty conjunction is `⊤`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; the empty disjunction is `⊥`.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::Eq(..))
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => vec![],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
            Formula::Exists(_, b) | Formula::Forall(_, b) => vec![b],
        }
    }

    /// Nesting depth of connectives and quantifiers; atoms, `⊤` and `⊥` have depth 0.
    pub fn depth(&self) -> usize {
        self.children()
            .into_iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        canonical_context(self).into_iter().collect()
    }

    /// Every variable occurring in the formula, free or bound.
    pub fn all_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => out.extend(args.iter().cloned()),
            Formula::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                out.insert(v.clone());
                b.collect_all_vars(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
        }
    }

    /// Relation symbols used, excluding equality.
    pub fn relations(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(r, _) = f {
                out.insert(r.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn features(&self) -> Features {
        let mut feat = Features::default();
        self.visit(&mut |f| match f {
            Formula::Exists(..) => feat.exists = true,
            Formula::False => feat.bottom = true,
            Formula::Or(..) => feat.or = true,
            Formula::Implies(..) | Formula::Forall(..) => feat.first_order = true,
            _ => {}
        });
        feat
    }

    pub fn fragment(&self) -> Fragment {
        self.features().fragment()
    }

    /// Capture-avoiding renaming of free variables. Variables absent from `map` are kept.
    pub fn rename_free(&self, map: &dyn Fn(&Sym) -> Option<Sym>) -> Formula {
        let mut targets = BTreeSet::new();
        for v in self.free_vars() {
            if let Some(t) = map(&v) {
                targets.insert(t);
            }
        }
        let mut avoid = self.all_vars();
        avoid.extend(targets.iter().cloned());
        rename_rec(self, map, &targets, &mut avoid, &mut Vec::new())
    }

    pub fn substitute(&self, pairs: &[(Sym, Sym)]) -> Formula {
        self.rename_free(&|v: &Sym| pairs.iter().find(|(a, _)| a == v).map(|(_, b)| b.clone()))
    }
}

fn rename_rec(
    f: &Formula,
    map: &dyn Fn(&Sym) -> Option<Sym>,
    targets: &BTreeSet<Sym>,
    avoid: &mut BTreeSet<Sym>,
    bound: &mut Vec<(Sym, Sym)>,
) -> Formula {
    let look = |v: &Sym, bound: &Vec<(Sym, Sym)>| -> Sym {
        if let Some((_, to)) = bound.iter().rev().find(|(from, _)| from == v) {
            return to.clone();
        }
        map(v).unwrap_or_else(|| v.clone())
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(r, args) => {
            Formula::Atom(r.clone(), args.iter().map(|a| look(a, bound)).collect())
        }
        Formula::Eq(a, b) => Formula::Eq(look(a, bound), look(b, bound)),
        Formula::And(a, b) => Formula::and(
            rename_rec(a, map, targets, avoid, bound),
            rename_rec(b, map, targets, avoid, bound),
        ),
        Formula::Or(a, b) => Formula::or(
            rename_rec(a, map, targets, avoid, bound),
            rename_rec(b, map, targets, avoid, bound),
        ),
        Formula::Implies(a, b) => Formula::implies(
            rename_rec(a, map, targets, avoid, bound),
            rename_rec(b, map, targets, avoid, bound),
        ),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let new_v = if targets.contains(v) {
                let n = fresh_var(v, avoid);
                avoid.insert(n.clone());
                n
            } else {
                v.clone()
            };
            bound.push((v.clone(), new_v.clone()));
            let nb = rename_rec(body, map, targets, avoid, bound);
            bound.pop();
            match f {
                Formula::Exists(..) => Formula::Exists(new_v, Box::new(nb)),
                _ => Formula::Forall(new_v, Box::new(nb)),
            }
        }
    }
}

/// A variable named `base'n` for the least `n` not in `avoid`.
pub fn fresh_var(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    let stem = base.split('\'').next().unwrap_or(base);
    (1..)
        .map(|n| sym(&format!("{stem}'{n}")))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply")
}

/// Free variables in order of first appearance, without duplicates.
pub fn canonical_context(f: &Formula) -> Context {
    let mut out: Vec<Sym> = Vec::new();
    let mut bound: Vec<Sym> = Vec::new();
    first_appearance(f, &mut bound, &mut out);
    Context(out)
}

fn first_appearance(f: &Formula, bound: &mut Vec<Sym>, out: &mut Vec<Sym>) {
    let note = |v: &Sym, bound: &Vec<Sym>, out: &mut Vec<Sym>| {
        if !bound.contains(v) && !out.contains(v) {
            out.push(v.clone());
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(_, args) => args.iter().for_each(|a| note(a, bound, out)),
        Formula::Eq(a, b) => {
            note(a, bound, out);
            note(b, bound, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            first_appearance(a, bound, out);
            first_appearance(b, bound, out);
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            bound.push(v.clone());
            first_appearance(b, bound, out);
            bound.pop();
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Features {
    pub exists: bool,
    pub bottom: bool,
    pub or: bool,
    pub first_order: bool,
}

impl Features {
    pub fn join(self, o: Features) -> Features {
        Features {
            exists: self.exists || o.exists,
            bottom: self.bottom || o.bottom,
            or: self.or || o.or,
            first_order: self.first_order || o.first_order,
        }
    }

    pub fn fragment(self) -> Fragment {
        if self.first_order {
            Fragment::FirstOrder
        } else if self.or && self.bottom {
            Fragment::Coherent
        } else if self.or {
            Fragment::PositiveCoherent
        } else if self.bottom {
            Fragment::RegularBot
        } else if self.exists {
            Fragment::Regular
        } else {
            Fragment::Horn
        }
    }
}

/// The strictest named fragment containing a formula or theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fragment {
    Horn,
    Regular,
    RegularBot,
    PositiveCoherent,
    Coherent,
    FirstOrder,
}

impl Fragment {
    /// Inclusion of fragments, which is a partial order.
    pub fn within(self, other: Fragment) -> bool {
        use Fragment::*;
        match (self, other) {
            (a, b) if a == b => true,
            (_, FirstOrder) => true,
            (FirstOrder, _) => false,
            (_, Coherent) => true,
            (Coherent, _) => false,
            (Horn, _) => true,
            (Regular, RegularBot | PositiveCoherent) => true,
            _ => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Horn => "horn",
            Fragment::Regular => "regular",
            Fragment::RegularBot => "regular_bot",
            Fragment::PositiveCoherent => "positive_coherent",
            Fragment::Coherent => "coherent",
            Fragment::FirstOrder => "first_order",
        }
    }
}

/// An ordered list of distinct variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context(pub Vec<Sym>);

impl Context {
    pub fn new(vars: Vec<Sym>) -> Result<Self, String> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.clone()) {
                return Err(format!("variable `{v}` repeated in context"));
            }
        }
        Ok(Context(vars))
    }

    pub fn of(vars: &[&str]) -> Self {
        Context::new(vars.iter().map(|v| sym(v)).collect()).expect("distinct variables")
    }

    pub fn vars(&self) -> &[Sym] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.iter().any(|x| &**x == v)
    }

    /// True iff every free variable of `f` is listed.
    pub fn covers(&self, f: &Formula) -> bool {
        f.free_vars().iter().all(|v| self.contains(v))
    }
}

impl IntoIterator for Context {
    type Item = Sym;
    type IntoIter = std::vec::IntoIter<Sym>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// `antecedent ⊢_context consequent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub antecedent: Formula,
    pub consequent: Formula,
    pub context: Context,
}

impl Sequent {
    /// A sequent in the default context: free variables of the antecedent, then
    /// those of the consequent, in order of first appearance.
    pub fn new(antecedent: Formula, consequent: Formula) -> Self {
        let context = default_context(&antecedent, &consequent);
        Sequent {
            antecedent,
            consequent,
            context,
        }
    }

    pub fn with_context(antecedent: Formula, consequent: Formula, context: Context) -> Self {
        Sequent {
            antecedent,
            consequent,
            context,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.context.covers(&self.antecedent) && self.context.covers(&self.consequent)
    }

    pub fn features(&self) -> Features {
        self.antecedent.features().join(self.consequent.features())
    }

    pub fn fragment(&self) -> Fragment {
        self.features().fragment()
    }

    /// `⊤ ⊢ ∃x. x = x`.
    pub fn habitative() -> Self {
        Sequent::new(Formula::True, Formula::exists("x", Formula::eq("x", "x")))
    }
}

pub fn default_context(antecedent: &Formula, consequent: &Formula) -> Context {
    let mut vars = canonical_context(antecedent).0;
    for v in canonical_context(consequent).0 {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    Context(vars)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub name: Option<String>,
    pub signature: Signature,
    pub axioms: Vec<Sequent>,
}

impl Theory {
    pub fn new(signature: Signature) -> Self {
        Theory {
            name: None,
            signature,
            axioms: Vec::new(),
        }
    }

    pub fn with_axiom(mut self, s: Sequent) -> Self {
        self.axioms.push(s);
        self
    }

    /// Strictest fragment containing every axiom.
    pub fn fragment(&self) -> Fragment {
        self.axioms
            .iter()
            .fold(Features::default(), |acc, s| acc.join(s.features()))
            .fragment()
    }

    /// Whether `⊤ ⊢ ∃x. x = x` is an axiom, up to α-equivalence.
    pub fn is_habitative(&self) -> bool {
        let h = Sequent::habitative();
        self.axioms.iter().any(|s| {
            s.antecedent == Formula::True
                && s.context.is_empty()
                && alpha_equal((&Context::default(), &s.consequent), (&h.context, &h.consequent))
        })
    }

    /// Relations mentioned by axioms that the signature does not declare.
    pub fn undeclared(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for s in &self.axioms {
            for r in s.antecedent.relations().into_iter().chain(s.consequent.relations()) {
                if !self.signature.contains(&r) {
                    out.insert(r);
                }
            }
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::formula_to_string(self))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|v| &**v).collect();
        write!(f, "[{}]", names.join(", "))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::sequent_to_string(self))
    }
}
