//! Morleyization: every formula of a finite subformula closure gets a fresh
//! relation symbol `P_φ` whose arity is the length of `φ`'s canonical context,
//! and the connectives are axiomatised over those symbols.

use std::collections::{BTreeMap, HashMap};

use sha2::{Digest, Sha256};

use crate::syntax::{alpha_key, canonical_context, sym, Context, Formula, Sequent, Signature, Sym, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Regular,
    Coherent,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Regular => "regular",
            Target::Coherent => "coherent",
        }
    }
}

/// The schema an emitted axiom instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    Thry,
    Atom,
    True,
    Conj,
    Exist,
    Disj,
    False,
    Connective,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MorleyError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("`{rel}` takes {expected} arguments, got {got}")]
    Arity { rel: String, expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    /// The first representative met; its free variables are `context`.
    pub formula: Formula,
    pub context: Context,
    pub name: Sym,
}

/// The closure with its predicate names, indexed by α-class.
#[derive(Clone, Debug, Default)]
pub struct MorleyMap {
    entries: Vec<Entry>,
    by_key: HashMap<String, usize>,
    by_name: HashMap<Sym, usize>,
}

fn key_of(f: &Formula) -> String {
    alpha_key(&canonical_context(f), f)
}

/// `P#` followed by 12 hex digits of the SHA-256 of the α-normal form.
pub fn predicate_name(f: &Formula) -> Sym {
    sym(&format!("P#{}", &hex(&key_of(f))[..12]))
}

fn hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl MorleyMap {
    /// Adds `f` unless an α-equivalent formula is present; returns its index.
    fn insert(&mut self, f: &Formula, taken: &Signature) -> usize {
        let key = key_of(f);
        if let Some(&i) = self.by_key.get(&key) {
            return i;
        }
        let digest = hex(&key);
        let name = (12..=digest.len())
            .map(|n| sym(&format!("P#{}", &digest[..n])))
            .find(|n| !self.by_name.contains_key(n) && !taken.contains(n))
            .expect("sha-256 prefixes are distinct");
        let i = self.entries.len();
        self.by_key.insert(key, i);
        self.by_name.insert(name.clone(), i);
        self.entries.push(Entry {
            formula: f.clone(),
            context: canonical_context(f),
            name,
        });
        i
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.by_key.get(&key_of(f)).copied()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index_of(f).is_some()
    }

    pub fn name_of(&self, f: &Formula) -> Option<&Sym> {
        self.index_of(f).map(|i| &self.entries[i].name)
    }

    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.by_name.get(name).map(|&i| &self.entries[i])
    }

    /// `P_f` applied to the canonical context of `f` itself.
    pub fn atom(&self, f: &Formula) -> Option<Formula> {
        let name = self.name_of(f)?;
        Some(Formula::Atom(name.clone(), canonical_context(f).0))
    }

    /// Predicate name to formula text, in closure order.
    pub fn aliases(&self) -> Vec<(Sym, String)> {
        self.entries.iter().map(|e| (e.name.clone(), e.formula.to_string())).collect()
    }
}

fn preorder(f: &Formula, out: &mut Vec<Formula>) {
    out.push(f.clone());
    for c in f.children() {
        preorder(c, out);
    }
}

/// Subformulas of the axioms (antecedent before consequent, pre-order), then
/// of `extras`, one representative per α-class.
pub fn subformula_closure(t: &Theory, extras: &[Formula]) -> Vec<Formula> {
    closure_map(t, extras).entries.into_iter().map(|e| e.formula).collect()
}

fn closure_map(t: &Theory, extras: &[Formula]) -> MorleyMap {
    let mut all = Vec::new();
    for s in &t.axioms {
        preorder(&s.antecedent, &mut all);
        preorder(&s.consequent, &mut all);
    }
    for f in extras {
        preorder(f, &mut all);
    }
    let mut m = MorleyMap::default();
    for f in &all {
        m.insert(f, &t.signature);
    }
    m
}

#[derive(Clone, Debug)]
pub struct MorleyTheory {
    pub base: Theory,
    pub result: Theory,
    pub map: MorleyMap,
    pub target: Target,
    /// Schema of each axiom of `result`, position by position.
    pub tags: Vec<Schema>,
}

impl MorleyTheory {
    /// The Morleyized form `P_φ ⊢_x P_ψ` of a sequent whose sides are in the closure.
    pub fn translate(&self, s: &Sequent) -> Option<Sequent> {
        Some(Sequent::with_context(
            self.map.atom(&s.antecedent)?,
            self.map.atom(&s.consequent)?,
            s.context.clone(),
        ))
    }

    pub fn count(&self, schema: Schema) -> usize {
        self.tags.iter().filter(|&&t| t == schema).count()
    }
}

/// Morleyizes `t` over the closure of its axioms and `extras`.
///
/// Axioms are emitted in this order:
/// 1. `P_φ ⊢_x P_ψ` for each axiom `φ ⊢_x ψ`;
/// 2. `⊤ ⊢_x P_{φ→ψ}` for each axiom `φ ⊢_x ψ` whose implication is in the closure;
/// 3. per closure member in closure order, the connective rules: both
///    `∨`-introductions, modus ponens `P_φ ∧ P_{φ→ψ} ⊢ P_ψ`, weakening
///    `P_ψ ⊢ P_{φ→ψ}`, `∀`-elimination
///    `P_{∀yφ} ⊢_{y,x} P_φ`, and `P_⊥ ⊢ P_φ` for every other member when `⊥`
///    is in the closure;
/// 4. per closure member, both directions of its defining schema (Atom, True,
///    Conj, Exist; Disj and False only for the coherent target).
///
/// Hence `|result| = |t| + |implications of axioms in the closure| + 2·|∨|
/// + 2·|→| + |∀| + (|closure| − 1)·[⊥ ∈ closure] + 2·|atomic, ⊤, ∧, ∃|
/// + [coherent]·2·|∨, ⊥|`, with `|c|` counting closure members of each shape.
pub fn morleyize(t: &Theory, extras: &[Formula], target: Target) -> MorleyTheory {
    let map = closure_map(t, extras);
    let mut sig = t.signature.clone();
    for e in map.entries() {
        sig.declare(&e.name, e.context.len()).expect("fresh predicate names");
    }
    let p = |f: &Formula| map.atom(f).expect("closure member");
    let mut out: Vec<(Sequent, Schema)> = Vec::new();
    let mut emit = |a: Formula, c: Formula, ctx: Vec<Sym>, tag: Schema| {
        out.push((Sequent::with_context(a, c, Context(ctx)), tag));
    };

    for s in &t.axioms {
        emit(p(&s.antecedent), p(&s.consequent), s.context.0.clone(), Schema::Thry);
    }
    for s in &t.axioms {
        let imp = Formula::implies(s.antecedent.clone(), s.consequent.clone());
        if map.contains(&imp) {
            emit(Formula::True, p(&imp), s.context.0.clone(), Schema::Thry);
        }
    }

    let bottom = map.contains(&Formula::False);
    for e in map.entries() {
        let f = &e.formula;
        let ctx = e.context.0.clone();
        match f {
            Formula::Or(a, b) => {
                emit(p(a), p(f), ctx.clone(), Schema::Connective);
                emit(p(b), p(f), ctx.clone(), Schema::Connective);
            }
            Formula::Implies(a, b) => {
                emit(Formula::and(p(a), p(f)), p(b), ctx.clone(), Schema::Connective);
                emit(p(b), p(f), ctx.clone(), Schema::Connective);
            }
            Formula::Forall(y, body) => {
                let mut with_y = vec![y.clone()];
                with_y.extend(ctx.iter().cloned());
                emit(p(f), p(body), with_y, Schema::Connective);
            }
            _ => {}
        }
        if bottom && *f != Formula::False {
            emit(p(&Formula::False), p(f), ctx, Schema::Connective);
        }
    }

    for e in map.entries() {
        let f = &e.formula;
        let ctx = e.context.0.clone();
        let mut both = |rhs: Formula, tag: Schema| {
            emit(p(f), rhs.clone(), ctx.clone(), tag);
            emit(rhs, p(f), ctx.clone(), tag);
        };
        match f {
            Formula::Atom(..) | Formula::Eq(..) => both(f.clone(), Schema::Atom),
            Formula::True => both(Formula::True, Schema::True),
            Formula::And(a, b) => both(Formula::and(p(a), p(b)), Schema::Conj),
            Formula::Exists(y, body) => both(Formula::Exists(y.clone(), Box::new(p(body))), Schema::Exist),
            Formula::Or(a, b) if target == Target::Coherent => both(Formula::or(p(a), p(b)), Schema::Disj),
            Formula::False if target == Target::Coherent => both(Formula::False, Schema::False),
            _ => {}
        }
    }

    let (axioms, tags) = out.into_iter().unzip();
    MorleyTheory {
        base: t.clone(),
        result: Theory {
            name: t.name.as_ref().map(|n| format!("{n}_m")),
            signature: sig,
            axioms,
        },
        map,
        target,
        tags,
    }
}

/// The formula a `Σᵐ` fact stands for: `φ` with the fact's arguments for its
/// canonical context; base relations map to themselves.
pub fn demorleyize_fact(m: &MorleyMap, base: &Signature, rel: &str, args: &[Sym]) -> Result<Formula, MorleyError> {
    if let Some(e) = m.entry(rel) {
        if e.context.len() != args.len() {
            return Err(MorleyError::Arity {
                rel: rel.into(),
                expected: e.context.len(),
                got: args.len(),
            });
        }
        let pairs: Vec<(Sym, Sym)> = e.context.0.iter().cloned().zip(args.iter().cloned()).collect();
        return Ok(e.formula.substitute(&pairs));
    }
    match base.arity(rel) {
        Some(n) if n == args.len() => Ok(Formula::Atom(sym(rel), args.to_vec())),
        Some(n) => Err(MorleyError::Arity {
            rel: rel.into(),
            expected: n,
            got: args.len(),
        }),
        None => Err(MorleyError::UnknownRelation(rel.into())),
    }
}

/// Rewrites a regular `Σᵐ` formula whose pieces are closure members to a
/// single `P`-atom, following the Atom, True, Conj and Exist schemas backwards.
pub fn fold_to_atom(m: &MorleyMap, base: &Signature, f: &Formula) -> Option<Formula> {
    let unfold = |g: &Formula| -> Option<Formula> {
        let Formula::Atom(r, args) = fold_to_atom(m, base, g)? else {
            return None;
        };
        demorleyize_fact(m, base, &r, &args).ok()
    };
    let source = match f {
        Formula::Atom(r, _) if m.entry(r).is_some() => return Some(f.clone()),
        Formula::Atom(..) | Formula::Eq(..) | Formula::True => f.clone(),
        Formula::And(a, b) => Formula::and(unfold(a)?, unfold(b)?),
        Formula::Exists(y, body) => Formula::Exists(y.clone(), Box::new(unfold(body)?)),
        _ => return None,
    };
    m.atom(&source)
}

/// Alias table as a name-to-text map.
pub fn alias_table(m: &MorleyMap) -> BTreeMap<String, String> {
    m.aliases().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
