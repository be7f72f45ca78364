//! Canonical-form normalization of coherent sequents.
//!
//! Output shape: `φ ⊢_x ∃y₀ψ₀ ∨ … ∨ ∃yₙψₙ` or `φ ⊢_x ⊥`, with `φ`, `ψᵢ` Horn.

use std::collections::BTreeSet;

use super::{fresh_var, Context, Formula, Sequent, Sym, EQ};

pub const DEFAULT_NORMALIZE_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("sequent is not coherent (contains -> or forall): {0}")]
    NotCoherent(String),
    #[error("normalization produced more than {0} sequents or disjuncts")]
    TooLarge(usize),
    #[error("context does not cover the free variables of {0}")]
    BadContext(String),
}

/// An atomic formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Rel(Sym, Vec<Sym>),
    Eq(Sym, Sym),
}

impl Lit {
    pub fn vars(&self) -> Vec<Sym> {
        match self {
            Lit::Rel(_, args) => args.clone(),
            Lit::Eq(a, b) => vec![a.clone(), b.clone()],
        }
    }

    pub fn rel(&self) -> &str {
        match self {
            Lit::Rel(r, _) => r,
            Lit::Eq(..) => EQ,
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            Lit::Rel(r, a) => Formula::Atom(r.clone(), a.clone()),
            Lit::Eq(a, b) => Formula::Eq(a.clone(), b.clone()),
        }
    }

    fn rename(&self, from: &Sym, to: &Sym) -> Lit {
        let r = |v: &Sym| if v == from { to.clone() } else { v.clone() };
        match self {
            Lit::Rel(n, a) => Lit::Rel(n.clone(), a.iter().map(r).collect()),
            Lit::Eq(a, b) => Lit::Eq(r(a), r(b)),
        }
    }
}

/// `∃vars. ⋀ body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Disjunct {
    pub vars: Vec<Sym>,
    pub body: Vec<Lit>,
}

impl Disjunct {
    pub fn to_formula(&self) -> Formula {
        let body = Formula::conj(self.body.iter().map(Lit::to_formula));
        self.vars
            .iter()
            .rev()
            .fold(body, |acc, v| Formula::Exists(v.clone(), Box::new(acc)))
    }

    fn rename_bound(&mut self, from: &Sym, to: &Sym) {
        for v in self.vars.iter_mut() {
            if v == from {
                *v = to.clone();
            }
        }
        self.body = self.body.iter().map(|l| l.rename(from, to)).collect();
    }
}

/// A sequent in canonical form. An empty disjunct list denotes `⊥`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Canonical {
    pub context: Vec<Sym>,
    pub antecedent: Vec<Lit>,
    pub disjuncts: Vec<Disjunct>,
}

impl Canonical {
    pub fn to_sequent(&self) -> Sequent {
        Sequent {
            antecedent: Formula::conj(self.antecedent.iter().map(Lit::to_formula)),
            consequent: Formula::disj(self.disjuncts.iter().map(Disjunct::to_formula)),
            context: Context(self.context.clone()),
        }
    }

    pub fn is_regular(&self) -> bool {
        self.disjuncts.len() == 1
    }

    /// No fresh witnesses are ever created by this sequent.
    pub fn is_existential_free(&self) -> bool {
        self.disjuncts.iter().all(|d| d.vars.is_empty())
    }
}

pub fn normalize_sequent(s: &Sequent) -> Result<Vec<Sequent>, NormalizeError> {
    normalize_sequent_with_limit(s, DEFAULT_NORMALIZE_LIMIT)
}

pub fn normalize_sequent_with_limit(s: &Sequent, limit: usize) -> Result<Vec<Sequent>, NormalizeError> {
    Ok(canonicalize_with_limit(s, limit)?
        .iter()
        .map(Canonical::to_sequent)
        .collect())
}

pub fn canonicalize(s: &Sequent) -> Result<Vec<Canonical>, NormalizeError> {
    canonicalize_with_limit(s, DEFAULT_NORMALIZE_LIMIT)
}

pub fn canonicalize_with_limit(s: &Sequent, limit: usize) -> Result<Vec<Canonical>, NormalizeError> {
    if s.features().first_order {
        return Err(NormalizeError::NotCoherent(s.to_string()));
    }
    if !s.is_well_formed() {
        return Err(NormalizeError::BadContext(s.to_string()));
    }
    let mut used: BTreeSet<Sym> = s.context.vars().iter().cloned().collect();
    used.extend(s.antecedent.all_vars());
    used.extend(s.consequent.all_vars());

    let left = dnf(&s.antecedent, &mut used, limit)?;
    let right = dnf(&s.consequent, &mut used, limit)?;
    let mut out = Vec::new();
    for (vars, body) in left {
        let mut context = s.context.vars().to_vec();
        let mut body = body;
        for v in vars {
            if context.contains(&v) {
                let n = fresh_var(&v, &used);
                used.insert(n.clone());
                body = body.iter().map(|l| l.rename(&v, &n)).collect();
                context.push(n);
            } else {
                context.push(v);
            }
        }
        let mut disjuncts: Vec<Disjunct> = right
            .iter()
            .map(|(vars, body)| Disjunct { vars: vars.clone(), body: body.clone() })
            .collect();
        for d in disjuncts.iter_mut() {
            for v in d.vars.clone() {
                if context.contains(&v) {
                    let n = fresh_var(&v, &used);
                    used.insert(n.clone());
                    d.rename_bound(&v, &n);
                }
            }
        }
        out.push(Canonical {
            context,
            antecedent: body,
            disjuncts,
        });
        if out.len() > limit {
            return Err(NormalizeError::TooLarge(limit));
        }
    }
    Ok(out)
}

type Dnf = Vec<(Vec<Sym>, Vec<Lit>)>;

fn dnf(f: &Formula, used: &mut BTreeSet<Sym>, limit: usize) -> Result<Dnf, NormalizeError> {
    Ok(match f {
        Formula::True => vec![(vec![], vec![])],
        Formula::False => vec![],
        Formula::Atom(r, a) => vec![(vec![], vec![Lit::Rel(r.clone(), a.clone())])],
        Formula::Eq(a, b) => vec![(vec![], vec![Lit::Eq(a.clone(), b.clone())])],
        Formula::Or(a, b) => {
            let mut l = dnf(a, used, limit)?;
            l.extend(dnf(b, used, limit)?);
            if l.len() > limit {
                return Err(NormalizeError::TooLarge(limit));
            }
            l
        }
        Formula::And(a, b) => {
            let l = dnf(a, used, limit)?;
            let r = dnf(b, used, limit)?;
            if l.len().saturating_mul(r.len()) > limit {
                return Err(NormalizeError::TooLarge(limit));
            }
            let mut out = Vec::with_capacity(l.len() * r.len());
            for (lv, lb) in &l {
                for (rv, rb) in &r {
                    let mut rv = rv.clone();
                    let mut rb = rb.clone();
                    let left_vars: BTreeSet<Sym> = lv
                        .iter()
                        .cloned()
                        .chain(lb.iter().flat_map(Lit::vars))
                        .collect();
                    for v in rv.clone() {
                        if left_vars.contains(&v) {
                            let n = fresh_var(&v, used);
                            used.insert(n.clone());
                            let mut d = Disjunct { vars: rv, body: rb };
                            d.rename_bound(&v, &n);
                            rv = d.vars;
                            rb = d.body;
                        }
                    }
                    // The right side's free variables must not be captured by the left's binders.
                    let right_free: BTreeSet<Sym> = rb
                        .iter()
                        .flat_map(Lit::vars)
                        .filter(|v| !rv.contains(v))
                        .collect();
                    let mut lv = lv.clone();
                    let mut lb = lb.clone();
                    for v in lv.clone() {
                        if right_free.contains(&v) || rv.contains(&v) {
                            let n = fresh_var(&v, used);
                            used.insert(n.clone());
                            let mut d = Disjunct { vars: lv, body: lb };
                            d.rename_bound(&v, &n);
                            lv = d.vars;
                            lb = d.body;
                        }
                    }
                    let mut vars = lv;
                    vars.extend(rv);
                    let mut body = lb;
                    body.extend(rb);
                    out.push((vars, body));
                }
            }
            out
        }
        Formula::Exists(v, b) => {
            let inner = dnf(b, used, limit)?;
            inner
                .into_iter()
                .map(|(vars, body)| {
                    let mut d = Disjunct { vars, body };
                    if d.vars.contains(v) {
                        let n = fresh_var(v, used);
                        used.insert(n.clone());
                        d.rename_bound(v, &n);
                    }
                    let mut vars = vec![v.clone()];
                    vars.extend(d.vars);
                    (vars, d.body)
                })
                .collect()
        }
        Formula::Forall(..) | Formula::Implies(..) => {
            return Err(NormalizeError::NotCoherent(f.to_string()))
        }
    })
}
