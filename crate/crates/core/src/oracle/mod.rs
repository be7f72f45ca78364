//! Brute-force validity over all small diagrams.
//!
//! A diagram satisfies a formula iff its quotient by the equality congruence
//! does, so `valid` enumerates quotient structures on `0..n` directly and
//! evaluates formulas classically with its own bitset interpretation.
//! `all_diagrams` additionally enumerates the equality partitions.

use std::collections::BTreeMap;

use crate::diagram::{Diagram, ElementId};
use crate::syntax::{Formula, Sequent, Signature, Sym, Theory, EQ};

pub const MAX_SIZE: usize = 4;
pub const MAX_FACT_BITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("domain bound {0} exceeds {MAX_SIZE}")]
    TooLarge(usize),
    #[error("fact space of {0} bits exceeds {MAX_FACT_BITS}")]
    TooManyFacts(usize),
    #[error("relation `{0}` is not in the signature")]
    Undeclared(String),
    #[error("variable `{0}` is unbound")]
    Unbound(String),
}

/// Number of ground facts over `n` elements.
fn fact_bits(sig: &Signature, n: usize) -> usize {
    sig.relations().map(|(_, a)| n.pow(a as u32)).sum()
}

fn check_bound(sig: &Signature, k: usize) -> Result<(), OracleError> {
    if k > MAX_SIZE {
        return Err(OracleError::TooLarge(k));
    }
    let bits = fact_bits(sig, k);
    if bits > MAX_FACT_BITS {
        return Err(OracleError::TooManyFacts(bits));
    }
    Ok(())
}

/// A finite structure on `0..size` with each relation as a bitset over
/// tuples in base-`size` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finite {
    pub size: usize,
    rels: BTreeMap<Sym, (usize, u64)>,
}

impl Finite {
    /// Structure number `mask` in the enumeration order of `sig` at this size.
    fn decode(sig: &Signature, size: usize, mut mask: u64) -> Finite {
        let mut rels = BTreeMap::new();
        for (r, a) in sig.relations() {
            let width = size.pow(a as u32);
            let bits = if width == 0 { 0 } else { mask & ((1u64 << width) - 1) };
            mask >>= width;
            rels.insert(r.clone(), (a, bits));
        }
        Finite { size, rels }
    }

    fn index(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &x| acc * self.size + x)
    }

    pub fn holds(&self, rel: &str, args: &[usize]) -> bool {
        self.rels
            .get(rel)
            .is_some_and(|(a, bits)| *a == args.len() && bits >> self.index(args) & 1 == 1)
    }

    /// Classical satisfaction under `env`.
    pub fn eval(&self, f: &Formula, env: &mut Vec<(Sym, usize)>) -> Result<bool, OracleError> {
        let look = |v: &Sym, env: &Vec<(Sym, usize)>| {
            env.iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, x)| *x)
                .ok_or_else(|| OracleError::Unbound(v.to_string()))
        };
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => look(a, env)? == look(b, env)?,
            Formula::Atom(r, args) => {
                if !self.rels.contains_key(r) {
                    return Err(OracleError::Undeclared(r.to_string()));
                }
                let t = args.iter().map(|a| look(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.holds(r, &t)
            }
            Formula::And(a, b) => self.eval(a, env)? && self.eval(b, env)?,
            Formula::Or(a, b) => self.eval(a, env)? || self.eval(b, env)?,
            Formula::Implies(a, b) => !self.eval(a, env)? || self.eval(b, env)?,
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                let want = matches!(f, Formula::Exists(..));
                for x in 0..self.size {
                    env.push((v.clone(), x));
                    let r = self.eval(b, env);
                    env.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                !want
            }
        })
    }

    /// A context assignment violating the sequent, if any.
    pub fn counterexample(&self, s: &Sequent) -> Result<Option<Vec<usize>>, OracleError> {
        let vars = s.context.vars();
        let mut tuple = vec![0usize; vars.len()];
        if !vars.is_empty() && self.size == 0 {
            return Ok(None);
        }
        loop {
            let mut env: Vec<(Sym, usize)> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
            if self.eval(&s.antecedent, &mut env)? && !self.eval(&s.consequent, &mut env)? {
                return Ok(Some(tuple));
            }
            if !advance(&mut tuple, self.size) {
                return Ok(None);
            }
        }
    }

    pub fn satisfies(&self, s: &Sequent) -> Result<bool, OracleError> {
        Ok(self.counterexample(s)?.is_none())
    }

    /// The structure as a diagram on elements `e0_i`.
    pub fn to_diagram(&self) -> Diagram {
        let mut d = Diagram::new();
        let ids: Vec<ElementId> = (0..self.size).map(|i| d.add_input(&format!("c{i}"))).collect();
        for (r, (a, _)) in &self.rels {
            let mut t = vec![0usize; *a];
            if self.size == 0 && *a > 0 {
                continue;
            }
            loop {
                if self.holds(r, &t) {
                    let args: Vec<ElementId> = t.iter().map(|&i| ids[i]).collect();
                    d.add_input_fact(r, &args).expect("declared relation");
                }
                if !advance(&mut t, self.size) {
                    break;
                }
            }
        }
        d
    }
}

/// Next tuple in lexicographic order; false after the last.
fn advance(t: &mut [usize], base: usize) -> bool {
    for x in t.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

/// Every structure with at most `k` elements, by size then bitmask.
pub fn structures(sig: &Signature, k: usize) -> Result<impl Iterator<Item = Finite> + '_, OracleError> {
    check_bound(sig, k)?;
    Ok((0..=k).flat_map(move |n| {
        let bits = fact_bits(sig, n);
        (0..1u64 << bits).map(move |m| Finite::decode(sig, n, m))
    }))
}

/// Set partitions of `0..n` as restricted growth strings.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            cur.push(c);
            go(n, cur, out);
            cur.pop();
        }
    }
    go(n, &mut cur, &mut out);
    out
}

/// Every diagram on elements `e0_0 … e0_{n-1}` for `n ≤ k`: each equality
/// partition with each congruence-closed fact set, once.
pub fn all_diagrams(sig: &Signature, k: usize) -> Result<impl Iterator<Item = Diagram> + '_, OracleError> {
    check_bound(sig, k)?;
    Ok((0..=k).flat_map(move |n| {
        partitions(n).into_iter().flat_map(move |part| {
            let classes = part.iter().max().map_or(0, |m| m + 1);
            let bits = fact_bits(sig, classes);
            (0..1u64 << bits).map(move |m| {
                let q = Finite::decode(sig, classes, m);
                let mut d = Diagram::new();
                let ids: Vec<ElementId> = (0..n).map(|i| d.add_input(&format!("c{i}"))).collect();
                let rep: Vec<ElementId> = (0..classes)
                    .map(|c| ids[part.iter().position(|&p| p == c).expect("restricted growth")])
                    .collect();
                for (i, &c) in part.iter().enumerate() {
                    if ids[i] != rep[c] {
                        d.add_input_fact(EQ, &[rep[c], ids[i]]).expect("elements exist");
                    }
                }
                let qd = q.to_diagram();
                for (r, t, _) in qd.facts() {
                    let args: Vec<ElementId> = t.iter().map(|e| rep[e.serial as usize]).collect();
                    d.add_input_fact(r, &args).expect("declared relation");
                }
                d
            })
        })
    }))
}

/// A structure of at most `k` elements modelling `t` and refuting `s`, with
/// the refuting assignment.
pub fn refute(t: &Theory, s: &Sequent, k: usize) -> Result<Option<(Finite, Vec<usize>)>, OracleError> {
    for m in structures(&t.signature, k)? {
        let mut model = true;
        for a in &t.axioms {
            if !m.satisfies(a)? {
                model = false;
                break;
            }
        }
        if !model {
            continue;
        }
        if let Some(c) = m.counterexample(s)? {
            return Ok(Some((m, c)));
        }
    }
    Ok(None)
}

/// Whether `s` holds in every model of `t` with at most `k` elements.
pub fn valid(t: &Theory, s: &Sequent, k: usize) -> Result<bool, OracleError> {
    Ok(refute(t, s, k)?.is_none())
}
