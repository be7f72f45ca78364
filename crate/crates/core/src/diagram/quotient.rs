use std::collections::{BTreeMap, BTreeSet};

use super::{Diagram, DiagramError, ElementId};
use crate::syntax::{Formula, Sym};

/// A plain structure: congruence classes as elements, relations induced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    /// Class representatives, in creation order; element `i` is `elements[i]`.
    pub elements: Vec<ElementId>,
    pub relations: BTreeMap<Sym, BTreeSet<Vec<usize>>>,
    index: BTreeMap<ElementId, usize>,
}

impl Diagram {
    pub fn quotient(&self) -> Structure {
        let elements: Vec<ElementId> = self.reps().collect();
        let mut index = BTreeMap::new();
        for (i, c) in self.classes().enumerate() {
            for e in c {
                index.insert(*e, i);
            }
        }
        let mut relations: BTreeMap<Sym, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (r, t, _) in self.facts() {
            relations
                .entry(r.clone())
                .or_default()
                .insert(t.iter().map(|e| index[e]).collect());
        }
        Structure {
            elements,
            relations,
            index,
        }
    }
}

impl Structure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The class of a diagram element.
    pub fn class_of(&self, e: ElementId) -> Option<usize> {
        self.index.get(&e).copied()
    }

    pub fn holds(&self, rel: &str, args: &[usize]) -> bool {
        self.relations.get(rel).is_some_and(|s| s.contains(args))
    }

    /// Tarski satisfaction with `=` as identity.
    pub fn satisfies(&self, f: &Formula, assignment: &[(Sym, usize)], bottom: Option<&str>) -> Result<bool, DiagramError> {
        let mut env = assignment.to_vec();
        self.eval(f, &mut env, bottom)
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(Sym, usize)>, bottom: Option<&str>) -> Result<bool, DiagramError> {
        let look = |v: &Sym, env: &Vec<(Sym, usize)>| {
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
                let mut found = false;
                for e in 0..self.len() {
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
            Formula::Implies(..) | Formula::Forall(..) => return Err(DiagramError::NotPositive(f.to_string())),
        })
    }
}
