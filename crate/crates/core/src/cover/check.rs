//! Certificate checking by replay over plain string-labelled structures.
//!
//! Nothing here touches `Diagram` or the search: elements are the strings
//! found in the certificate, equality is a naive union-find, and facts are
//! renormalised after every merge.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use crate::syntax::{canonicalize, Canonical, Lit, Sequent, Theory, EQ};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("invalid certificate: {0}")]
    Invalid(String),
}

fn malformed(m: impl Into<String>) -> CertificateError {
    CertificateError::Malformed(m.into())
}

fn invalid(m: impl Into<String>) -> CertificateError {
    CertificateError::Invalid(m.into())
}

#[derive(Clone, Debug, Default)]
struct Naive {
    parent: BTreeMap<String, String>,
    facts: BTreeSet<(String, Vec<String>)>,
}

impl Naive {
    fn has(&self, e: &str) -> bool {
        self.parent.contains_key(e)
    }

    fn add(&mut self, e: &str) {
        self.parent.entry(e.to_string()).or_insert_with(|| e.to_string());
    }

    fn find(&self, e: &str) -> String {
        let mut at = e.to_string();
        while let Some(p) = self.parent.get(&at) {
            if *p == at {
                break;
            }
            at = p.clone();
        }
        at
    }

    fn assert_fact(&mut self, rel: &str, args: &[String]) {
        if rel == EQ {
            let (a, b) = (self.find(&args[0]), self.find(&args[1]));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                self.parent.insert(hi, lo);
                let old = std::mem::take(&mut self.facts);
                for (r, t) in old {
                    let t = t.iter().map(|x| self.find(x)).collect();
                    self.facts.insert((r, t));
                }
            }
        } else {
            let t = args.iter().map(|x| self.find(x)).collect();
            self.facts.insert((rel.to_string(), t));
        }
    }

    fn holds(&self, rel: &str, args: &[String]) -> bool {
        if rel == EQ {
            return self.find(&args[0]) == self.find(&args[1]);
        }
        let t: Vec<String> = args.iter().map(|x| self.find(x)).collect();
        self.facts.contains(&(rel.to_string(), t))
    }

    fn partition(&self) -> BTreeSet<BTreeSet<String>> {
        let mut by_rep: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in self.parent.keys() {
            by_rep.entry(self.find(e)).or_default().insert(e.clone());
        }
        by_rep.into_values().collect()
    }
}

fn ground(l: &Lit, env: &BTreeMap<String, String>) -> Result<(String, Vec<String>), CertificateError> {
    let look = |v: &str| env.get(v).cloned().ok_or_else(|| invalid(format!("variable {v} is unbound")));
    Ok(match l {
        Lit::Rel(r, args) => (r.to_string(), args.iter().map(|a| look(a)).collect::<Result<_, _>>()?),
        Lit::Eq(a, b) => (EQ.to_string(), vec![look(a)?, look(b)?]),
    })
}

fn all_hold(d: &Naive, lits: &[Lit], env: &BTreeMap<String, String>) -> Result<bool, CertificateError> {
    for l in lits {
        let (r, t) = ground(l, env)?;
        if !d.holds(&r, &t) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>, CertificateError> {
    v.as_array()
        .ok_or_else(|| malformed(format!("`{what}` is not an array")))?
        .iter()
        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| malformed(format!("`{what}` holds a non-string"))))
        .collect()
}

fn index(v: &Value, key: &str) -> Result<usize, CertificateError> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|n| n as usize)
        .ok_or_else(|| malformed(format!("missing `{key}`")))
}

struct Step {
    id: usize,
    parent: usize,
    axiom: usize,
    subst: Vec<String>,
    disjunct: Option<usize>,
}

/// Checks one certificate for canonical part `part` of `s`.
pub fn check_certificate(t: &Theory, s: &Sequent, part: usize, cert: &Value) -> Result<(), CertificateError> {
    let goals = canonicalize(s).map_err(|e| invalid(e.to_string()))?;
    let goal = goals.get(part).ok_or_else(|| invalid(format!("the sequent has no part {part}")))?;
    let mut rules: Vec<Canonical> = Vec::new();
    for a in &t.axioms {
        rules.extend(canonicalize(a).map_err(|e| invalid(e.to_string()))?);
    }

    let root = cert.get("root").ok_or_else(|| malformed("missing `root`"))?;
    let domain = root
        .get("domain")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("root without `domain`"))?;
    let base: Vec<String> = domain
        .iter()
        .map(|e| e.get("id").and_then(Value::as_str).map(str::to_string).ok_or_else(|| malformed("element without `id`")))
        .collect::<Result<_, _>>()?;
    if base.len() != goal.context.len() {
        return Err(invalid("root domain does not match the goal context"));
    }
    let mut stated = Naive::default();
    base.iter().for_each(|e| stated.add(e));
    for f in root.get("facts").and_then(Value::as_array).ok_or_else(|| malformed("root without `facts`"))? {
        let rel = f.get("rel").and_then(Value::as_str).ok_or_else(|| malformed("fact without `rel`"))?;
        let args = strings(f.get("args").unwrap_or(&Value::Null), "args")?;
        if args.iter().any(|a| !stated.has(a)) {
            return Err(invalid("root fact mentions an unknown element"));
        }
        stated.assert_fact(rel, &args);
    }
    let base_env: BTreeMap<String, String> = goal.context.iter().map(|v| v.to_string()).zip(base.iter().cloned()).collect();
    let mut presented = Naive::default();
    base.iter().for_each(|e| presented.add(e));
    for l in &goal.antecedent {
        let (r, a) = ground(l, &base_env)?;
        presented.assert_fact(&r, &a);
    }
    if presented.facts != stated.facts || presented.partition() != stated.partition() {
        return Err(invalid("root is not the presentation of the antecedent"));
    }

    let mut steps = Vec::new();
    for n in cert.get("nodes").and_then(Value::as_array).ok_or_else(|| malformed("missing `nodes`"))? {
        let disjunct = match n.get("disjunct") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| malformed("bad `disjunct`"))? as usize),
        };
        steps.push(Step {
            id: index(n, "id")?,
            parent: index(n, "parent")?,
            axiom: index(n, "axiom")?,
            subst: strings(n.get("subst").unwrap_or(&Value::Null), "subst")?,
            disjunct,
        });
    }

    let mut built: BTreeMap<usize, Naive> = BTreeMap::new();
    built.insert(0, presented);
    let mut closed: BTreeSet<usize> = BTreeSet::new();
    let mut children: BTreeMap<usize, Vec<&Step>> = BTreeMap::new();
    for st in &steps {
        if st.id == 0 || built.contains_key(&st.id) {
            return Err(invalid(format!("node {} is repeated", st.id)));
        }
        let parent = built
            .get(&st.parent)
            .ok_or_else(|| invalid(format!("node {} precedes its parent {}", st.id, st.parent)))?;
        if closed.contains(&st.parent) {
            return Err(invalid(format!("closed node {} has children", st.parent)));
        }
        let rule = rules.get(st.axiom).ok_or_else(|| invalid(format!("no axiom {}", st.axiom)))?;
        let k = rule.context.len();
        if st.subst.len() < k {
            return Err(invalid(format!("node {}: substitution too short", st.id)));
        }
        let mut env: BTreeMap<String, String> = BTreeMap::new();
        for (v, e) in rule.context.iter().zip(&st.subst) {
            if !parent.has(e) {
                return Err(invalid(format!("node {}: {e} is not in the parent", st.id)));
            }
            env.insert(v.to_string(), e.clone());
        }
        if !all_hold(parent, &rule.antecedent, &env)? {
            return Err(invalid(format!("node {}: antecedent of axiom {} fails", st.id, st.axiom)));
        }
        let mut child = parent.clone();
        match st.disjunct {
            None => {
                if !rule.disjuncts.is_empty() || st.subst.len() != k {
                    return Err(invalid(format!("node {}: closure by a non-⊥ axiom", st.id)));
                }
                closed.insert(st.id);
            }
            Some(i) => {
                let dj = rule
                    .disjuncts
                    .get(i)
                    .ok_or_else(|| invalid(format!("node {}: axiom {} has no disjunct {i}", st.id, st.axiom)))?;
                let fresh = &st.subst[k..];
                if fresh.len() != dj.vars.len() {
                    return Err(invalid(format!("node {}: wrong number of fresh elements", st.id)));
                }
                let distinct: BTreeSet<&String> = fresh.iter().collect();
                if distinct.len() != fresh.len() || fresh.iter().any(|e| parent.has(e)) {
                    return Err(invalid(format!("node {}: fresh elements are not new", st.id)));
                }
                for (v, e) in dj.vars.iter().zip(fresh) {
                    child.add(e);
                    env.insert(v.to_string(), e.clone());
                }
                for l in &dj.body {
                    let (r, a) = ground(l, &env)?;
                    child.assert_fact(&r, &a);
                }
            }
        }
        built.insert(st.id, child);
        children.entry(st.parent).or_default().push(st);
    }

    for (p, kids) in &children {
        let first = kids[0];
        let k = rules[first.axiom].context.len();
        if kids.iter().any(|c| c.axiom != first.axiom || c.subst[..k] != first.subst[..k]) {
            return Err(invalid(format!("children of node {p} come from different applications")));
        }
        let got: Vec<Option<usize>> = {
            let mut v: Vec<_> = kids.iter().map(|c| c.disjunct).collect();
            v.sort();
            v
        };
        let n = rules[first.axiom].disjuncts.len();
        let want: Vec<Option<usize>> = if n == 0 { vec![None] } else { (0..n).map(Some).collect() };
        if got != want {
            return Err(invalid(format!("children of node {p} do not cover every disjunct")));
        }
    }

    let mut bar: BTreeMap<usize, (usize, Vec<String>)> = BTreeMap::new();
    for b in cert.get("bar").and_then(Value::as_array).ok_or_else(|| malformed("missing `bar`"))? {
        let leaf = index(b, "leaf")?;
        let disjunct = index(b, "disjunct")?;
        let witness = strings(b.get("witness").unwrap_or(&Value::Null), "witness")?;
        bar.insert(leaf, (disjunct, witness));
    }
    for (&id, d) in &built {
        if children.contains_key(&id) || closed.contains(&id) {
            continue;
        }
        let (i, witness) = bar.get(&id).ok_or_else(|| invalid(format!("leaf {id} is neither closed nor in the bar")))?;
        let dj = goal
            .disjuncts
            .get(*i)
            .ok_or_else(|| invalid(format!("leaf {id}: the goal has no disjunct {i}")))?;
        if witness.len() != dj.vars.len() || witness.iter().any(|e| !d.has(e)) {
            return Err(invalid(format!("leaf {id}: bad witness")));
        }
        let mut env = base_env.clone();
        env.extend(dj.vars.iter().map(|v| v.to_string()).zip(witness.iter().cloned()));
        if !all_hold(d, &dj.body, &env)? {
            return Err(invalid(format!("leaf {id}: goal disjunct {i} fails")));
        }
    }
    Ok(())
}

/// Checks the output of `prove`: a `proved` verdict with one valid
/// certificate per canonical part of `s`.
pub fn check_certificates(t: &Theory, s: &Sequent, proof: &Value) -> Result<(), CertificateError> {
    if proof.get("verdict").and_then(Value::as_str) != Some("proved") {
        return Err(invalid("verdict is not `proved`"));
    }
    let certs = proof
        .get("certificates")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing `certificates`"))?;
    let parts = canonicalize(s).map_err(|e| invalid(e.to_string()))?.len();
    if certs.len() != parts {
        return Err(invalid(format!("{} certificates for {parts} parts", certs.len())));
    }
    for (i, c) in certs.iter().enumerate() {
        check_certificate(t, s, i, c)?;
    }
    Ok(())
}
