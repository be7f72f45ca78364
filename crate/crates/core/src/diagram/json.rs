use serde_json::{json, Value};

use super::{Diagram, DiagramError, ElementId};
use crate::syntax::EQ;

impl Diagram {
    /// `{"domain":[{"id","gen","name"}], "facts":[{"rel","args","prov"}]}` with
    /// facts sorted by relation then arguments. Every `=` pair of each class is
    /// listed, reflexive ones included.
    pub fn to_json(&self) -> Value {
        let domain: Vec<Value> = self
            .domain()
            .map(|e| json!({"id": e.to_string(), "gen": e.gen, "name": self.label(e)}))
            .collect();
        let mut facts: Vec<(String, Vec<ElementId>, String)> = Vec::new();
        for c in self.classes() {
            for &x in c {
                for &y in c {
                    let prov = if x == y { "reflexive" } else { "equality" };
                    facts.push((EQ.to_string(), vec![x, y], prov.to_string()));
                }
            }
        }
        for (r, t, p) in self.facts() {
            facts.push((r.to_string(), t.clone(), p.origin.to_string()));
        }
        facts.sort();
        let facts: Vec<Value> = facts
            .into_iter()
            .map(|(r, t, p)| {
                let args: Vec<String> = t.iter().map(ToString::to_string).collect();
                json!({"rel": r, "args": args, "prov": p})
            })
            .collect();
        json!({"domain": domain, "facts": facts})
    }

    /// Reads the format written by `to_json`. Ids not of the form `e{gen}_{serial}`
    /// receive sequential serials in their stated generation. All facts load as input.
    pub fn from_json(v: &Value) -> Result<Diagram, DiagramError> {
        let bad = |m: &str| DiagramError::Json(m.to_string());
        let mut d = Diagram::new();
        let mut ids: Vec<(String, ElementId)> = Vec::new();
        let domain = v.get("domain").and_then(Value::as_array).ok_or_else(|| bad("missing `domain` array"))?;
        for el in domain {
            let id = el.get("id").and_then(Value::as_str).ok_or_else(|| bad("element without `id`"))?;
            let gen = el.get("gen").and_then(Value::as_u64).unwrap_or(0) as u32;
            let name = el.get("name").and_then(Value::as_str).unwrap_or(id);
            let eid = match ElementId::parse(id) {
                Some(e) => e,
                None => {
                    let serial = d.domain().filter(|e| e.gen == gen).map(|e| e.serial + 1).max().unwrap_or(0);
                    ElementId::new(gen, serial)
                }
            };
            d.add_element(eid, name)?;
            ids.push((id.to_string(), eid));
        }
        let resolve = |s: &str| -> Result<ElementId, DiagramError> {
            ids.iter()
                .find(|(n, _)| n == s)
                .map(|(_, e)| *e)
                .ok_or_else(|| DiagramError::Json(format!("unknown element `{s}`")))
        };
        if let Some(facts) = v.get("facts") {
            let facts = facts.as_array().ok_or_else(|| bad("`facts` is not an array"))?;
            for f in facts {
                let rel = f.get("rel").and_then(Value::as_str).ok_or_else(|| bad("fact without `rel`"))?;
                let args = f.get("args").and_then(Value::as_array).ok_or_else(|| bad("fact without `args`"))?;
                let args = args
                    .iter()
                    .map(|a| a.as_str().ok_or_else(|| bad("non-string argument")).and_then(resolve))
                    .collect::<Result<Vec<_>, _>>()?;
                if rel == EQ && args.len() == 2 && args[0] == args[1] {
                    continue;
                }
                d.add_input_fact(rel, &args)?;
            }
        }
        Ok(d)
    }
}
