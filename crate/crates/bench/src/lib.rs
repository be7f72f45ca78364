//! Fixtures shared by the engine benchmarks.

use cohere::diagram::Diagram;
use cohere::syntax::{parse_theory, Theory};

/// A binary fan of the given depth whose leaves all imply `B`.
pub fn fan(depth: usize) -> Theory {
    let mut text = String::from("rel B/0, P/0");
    let mut nodes = vec![String::from("P")];
    let mut axioms = String::from("axiom true |- P.\n");
    for _ in 0..depth {
        let mut next = Vec::new();
        for n in &nodes {
            let (l, r) = (format!("{n}0"), format!("{n}1"));
            text.push_str(&format!(", {l}/0, {r}/0"));
            axioms.push_str(&format!("axiom {n} |- {l} | {r}.\n"));
            next.push(l);
            next.push(r);
        }
        nodes = next;
    }
    for n in &nodes {
        axioms.push_str(&format!("axiom {n} |- B.\n"));
    }
    parse_theory(&format!("{text}.\n{axioms}")).expect("fan theory parses")
}

/// Transitive closure, and a chain of `n` successor facts to close.
pub fn chain(n: usize) -> (Theory, Diagram) {
    let t = parse_theory("rel S/2, T/2. axiom S(x,y) |- T(x,y). axiom T(x,y) & T(y,z) |- T(x,z).").expect("parses");
    let mut d = Diagram::new();
    let els: Vec<_> = (0..=n).map(|i| d.add_input(&format!("a{i}"))).collect();
    for w in els.windows(2) {
        d.add_input_fact("S", &[w[0], w[1]]).expect("declared");
    }
    (t, d)
}

pub const COLOURS: &str = "rel B/1, Bb/1, R/2. axiom B(x) & Bb(x) |- false. axiom B(x) |- exists y. R(x,y). habitative.";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_sizes() {
        assert_eq!(fan(2).axioms.len(), 1 + 3 + 4);
        assert_eq!(fan(3).signature.len(), 2 + 14);
        assert_eq!(chain(3).1.len(), 4);
    }
}
