use super::{default_context, Formula, Sequent, Theory};

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Exists(..) | Formula::Forall(..) => 4,
        _ => 5,
    }
}

fn write(f: &Formula, min: u8, out: &mut String) {
    let paren = level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(r, args) if args.is_empty() => out.push_str(r),
        Formula::Atom(r, args) => {
            out.push_str(r);
            out.push('(');
            let names: Vec<&str> = args.iter().map(|a| &**a).collect();
            out.push_str(&names.join(","));
            out.push(')');
        }
        Formula::Eq(a, b) => {
            out.push_str(a);
            out.push_str(" = ");
            out.push_str(b);
        }
        Formula::Implies(a, b) => {
            write(a, 2, out);
            out.push_str(" -> ");
            write(b, 1, out);
        }
        Formula::Or(a, b) => {
            write(a, 2, out);
            out.push_str(" | ");
            write(b, 3, out);
        }
        Formula::And(a, b) => {
            write(a, 3, out);
            out.push_str(" & ");
            write(b, 4, out);
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            out.push_str(if matches!(f, Formula::Exists(..)) { "exists " } else { "forall " });
            out.push_str(v);
            out.push_str(". ");
            write(b, 4, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn formula_to_string(f: &Formula) -> String {
    let mut out = String::new();
    write(f, 0, &mut out);
    out
}

/// `φ |- ψ`, followed by ` [ctx ...]` only when the context is not the default one.
pub fn sequent_to_string(s: &Sequent) -> String {
    let mut out = format!(
        "{} |- {}",
        formula_to_string(&s.antecedent),
        formula_to_string(&s.consequent)
    );
    if s.context != default_context(&s.antecedent, &s.consequent) {
        let names: Vec<&str> = s.context.vars().iter().map(|v| &**v).collect();
        out.push_str(&format!(" [ctx {}]", names.join(", ")));
    }
    out
}

/// Renders a theory in the DSL accepted by `parse_theory`.
pub fn print_theory(t: &Theory) -> String {
    let mut out = String::new();
    if let Some(name) = &t.name {
        out.push_str(&format!("theory {name}\n"));
    }
    if !t.signature.is_empty() {
        let decls: Vec<String> = t
            .signature
            .relations()
            .map(|(r, a)| format!("{r}/{a}"))
            .collect();
        out.push_str(&format!("rel {}.\n", decls.join(", ")));
    }
    let hab = Sequent::habitative();
    for s in &t.axioms {
        if *s == hab {
            out.push_str("habitative.\n");
        } else {
            out.push_str(&format!("axiom {}.\n", sequent_to_string(s)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_theory, Context, Signature};
    use super::*;

    #[test]
    fn minimal_parentheses() {
        let f = Formula::and(
            Formula::or(Formula::atom("A", &["x"]), Formula::atom("B", &["x"])),
            Formula::exists("y", Formula::and(Formula::atom("R", &["x", "y"]), Formula::True)),
        );
        assert_eq!(formula_to_string(&f), "(A(x) | B(x)) & exists y. (R(x,y) & true)");
        let g = Formula::implies(
            Formula::implies(Formula::atom("P", &[]), Formula::atom("Q", &[])),
            Formula::atom("P", &[]),
        );
        assert_eq!(formula_to_string(&g), "(P -> Q) -> P");
    }

    #[test]
    fn round_trip_theory() {
        let sig = Signature::new().with("A", 1).with("R", 2);
        let t = Theory {
            name: Some("demo".into()),
            signature: sig,
            axioms: vec![
                Sequent::new(Formula::atom("A", &["x"]), Formula::exists("y", Formula::atom("R", &["x", "y"]))),
                Sequent::with_context(Formula::True, Formula::atom("A", &["x"]), Context::of(&["z", "x"])),
                Sequent::habitative(),
            ],
        };
        let text = print_theory(&t);
        assert_eq!(parse_theory(&text).unwrap(), t, "{text}");
    }
}
