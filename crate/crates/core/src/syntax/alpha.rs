use super::{sym, Context, Formula, Sym};

/// Renames context variables to positional names and bound variables to
/// binder-order names. Two formulas-in-context are α-equivalent iff their
/// normal forms coincide.
pub fn alpha_normal(ctx: &Context, f: &Formula) -> Formula {
    let mut env: Vec<(Sym, Sym)> = ctx
        .vars()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), sym(&format!("%{i}"))))
        .collect();
    let mut next = 0usize;
    go(f, &mut env, &mut next)
}

fn go(f: &Formula, env: &mut Vec<(Sym, Sym)>, next: &mut usize) -> Formula {
    let look = |v: &Sym, env: &Vec<(Sym, Sym)>| -> Sym {
        env.iter()
            .rev()
            .find(|(from, _)| from == v)
            .map(|(_, to)| to.clone())
            .unwrap_or_else(|| sym(&format!("%free:{v}")))
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(r, args) => Formula::Atom(r.clone(), args.iter().map(|a| look(a, env)).collect()),
        Formula::Eq(a, b) => Formula::Eq(look(a, env), look(b, env)),
        Formula::And(a, b) => Formula::and(go(a, env, next), go(b, env, next)),
        Formula::Or(a, b) => Formula::or(go(a, env, next), go(b, env, next)),
        Formula::Implies(a, b) => Formula::implies(go(a, env, next), go(b, env, next)),
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let name = sym(&format!("%b{next}"));
            *next += 1;
            env.push((v.clone(), name.clone()));
            let body = go(b, env, next);
            env.pop();
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(name, Box::new(body))
            } else {
                Formula::Forall(name, Box::new(body))
            }
        }
    }
}

/// Stable textual key of the α-class of a formula-in-context.
pub fn alpha_key(ctx: &Context, f: &Formula) -> String {
    format!("{}|{}", ctx.len(), alpha_normal(ctx, f))
}

pub fn alpha_equal(a: (&Context, &Formula), b: (&Context, &Formula)) -> bool {
    a.0.len() == b.0.len() && alpha_normal(a.0, a.1) == alpha_normal(b.0, b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renaming_is_alpha_equal() {
        let f = Formula::exists("y", Formula::atom("R", &["x", "y"]));
        let g = Formula::exists("w", Formula::atom("R", &["z", "w"]));
        assert!(alpha_equal((&Context::of(&["x"]), &f), (&Context::of(&["z"]), &g)));
    }

    #[test]
    fn argument_order_matters() {
        let ctx = Context::of(&["x", "y"]);
        let f = Formula::atom("R", &["x", "y"]);
        let g = Formula::atom("R", &["y", "x"]);
        assert!(alpha_equal((&ctx, &f), (&ctx, &f)));
        assert!(!alpha_equal((&ctx, &f), (&ctx, &g)));
    }

    #[test]
    fn shadowing_is_respected() {
        let ctx = Context::of(&["x"]);
        let f = Formula::exists("x", Formula::atom("A", &["x"]));
        let g = Formula::exists("y", Formula::atom("A", &["x"]));
        assert!(!alpha_equal((&ctx, &f), (&ctx, &g)));
    }
}
