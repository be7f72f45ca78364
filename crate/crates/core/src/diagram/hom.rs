use std::collections::{BTreeMap, BTreeSet};

use super::{Diagram, DiagramError, ElementId, Origin, Prov};

/// A left-total relation between domains; not necessarily functional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    pub pairs: BTreeSet<(ElementId, ElementId)>,
}

impl Homomorphism {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (ElementId, ElementId)>) -> Self {
        Homomorphism {
            pairs: pairs.into_iter().collect(),
        }
    }

    /// The identity on a diagram: its congruence relation.
    pub fn identity(d: &Diagram) -> Self {
        let mut pairs = BTreeSet::new();
        for c in d.classes() {
            for &x in c {
                for &y in c {
                    pairs.insert((x, y));
                }
            }
        }
        Homomorphism { pairs }
    }

    pub fn image(&self, a: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.pairs
            .range((a, ElementId::new(0, 0))..)
            .take_while(move |(x, _)| *x == a)
            .map(|(_, y)| *y)
    }

    /// `g ∘ self`, relational composition: first `self`, then `g`.
    pub fn then(&self, g: &Homomorphism) -> Homomorphism {
        let mut pairs = BTreeSet::new();
        for &(a, b) in &self.pairs {
            for c in g.image(b) {
                pairs.insert((a, c));
            }
        }
        Homomorphism { pairs }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Conditions (1) and (2) plus left-totality; `None` when `h` is a homomorphism.
pub fn hom_violation(h: &Homomorphism, d1: &Diagram, d2: &Diagram) -> Option<String> {
    for &(a, b) in &h.pairs {
        if !d1.contains(a) {
            return Some(format!("{a} is not in the source domain"));
        }
        if !d2.contains(b) {
            return Some(format!("{b} is not in the target domain"));
        }
    }
    let mut images: BTreeMap<ElementId, BTreeSet<ElementId>> = BTreeMap::new();
    for e in d1.domain() {
        let img: BTreeSet<ElementId> = h.image(e).collect();
        if img.is_empty() {
            return Some(format!("not left-total at {e}"));
        }
        for &b in &img {
            for &b2 in d2.class_of(b) {
                if !img.contains(&b2) {
                    return Some(format!("({e},{b}) present but ({e},{b2}) missing although {b}={b2}"));
                }
            }
        }
        images.insert(e, img);
    }
    // Images of a class, as target representatives.
    let class_image = |e: ElementId| -> BTreeSet<ElementId> {
        d1.class_of(e)
            .iter()
            .flat_map(|m| images[m].iter().map(|&b| d2.find(b)))
            .collect()
    };
    for c in d1.classes() {
        let img = class_image(*c.first().expect("nonempty class"));
        if img.len() > 1 {
            return Some(format!(
                "equal elements of the source map to distinct classes {:?}",
                img.iter().map(ToString::to_string).collect::<Vec<_>>()
            ));
        }
    }
    for (r, t, _) in d1.facts() {
        let sets: Vec<Vec<ElementId>> = t.iter().map(|&e| class_image(e).into_iter().collect()).collect();
        let mut idx = vec![0usize; sets.len()];
        loop {
            let tuple: Vec<ElementId> = idx.iter().zip(&sets).map(|(&i, s)| s[i]).collect();
            if !d2.holds(r, &tuple) {
                let args: Vec<String> = tuple.iter().map(ToString::to_string).collect();
                return Some(format!("fact {r}({}) not preserved", args.join(",")));
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < sets[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    None
}

pub fn check_homomorphism(h: &Homomorphism, d1: &Diagram, d2: &Diagram) -> bool {
    hom_violation(h, d1, d2).is_none()
}

/// `i(x, y) ⇔ (x = y) ∈ F′` for `d ⊆ d′`.
pub fn inclusion_hom(d: &Diagram, d2: &Diagram) -> Result<Homomorphism, DiagramError> {
    if !d.is_subdiagram_of(d2) {
        return Err(DiagramError::NotInclusion(format!("{} ⊄ {}", d.summary(), d2.summary())));
    }
    let mut pairs = BTreeSet::new();
    for x in d.domain() {
        for &y in d2.class_of(x) {
            pairs.insert((x, y));
        }
    }
    Ok(Homomorphism { pairs })
}

/// A copy of `d` whose generations lie above every generation of `avoid`,
/// with the isomorphism from `d` to the copy.
pub fn rename_apart(d: &Diagram, avoid: &Diagram) -> (Diagram, Homomorphism) {
    let offset = avoid.next_generation().max(avoid.max_gen().map_or(0, |g| g + 1));
    let f = move |e: ElementId| ElementId::new(e.gen + offset, e.serial);
    let copy = d.map_ids(&f);
    let mut pairs = BTreeSet::new();
    for x in d.domain() {
        for &y in d.class_of(x) {
            pairs.insert((x, f(y)));
        }
    }
    (copy, Homomorphism { pairs })
}

/// The outcome of gluing `d1` onto `d0` along a homomorphism.
#[derive(Clone, Debug)]
pub struct Merge {
    pub diagram: Diagram,
    /// Inclusion of `d0`.
    pub a: Homomorphism,
    /// Inclusion of `d1`.
    pub i: Homomorphism,
    /// Retraction onto `d1`.
    pub r: Homomorphism,
}

/// Glues disjoint `d0` and `d1` along `h: d0 → d1`. The result satisfies
/// `r ∘ i = id` and `π(a) = i ∘ h`; both are checked before returning.
pub fn merge_along_hom(h: &Homomorphism, d0: &Diagram, d1: &Diagram) -> Result<Merge, DiagramError> {
    if let Some(e) = d0.domain().find(|e| d1.contains(*e)) {
        return Err(DiagramError::NotDisjoint(e));
    }
    if let Some(why) = hom_violation(h, d0, d1) {
        return Err(DiagramError::InvalidHom(why));
    }
    let mut d2 = d0.clone();
    for e in d1.domain() {
        d2.add_element(e, d1.name(e).unwrap_or_default())?;
    }
    for c in d1.classes() {
        let first = *c.first().expect("nonempty class");
        for &m in c.iter().skip(1) {
            d2.union(first, m, Prov::input((crate::syntax::sym(crate::syntax::EQ), vec![first, m])));
        }
    }
    for (r, t, p) in d1.facts() {
        d2.add_fact(r, t, p.clone())?;
    }
    for &(x, y) in &h.pairs {
        d2.union(x, y, Prov::new(Origin::Input));
    }
    let a = inclusion_hom(d0, &d2)?;
    let i = inclusion_hom(d1, &d2)?;
    let mut r = BTreeSet::new();
    for x in d2.domain() {
        if d1.contains(x) {
            for &y in d1.class_of(x) {
                r.insert((x, y));
            }
        } else {
            for y in h.image(x) {
                r.insert((x, y));
            }
        }
    }
    let r = Homomorphism { pairs: r };
    for (name, hom, src, dst) in [("a", &a, d0, &d2), ("i", &i, d1, &d2), ("r", &r, &d2, d1)] {
        if let Some(why) = hom_violation(hom, src, dst) {
            return Err(DiagramError::MergeFailed(format!("{name}: {why}")));
        }
    }
    if i.then(&r) != Homomorphism::identity(d1) {
        return Err(DiagramError::MergeFailed("r ∘ i is not the identity".into()));
    }
    if h.then(&i) != a {
        return Err(DiagramError::MergeFailed("outer triangle does not commute".into()));
    }
    Ok(Merge { diagram: d2, a, i, r })
}
