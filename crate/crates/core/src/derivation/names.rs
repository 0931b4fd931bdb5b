//! Renaming inside derivations: free-variable renaming, freshening of locally
//! bound names, and an α-canonical key.
//!
//! A name is local to a derivation when it is introduced by an `(→I)` binder
//! or is one of the merged variables of an `(m)`: it appears in inner
//! contexts but not in the conclusion.

use std::collections::{BTreeSet, HashSet};

use super::{arrow_intro, mux, Derivation, Rule, Sequent};
use crate::context::Context;
use crate::names::{FreshSupply, Name};
use crate::term::{AlphaKey, Term};
use crate::types::Type;

/// Renames the free variable `old` to `new` in every node where `old` is in
/// scope. `new` must not already be bound in those contexts.
pub fn rename_free(d: &Derivation, old: &Name, new: &Name) -> Derivation {
    if old == new || !d.context().contains(old) {
        return d.clone();
    }
    debug_assert!(
        !d.context().contains(new),
        "rename target {new} already bound"
    );
    let rule = match &d.rule {
        Rule::Weaken { var, ty } if var == old => Rule::Weaken {
            var: new.clone(),
            ty: ty.clone(),
        },
        Rule::Mux { merged, fresh } if fresh == old => Rule::Mux {
            merged: merged.clone(),
            fresh: new.clone(),
        },
        r => r.clone(),
    };
    let premises = d
        .premises
        .iter()
        .map(|p| rename_free(p, old, new))
        .collect();
    let mut context = d.context().clone();
    let t = context.remove(old).expect("checked above");
    context.insert(new.clone(), t);
    let conclusion = Sequent {
        context,
        subject: d.subject().substitute(old, &Term::Var(new.clone())),
        ty: d.ty().clone(),
    };
    Derivation {
        rule,
        conclusion,
        premises,
    }
}

/// Every identifier mentioned anywhere in `d`.
pub fn all_names(d: &Derivation) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for s in d.subderivations() {
        out.extend(s.context().names().cloned());
        s.subject().collect_names(&mut out);
        match &s.rule {
            Rule::Weaken { var, .. } | Rule::ArrowIntro { var } => {
                out.insert(var.clone());
            }
            Rule::Mux { merged, fresh } => {
                out.extend(merged.iter().cloned());
                out.insert(fresh.clone());
            }
            _ => {}
        }
    }
    out
}

/// Renames local names that collide with `avoid`, with the conclusion
/// context, or with another local binding, so that every local binding
/// site gets a distinct name. Names that do not collide are kept.
///
/// `d` must pass the checker; the conclusion is unchanged up to α.
pub fn freshen_locals<I: IntoIterator<Item = Name>>(d: &Derivation, avoid: I) -> Derivation {
    let mut seen: HashSet<Name> = avoid.into_iter().collect();
    seen.extend(d.context().names().cloned());
    let mut supply = FreshSupply::avoiding(seen.iter().cloned());
    supply.reserve_all(all_names(d));
    relabel(d.clone(), &mut |name: &Name, _| {
        if seen.insert(name.clone()) {
            None
        } else {
            let fresh = supply.fresh(name);
            seen.insert(fresh.clone());
            Some(fresh)
        }
    })
}

/// Top-down pass over local binding sites. `choose` may return a new name
/// for each site; conclusions are recomputed bottom-up.
fn relabel<F>(d: Derivation, choose: &mut F) -> Derivation
where
    F: FnMut(&Name, &Derivation) -> Option<Name>,
{
    let Derivation {
        rule,
        premises,
        conclusion,
    } = d;
    match rule {
        Rule::Ax => Derivation {
            rule,
            conclusion,
            premises,
        },
        Rule::ArrowIntro { var } => {
            let mut p = premises.into_iter().next().unwrap();
            let var = match choose(&var, &p) {
                Some(v2) => {
                    p = rename_free(&p, &var, &v2);
                    v2
                }
                None => var,
            };
            arrow_intro(relabel(p, choose), var).expect("renaming preserves validity")
        }
        Rule::Mux { merged, fresh } => {
            let mut p = premises.into_iter().next().unwrap();
            let order = mux_order(&merged, &p);
            let mut renamed = merged.clone();
            for i in order {
                if let Some(v2) = choose(&merged[i], &p) {
                    p = rename_free(&p, &merged[i], &v2);
                    renamed[i] = v2;
                }
            }
            mux(relabel(p, choose), renamed, fresh).expect("renaming preserves validity")
        }
        rule => {
            let ps = premises.into_iter().map(|p| relabel(p, choose)).collect();
            Derivation::rebuild(&rule, ps).expect("renaming preserves validity")
        }
    }
}

/// Indices of `merged` ordered by first free occurrence in the premise
/// subject; merged variables not free in it keep their relative order.
fn mux_order(merged: &[Name], premise: &Derivation) -> Vec<usize> {
    let occ = free_occurrence_order(premise.subject());
    let mut idx: Vec<usize> = (0..merged.len()).collect();
    idx.sort_by_key(|&i| {
        occ.iter()
            .position(|x| *x == merged[i])
            .unwrap_or(usize::MAX)
    });
    idx
}

fn free_occurrence_order(t: &Term) -> Vec<Name> {
    fn go(t: &Term, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
        match t {
            Term::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::Lam(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                go(f, bound, out);
                go(a, bound, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Structural fingerprint of a derivation up to renaming of local names,
/// α-conversion of subjects, and commutativity of intersections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivationKey {
    tag: u8,
    data: Vec<Name>,
    weaken_ty: Option<Type>,
    context: Vec<(Name, Type)>,
    subject: AlphaKey,
    ty: Type,
    premises: Vec<DerivationKey>,
}

pub fn canonical_key(d: &Derivation) -> DerivationKey {
    let mut k = 0usize;
    let canon = relabel(d.clone(), &mut |_, _| {
        k += 1;
        Some(Name::from(format!("#{k}")))
    });
    key_of(&canon)
}

fn key_of(d: &Derivation) -> DerivationKey {
    let (tag, mut data, weaken_ty) = match &d.rule {
        Rule::Ax => (0, vec![], None),
        Rule::Weaken { var, ty } => (
            1,
            vec![var.clone()],
            Some(Type::Linear(ty.clone()).canonicalize()),
        ),
        Rule::ArrowIntro { var } => (2, vec![var.clone()], None),
        Rule::ArrowElim => (3, vec![], None),
        Rule::And => (4, vec![], None),
        Rule::Mux { merged, fresh } => {
            let mut v = merged.clone();
            v.sort();
            v.push(fresh.clone());
            (5, v, None)
        }
    };
    data.shrink_to_fit();
    let ctx: &Context = d.context();
    DerivationKey {
        tag,
        data,
        weaken_ty,
        context: ctx
            .iter()
            .map(|(x, t)| (x.clone(), t.canonicalize()))
            .collect(),
        subject: d.subject().alpha_key(),
        ty: d.ty().canonicalize(),
        premises: d.premises.iter().map(key_of).collect(),
    }
}

/// Equality up to local renaming, α and type canonical form.
pub fn alpha_equal(a: &Derivation, b: &Derivation) -> bool {
    canonical_key(a) == canonical_key(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::fixtures::*;
    use crate::derivation::{and, arrow_elim, axiom, check_derivation};

    #[test]
    fn rename_free_renames_through_the_tree() {
        let d = second();
        let r = rename_free(&d, &"z".into(), &"w".into());
        assert!(check_derivation(&r).is_ok());
        assert!(r.context().contains("w") && !r.context().contains("z"));
        assert_eq!(r.subject().to_string(), "(\\x. x x) w");
    }

    #[test]
    fn freshen_renames_only_clashes() {
        assert_eq!(freshen_locals(&third(), []), third());
        let d = first();
        let f = freshen_locals(&d, [Name::from("x1")]);
        assert!(check_derivation(&f).is_ok());
        assert!(alpha_equal(&f, &d));
        let mux_node = &f.premises[0].premises[0];
        match &mux_node.rule {
            Rule::Mux { merged, .. } => assert!(!merged.contains(&Name::from("x1"))),
            r => panic!("unexpected {r:?}"),
        }
        // the two copies of λy.y get distinct binders
        let binders: Vec<Name> = f
            .subderivations()
            .into_iter()
            .filter_map(|s| match &s.rule {
                Rule::ArrowIntro { var } => Some(var.clone()),
                _ => None,
            })
            .collect();
        let distinct: BTreeSet<_> = binders.iter().cloned().collect();
        assert_eq!(distinct.len(), binders.len());
    }

    #[test]
    fn key_ignores_local_names_and_merge_order() {
        let body = arrow_elim(axiom("p", big_a()), axiom("q", a())).unwrap();
        let m1 = mux(body.clone(), vec!["p".into(), "q".into()], "z").unwrap();
        let m2 = mux(body, vec!["q".into(), "p".into()], "z").unwrap();
        assert!(alpha_equal(&m1, &m2));
        assert!(alpha_equal(&m1, &third()));
        let t1 = and(vec![axiom("z", big_a()), axiom("z", a())]).unwrap();
        let t2 = and(vec![axiom("z", a()), axiom("z", big_a())]).unwrap();
        assert!(!alpha_equal(&t1, &t2));
        assert!(!alpha_equal(&first(), &second()));
    }
}
