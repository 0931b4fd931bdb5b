//! Untyped λ-terms with named variables.
//!
//! Names are kept in the surface representation because the multiplexor rule
//! talks about concrete free variables. Equality modulo renaming of bound
//! variables goes through [`AlphaKey`], a de Bruijn rendering used only for
//! comparison and hashing.

mod graph;
pub(crate) mod parse;
mod reduce;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::names::{FreshSupply, Name};

pub use graph::{max_reduction_length, reduction_graph, ReductionGraph};
pub use parse::{parse_term, ParseError};
pub use reduce::{normalize, redexes, reduce_at, RedexPosition, Step, Strategy};

/// Default step budget for normalization and graph exploration.
pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Lam(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("{fresh} is already free in the term")]
    FreshNotFresh { fresh: Name },
    #[error("no subterm at position {0}")]
    BadPosition(RedexPosition),
    #[error("subterm at position {0} is not a redex")]
    NotARedex(RedexPosition),
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { steps: usize },
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn lam(binder: impl Into<Name>, body: Term) -> Term {
        Term::Lam(binder.into(), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// `|x| = 1`, `|λx.M| = |M| + 1`, `|MN| = |M| + |N| + 1`.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, body) => body.size() + 1,
            Term::App(f, a) => f.size() + a.size() + 1,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Lam(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
        }
    }

    pub fn is_free(&self, x: &Name) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Lam(y, body) => y != x && body.is_free(x),
            Term::App(f, a) => f.is_free(x) || a.is_free(x),
        }
    }

    /// Every identifier occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    pub(crate) fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Lam(x, body) => {
                out.insert(x.clone());
                body.collect_names(out);
            }
            Term::App(f, a) => {
                f.collect_names(out);
                a.collect_names(out);
            }
        }
    }

    pub fn is_redex(&self) -> bool {
        matches!(self, Term::App(f, _) if matches!(**f, Term::Lam(..)))
    }

    pub fn is_normal(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Lam(_, body) => body.is_normal(),
            Term::App(f, a) => !self.is_redex() && f.is_normal() && a.is_normal(),
        }
    }

    pub fn alpha_key(&self) -> AlphaKey {
        fn go(t: &Term, bound: &mut Vec<Name>) -> AlphaKey {
            match t {
                Term::Var(x) => match bound.iter().rev().position(|b| b == x) {
                    Some(i) => AlphaKey::Bound(i),
                    None => AlphaKey::Free(x.clone()),
                },
                Term::Lam(x, body) => {
                    bound.push(x.clone());
                    let k = go(body, bound);
                    bound.pop();
                    AlphaKey::Lam(Box::new(k))
                }
                Term::App(f, a) => AlphaKey::App(Box::new(go(f, bound)), Box::new(go(a, bound))),
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_key() == other.alpha_key()
    }

    /// Capture-avoiding `self[n/x]`.
    pub fn substitute(&self, x: &Name, n: &Term) -> Term {
        let fv_n = n.free_vars();
        let mut supply = FreshSupply::new();
        self.subst_inner(x, n, &fv_n, &mut supply)
    }

    fn subst_inner(
        &self,
        x: &Name,
        n: &Term,
        fv_n: &BTreeSet<Name>,
        supply: &mut FreshSupply,
    ) -> Term {
        match self {
            Term::Var(y) if y == x => n.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, a) => Term::App(
                Box::new(f.subst_inner(x, n, fv_n, supply)),
                Box::new(a.subst_inner(x, n, fv_n, supply)),
            ),
            Term::Lam(y, body) => {
                if y == x || !body.is_free(x) {
                    return self.clone();
                }
                if fv_n.contains(y) {
                    supply.reserve_all(fv_n.iter().cloned());
                    supply.reserve_all(body.all_names());
                    supply.reserve(x.clone());
                    let y2 = supply.fresh(y);
                    let renamed =
                        body.subst_inner(y, &Term::Var(y2.clone()), &BTreeSet::new(), supply);
                    Term::Lam(y2, Box::new(renamed.subst_inner(x, n, fv_n, supply)))
                } else {
                    Term::Lam(y.clone(), Box::new(body.subst_inner(x, n, fv_n, supply)))
                }
            }
        }
    }

    /// Renames every free occurrence of each target to the single name `fresh`.
    ///
    /// The result is an instance of `self` in the sense of the multiplexor rule.
    pub fn rename_instance(&self, targets: &[Name], fresh: &Name) -> Result<Term, TermError> {
        if !targets.contains(fresh) && self.is_free(fresh) {
            return Err(TermError::FreshNotFresh {
                fresh: fresh.clone(),
            });
        }
        let replacement = Term::Var(fresh.clone());
        Ok(targets
            .iter()
            .filter(|t| *t != fresh)
            .fold(self.clone(), |acc, t| acc.substitute(t, &replacement)))
    }

    /// True when `self` is obtained from `general` by a (not necessarily
    /// injective) renaming of free variables, i.e. by a sequence of instance
    /// steps.
    pub fn is_instance_of(&self, general: &Term) -> bool {
        fn go(
            s: &Term,
            g: &Term,
            bs: &mut Vec<Name>,
            bg: &mut Vec<Name>,
            map: &mut BTreeMap<Name, Name>,
        ) -> bool {
            match (s, g) {
                (Term::Var(x), Term::Var(y)) => {
                    let ix = bs.iter().rev().position(|b| b == x);
                    let iy = bg.iter().rev().position(|b| b == y);
                    match (ix, iy) {
                        (Some(i), Some(j)) => i == j,
                        (None, None) => match map.get(y) {
                            Some(prev) => prev == x,
                            None => {
                                map.insert(y.clone(), x.clone());
                                true
                            }
                        },
                        _ => false,
                    }
                }
                (Term::Lam(x, b1), Term::Lam(y, b2)) => {
                    bs.push(x.clone());
                    bg.push(y.clone());
                    let ok = go(b1, b2, bs, bg, map);
                    bs.pop();
                    bg.pop();
                    ok
                }
                (Term::App(f1, a1), Term::App(f2, a2)) => {
                    go(f1, f2, bs, bg, map) && go(a1, a2, bs, bg, map)
                }
                _ => false,
            }
        }
        go(
            self,
            general,
            &mut Vec::new(),
            &mut Vec::new(),
            &mut BTreeMap::new(),
        )
    }
}

/// α-canonical rendering: bound variables become de Bruijn indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlphaKey {
    Free(Name),
    Bound(usize),
    Lam(Box<AlphaKey>),
    App(Box<AlphaKey>, Box<AlphaKey>),
}

impl AlphaKey {
    pub fn size(&self) -> usize {
        match self {
            AlphaKey::Free(_) | AlphaKey::Bound(_) => 1,
            AlphaKey::Lam(b) => b.size() + 1,
            AlphaKey::App(f, a) => f.size() + a.size() + 1,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Lam(..) => {
                let mut binders = Vec::new();
                let mut cur = self;
                while let Term::Lam(x, body) = cur {
                    binders.push(x.as_str());
                    cur = body;
                }
                write!(f, "\\{}. {}", binders.join(" "), cur)
            }
            Term::App(fun, arg) => {
                match **fun {
                    Term::Lam(..) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                match **arg {
                    Term::Var(_) => write!(f, " {arg}"),
                    _ => write!(f, " ({arg})"),
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn sizes() {
        assert_eq!(t("\\x. x").size(), 2);
        assert_eq!(t("z z").size(), 3);
        assert_eq!(t("(\\x. x x) ((\\y. y) z)").size(), 9);
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(t("x x").substitute(&"x".into(), &t("z")), t("z z"));
        let captured = t("\\y. x").substitute(&"x".into(), &t("y"));
        match &captured {
            Term::Lam(b, body) => {
                assert_ne!(b.as_str(), "y");
                assert_eq!(**body, t("y"));
            }
            _ => panic!("expected an abstraction"),
        }
        assert_eq!(
            t("x x").substitute(&"x".into(), &t("(\\y. y) z")),
            t("((\\y. y) z) ((\\y. y) z)")
        );
    }

    #[test]
    fn substitution_stops_at_shadowing_binder() {
        assert_eq!(t("\\x. x").substitute(&"x".into(), &t("z")), t("\\x. x"));
    }

    #[test]
    fn rename_instance_examples() {
        let m = t("x1 x2");
        let renamed = m
            .rename_instance(&["x1".into(), "x2".into()], &"x".into())
            .unwrap();
        assert_eq!(renamed, t("x x"));
        assert!(renamed.is_instance_of(&m));
        assert_eq!(m.rename_instance(&[], &"x".into()).unwrap(), m);
        assert!(matches!(
            t("x1 x").rename_instance(&["x1".into()], &"x".into()),
            Err(TermError::FreshNotFresh { .. })
        ));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(t("\\x. x").alpha_eq(&t("\\y. y")));
        assert!(!t("\\x. y").alpha_eq(&t("\\y. y")));
        assert!(t("\\x y. x y").alpha_eq(&t("\\a b. a b")));
        assert!(!t("\\x y. x y").alpha_eq(&t("\\a b. b a")));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "\\x. x",
            "(\\x. x x) ((\\y. y) z)",
            "x y z",
            "x (y z)",
            "\\x y. y x x",
        ] {
            let term = t(s);
            assert_eq!(t(&term.to_string()), term);
        }
        assert_eq!(
            t("(\\x. x x) ((\\y. y) z)").to_string(),
            "(\\x. x x) ((\\y. y) z)"
        );
    }
}
