//! Typing derivations, stored with the conclusion sequent at every node.
//!
//! Nodes are built through the smart constructors ([`axiom`], [`weaken`],
//! [`arrow_intro`], [`arrow_elim`], [`and`], [`mux`]), which compute the
//! conclusion from the premises. [`check_derivation`] re-verifies stored
//! conclusions, so derivations read from disk go through it too.

mod check;
mod json;
mod names;
mod text;
mod tree;

use std::fmt;

use thiserror::Error;

use crate::context::{ctx_intersect, Context, OverlapError};
use crate::names::Name;
use crate::term::{Term, TermError};
use crate::types::{LinearType, Type};

pub use check::{check_derivation, CheckReport, Violation};
pub use json::{from_json, from_json_str, to_json, to_json_string, DecodeError};
pub use names::{
    all_names, alpha_equal, canonical_key, freshen_locals, rename_free, DerivationKey,
};
pub use text::{parse_pretty, pretty_print};
pub use tree::{decompose_intersection_tree, DeltaSequence, DeltaStep, IntersectionTree, TreeNode};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub context: Context,
    pub subject: Term,
    pub ty: Type,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.context.is_empty() {
            write!(f, "⊢ {}: {}", self.subject, self.ty)
        } else {
            write!(f, "{} ⊢ {}: {}", self.context, self.subject, self.ty)
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    Ax,
    Weaken {
        var: Name,
        ty: LinearType,
    },
    ArrowIntro {
        var: Name,
    },
    ArrowElim,
    /// Arity is the number of premises.
    And,
    Mux {
        merged: Vec<Name>,
        fresh: Name,
    },
}

impl Rule {
    pub fn is_constructive(&self) -> bool {
        matches!(self, Rule::Ax | Rule::ArrowIntro { .. } | Rule::ArrowElim)
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Rule::Weaken { .. } | Rule::Mux { .. })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub premises: Vec<Derivation>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("{0} is already bound in the context")]
    AlreadyBound(Name),
    #[error("{0} is not bound in the premise context")]
    Unbound(Name),
    #[error("premise type {0} is not linear")]
    NotLinear(Type),
    #[error("function type {0} is not an arrow")]
    NotArrow(Type),
    #[error("argument type {found} does not match the domain {expected}")]
    DomainMismatch { expected: Type, found: Type },
    #[error("Γ # Δ violated: {0}")]
    Overlap(#[from] OverlapError),
    #[error("∧ premises have different subjects: {0} and {1}")]
    SubjectMismatch(Term, Term),
    #[error("{0} needs at least two premises or variables")]
    Arity(&'static str),
    #[error("multiplexed variables must be distinct")]
    DuplicateMerged,
    #[error("multiplexer target {0} clashes with the context")]
    FreshClash(Name),
    #[error(transparent)]
    Term(#[from] TermError),
}

impl Derivation {
    pub fn context(&self) -> &Context {
        &self.conclusion.context
    }

    pub fn subject(&self) -> &Term {
        &self.conclusion.subject
    }

    pub fn ty(&self) -> &Type {
        &self.conclusion.ty
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(Derivation::node_count)
            .sum::<usize>()
    }

    /// Premise `i`, following a node path as reported by the checker.
    pub fn at_path(&self, path: &[usize]) -> Option<&Derivation> {
        path.iter().try_fold(self, |d, &i| d.premises.get(i))
    }

    /// Pre-order traversal of every subderivation.
    pub fn subderivations(&self) -> Vec<&Derivation> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            out.push(d);
            stack.extend(d.premises.iter().rev());
        }
        out
    }

    /// Rebuilds this node's conclusion from (possibly replaced) premises.
    pub fn rebuild(rule: &Rule, premises: Vec<Derivation>) -> Result<Derivation, DerivationError> {
        let mut it = premises.into_iter();
        match rule {
            Rule::Ax => unreachable!("axioms have no premises to rebuild from"),
            Rule::Weaken { var, ty } => weaken(it.next().unwrap(), var.clone(), ty.clone()),
            Rule::ArrowIntro { var } => arrow_intro(it.next().unwrap(), var.clone()),
            Rule::ArrowElim => {
                let f = it.next().unwrap();
                arrow_elim(f, it.next().unwrap())
            }
            Rule::And => and(it.collect()),
            Rule::Mux { merged, fresh } => mux(it.next().unwrap(), merged.clone(), fresh.clone()),
        }
    }
}

/// `x: A ⊢ x: A`
pub fn axiom(x: impl Into<Name>, a: LinearType) -> Derivation {
    let x = x.into();
    Derivation {
        rule: Rule::Ax,
        conclusion: Sequent {
            context: Context::singleton(x.clone(), Type::Linear(a.clone())),
            subject: Term::Var(x),
            ty: Type::Linear(a),
        },
        premises: Vec::new(),
    }
}

pub fn weaken(
    d: Derivation,
    x: impl Into<Name>,
    a: LinearType,
) -> Result<Derivation, DerivationError> {
    let x = x.into();
    if d.context().contains(&x) {
        return Err(DerivationError::AlreadyBound(x));
    }
    let conclusion = Sequent {
        context: d.context().with(x.clone(), Type::Linear(a.clone())),
        subject: d.subject().clone(),
        ty: d.ty().clone(),
    };
    Ok(Derivation {
        rule: Rule::Weaken { var: x, ty: a },
        conclusion,
        premises: vec![d],
    })
}

pub fn arrow_intro(d: Derivation, x: impl Into<Name>) -> Result<Derivation, DerivationError> {
    let x = x.into();
    let sigma = d
        .context()
        .get(&x)
        .cloned()
        .ok_or_else(|| DerivationError::Unbound(x.clone()))?;
    let a = d
        .ty()
        .as_linear()
        .cloned()
        .ok_or_else(|| DerivationError::NotLinear(d.ty().clone()))?;
    let conclusion = Sequent {
        context: d.context().without(&x),
        subject: Term::lam(x.clone(), d.subject().clone()),
        ty: Type::arrow(sigma, a),
    };
    Ok(Derivation {
        rule: Rule::ArrowIntro { var: x },
        conclusion,
        premises: vec![d],
    })
}

pub fn arrow_elim(f: Derivation, a: Derivation) -> Result<Derivation, DerivationError> {
    let (sigma, cod) = match f.ty() {
        Type::Linear(LinearType::Arrow(s, c)) => ((**s).clone(), (**c).clone()),
        other => return Err(DerivationError::NotArrow(other.clone())),
    };
    if !a.ty().type_equal(&sigma) {
        return Err(DerivationError::DomainMismatch {
            expected: sigma,
            found: a.ty().clone(),
        });
    }
    let conclusion = Sequent {
        context: f.context().disjoint_union(a.context())?,
        subject: Term::app(f.subject().clone(), a.subject().clone()),
        ty: Type::Linear(cod),
    };
    Ok(Derivation {
        rule: Rule::ArrowElim,
        conclusion,
        premises: vec![f, a],
    })
}

/// `(∧n)` over `ds`, which must share one subject up to α.
pub fn and(ds: Vec<Derivation>) -> Result<Derivation, DerivationError> {
    if ds.len() < 2 {
        return Err(DerivationError::Arity("∧n"));
    }
    let first = ds[0].subject();
    if let Some(other) = ds[1..].iter().find(|d| !d.subject().alpha_eq(first)) {
        return Err(DerivationError::SubjectMismatch(
            first.clone(),
            other.subject().clone(),
        ));
    }
    let contexts: Vec<Context> = ds.iter().map(|d| d.context().clone()).collect();
    let conclusion = Sequent {
        context: ctx_intersect(&contexts),
        subject: first.clone(),
        ty: Type::Inter(ds.iter().map(|d| d.ty().clone()).collect()),
    };
    Ok(Derivation {
        rule: Rule::And,
        conclusion,
        premises: ds,
    })
}

/// `(m)`: merges the bindings of `merged` into `fresh : σ1 ∧ ... ∧ σn`.
pub fn mux(
    d: Derivation,
    merged: Vec<Name>,
    fresh: impl Into<Name>,
) -> Result<Derivation, DerivationError> {
    let fresh = fresh.into();
    if merged.len() < 2 {
        return Err(DerivationError::Arity("(m)"));
    }
    for (i, x) in merged.iter().enumerate() {
        if merged[..i].contains(x) {
            return Err(DerivationError::DuplicateMerged);
        }
    }
    let mut context = d.context().clone();
    let mut parts = Vec::with_capacity(merged.len());
    for x in &merged {
        parts.push(
            context
                .remove(x)
                .ok_or_else(|| DerivationError::Unbound(x.clone()))?,
        );
    }
    if merged.contains(&fresh) || context.contains(&fresh) {
        return Err(DerivationError::FreshClash(fresh));
    }
    context.insert(fresh.clone(), Type::Inter(parts));
    let subject = d.subject().rename_instance(&merged, &fresh)?;
    let conclusion = Sequent {
        context,
        subject,
        ty: d.ty().clone(),
    };
    Ok(Derivation {
        rule: Rule::Mux { merged, fresh },
        conclusion,
        premises: vec![d],
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::term::parse_term;
    use crate::types::parse_type;

    #[test]
    fn example_conclusions() {
        let d = first();
        assert_eq!(d.subject(), &parse_term("(\\x. x x) ((\\y. y) z)").unwrap());
        assert_eq!(d.ty(), &parse_type("a").unwrap());
        let z = d.context().get("z").unwrap();
        assert!(z.type_equal(&parse_type("((a -> a) ∧ a)").unwrap()));
        assert_eq!(third().subject(), &parse_term("z z").unwrap());
        assert_eq!(d.node_count(), 15);
    }

    #[test]
    fn builder_side_conditions() {
        let x = axiom("x", a());
        assert!(matches!(
            weaken(x.clone(), "x", a()),
            Err(DerivationError::AlreadyBound(_))
        ));
        assert!(matches!(
            arrow_intro(x.clone(), "y"),
            Err(DerivationError::Unbound(_))
        ));
        assert!(matches!(
            arrow_elim(x.clone(), x.clone()),
            Err(DerivationError::NotArrow(_))
        ));
        let f = axiom("f", big_a());
        assert!(matches!(
            arrow_elim(f.clone(), axiom("f", a())),
            Err(DerivationError::Overlap(_))
        ));
        assert!(matches!(
            arrow_elim(f, axiom("y", big_a())),
            Err(DerivationError::DomainMismatch { .. })
        ));
        assert!(matches!(
            and(vec![x.clone()]),
            Err(DerivationError::Arity(_))
        ));
        assert!(matches!(
            and(vec![x.clone(), axiom("y", a())]),
            Err(DerivationError::SubjectMismatch(..))
        ));
        let xy = weaken(x, "y", a()).unwrap();
        assert!(matches!(
            mux(xy.clone(), vec!["x".into()], "z"),
            Err(DerivationError::Arity(_))
        ));
        assert!(matches!(
            mux(xy.clone(), vec!["x".into(), "y".into()], "x"),
            Err(DerivationError::FreshClash(_))
        ));
        let m = mux(xy, vec!["x".into(), "y".into()], "z").unwrap();
        assert_eq!(m.subject(), &Term::var("z"));
    }
}
