//! Substitution into derivations and subject reduction.
//!
//! All entry points first rename locally bound names apart (see
//! [`freshen_locals`]), so the recursive cases can merge contexts without
//! accidental capture. Every result is re-checked before it is returned; a
//! failure there is reported as [`TransformError::Internal`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::context::Context;
use crate::derivation::{
    and, arrow_elim, check_derivation, mux, to_json, weaken, Derivation, DerivationError, Rule,
};
use crate::derivation::{freshen_locals, rename_free};
use crate::measures::{rank, weight, MeasureReport};
use crate::names::{FreshSupply, Name};
use crate::term::{reduce_at, RedexPosition, Step, Strategy, Term};
use crate::types::Type;

pub use crate::derivation::{DeltaSequence, DeltaStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(usize),
}

impl From<DerivationError> for TransformError {
    fn from(e: DerivationError) -> Self {
        TransformError::Internal(e.to_string())
    }
}

fn pre<T>(msg: impl Into<String>) -> Result<T, TransformError> {
    Err(TransformError::Precondition(msg.into()))
}

fn names_of(c: &Context) -> impl Iterator<Item = Name> + '_ {
    c.names().cloned()
}

/// `S(Σ, Π)`: from `Σ ▷ Δ ⊢ N : σ` and `Π ▷ Γ, x:σ ⊢ M : τ`, a derivation
/// of `Γ, Δ ⊢ M[N/x] : τ`.
pub fn subst_derivation(
    sigma: &Derivation,
    pi: &Derivation,
    x: &Name,
) -> Result<Derivation, TransformError> {
    for (what, d) in [("Σ", sigma), ("Π", pi)] {
        let r = check_derivation(d);
        if !r.is_ok() {
            return pre(format!("{what} does not check: {r}"));
        }
    }
    let Some(sx) = pi.context().get(x) else {
        return pre(format!("{x} is not bound in Π's context"));
    };
    if !sx.type_equal(sigma.ty()) {
        return pre(format!("{x}: {sx} but Σ proves {}", sigma.ty()));
    }
    if sigma.context().contains(x) {
        return pre(format!("{x} ∈ dom(Δ)"));
    }
    let gamma = pi.context().without(x);
    if let Err(e) = gamma.disjoint_union(sigma.context()) {
        return pre(format!("Γ # Δ violated: {e}"));
    }

    let pi2 = freshen_locals(pi, names_of(sigma.context()));
    let mut avoid: BTreeSet<Name> = crate::derivation::all_names(&pi2);
    avoid.insert(x.clone());
    let sigma2 = freshen_locals(sigma, avoid.iter().cloned());
    let mut supply = FreshSupply::avoiding(avoid);
    supply.reserve_all(crate::derivation::all_names(&sigma2));

    let out = subst(&sigma2, &pi2, x, &mut supply)?;

    let expected_ctx = gamma
        .disjoint_union(sigma.context())
        .expect("checked above");
    let expected_subject = pi.subject().substitute(x, sigma.subject());
    verify(&out, &expected_ctx, &expected_subject, pi.ty(), "S(Σ, Π)")?;
    Ok(out)
}

fn verify(
    d: &Derivation,
    ctx: &Context,
    subject: &Term,
    ty: &Type,
    what: &str,
) -> Result<(), TransformError> {
    let r = check_derivation(d);
    if !r.is_ok() {
        return Err(TransformError::Internal(format!(
            "{what} does not check: {r}"
        )));
    }
    if !d.context().equiv(ctx) {
        return Err(TransformError::Internal(format!(
            "{what} context {{{}}} ≠ {{{ctx}}}",
            d.context()
        )));
    }
    if !d.subject().alpha_eq(subject) {
        return Err(TransformError::Internal(format!(
            "{what} subject {} ≠ {subject}",
            d.subject()
        )));
    }
    if !d.ty().type_equal(ty) {
        return Err(TransformError::Internal(format!(
            "{what} type {} ≠ {ty}",
            d.ty()
        )));
    }
    Ok(())
}

fn subst(
    sigma: &Derivation,
    pi: &Derivation,
    x: &Name,
    supply: &mut FreshSupply,
) -> Result<Derivation, TransformError> {
    match &pi.rule {
        Rule::Ax => Ok(sigma.clone()),
        Rule::Weaken { var, .. } if var == x => {
            reintroduce(pi.premises[0].clone(), sigma.context(), supply)
        }
        Rule::And => subst_and(sigma, pi, x, supply),
        Rule::Mux { merged, fresh } if fresh == x => subst_mux(sigma, pi, merged, supply),
        rule => {
            let mut premises = pi.premises.clone();
            let i = premises
                .iter()
                .position(|p| p.context().contains(x))
                .ok_or_else(|| TransformError::Internal(format!("{x} vanished below {rule:?}")))?;
            premises[i] = subst(sigma, &premises[i], x, supply)?;
            Ok(Derivation::rebuild(rule, premises)?)
        }
    }
}

/// Weakens `d` by every binding of `delta`. Intersection bindings are
/// rebuilt from fresh linear components merged by `(m)`.
fn reintroduce(
    d: Derivation,
    delta: &Context,
    supply: &mut FreshSupply,
) -> Result<Derivation, TransformError> {
    delta
        .iter()
        .try_fold(d, |d, (y, t)| introduce(d, y, t, supply))
}

fn introduce(
    d: Derivation,
    y: &Name,
    t: &Type,
    supply: &mut FreshSupply,
) -> Result<Derivation, TransformError> {
    match t {
        Type::Linear(a) => Ok(weaken(d, y.clone(), a.clone())?),
        Type::Inter(cs) => {
            let mut d = d;
            let mut parts = Vec::with_capacity(cs.len());
            for c in cs {
                let yj = supply.fresh(y);
                d = introduce(d, &yj, c, supply)?;
                parts.push(yj);
            }
            Ok(mux(d, parts, y.clone())?)
        }
    }
}

/// Matches each wanted type with a distinct premise of `and_node` whose type
/// is `type_equal`, returning premise indices.
fn match_components(wanted: &[&Type], and_node: &Derivation) -> Result<Vec<usize>, TransformError> {
    let mut used = vec![false; and_node.premises.len()];
    wanted
        .iter()
        .map(|w| {
            let j = (0..used.len())
                .find(|&j| !used[j] && and_node.premises[j].ty().type_equal(w))
                .ok_or_else(|| TransformError::Internal(format!("no component of Σ proves {w}")))?;
            used[j] = true;
            Ok(j)
        })
        .collect()
}

/// Peels Σ's δ and checks the core is an `(∧k)` node.
fn split_sigma(
    sigma: &Derivation,
    k: usize,
) -> Result<(DeltaSequence, Derivation), TransformError> {
    let (delta, core) = DeltaSequence::peel(sigma.clone());
    if core.rule != Rule::And || core.premises.len() != k {
        return Err(TransformError::Internal(format!(
            "Σ of type {} does not end in an intersection tree of arity {k}",
            sigma.ty()
        )));
    }
    Ok((delta, core))
}

fn subst_and(
    sigma: &Derivation,
    pi: &Derivation,
    x: &Name,
    supply: &mut FreshSupply,
) -> Result<Derivation, TransformError> {
    let binding: Vec<usize> = (0..pi.premises.len())
        .filter(|&i| pi.premises[i].context().contains(x))
        .collect();
    let mut premises = pi.premises.clone();
    if binding.len() == 1 {
        let i = binding[0];
        premises[i] = subst(sigma, &premises[i], x, supply)?;
        return Ok(and(premises)?);
    }
    let (delta, core) = split_sigma(sigma, binding.len())?;
    let wanted: Vec<&Type> = binding
        .iter()
        .map(|&i| pi.premises[i].context().get(x).unwrap())
        .collect();
    let assignment = match_components(&wanted, &core)?;
    for (&i, &j) in binding.iter().zip(&assignment) {
        premises[i] = subst(&core.premises[j], &premises[i], x, supply)?;
    }
    Ok(delta.replay(and(premises)?)?)
}

fn subst_mux(
    sigma: &Derivation,
    pi: &Derivation,
    merged: &[Name],
    supply: &mut FreshSupply,
) -> Result<Derivation, TransformError> {
    let body = &pi.premises[0];
    let (delta, core) = split_sigma(sigma, merged.len())?;
    let wanted: Vec<&Type> = merged
        .iter()
        .map(|xi| body.context().get(xi).unwrap())
        .collect();
    let assignment = match_components(&wanted, &core)?;

    // variables bound in two or more components get one fresh copy each
    let mut owners: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
    for (j, p) in core.premises.iter().enumerate() {
        for v in p.context().names() {
            owners.entry(v.clone()).or_default().push(j);
        }
    }
    let mut copies: BTreeMap<(Name, usize), Name> = BTreeMap::new();
    let mut parts: Vec<Derivation> = core.premises.clone();
    for (v, js) in owners.iter().filter(|(_, js)| js.len() > 1) {
        for &j in js {
            let vj = supply.fresh(v);
            parts[j] = rename_free(&parts[j], v, &vj);
            copies.insert((v.clone(), j), vj);
        }
    }

    let mut acc = body.clone();
    for (xi, &j) in merged.iter().zip(&assignment) {
        acc = subst(&parts[j], &acc, xi, supply)?;
    }
    // ρ: merge the copies back, in Σ's component order
    for (v, js) in owners.iter().filter(|(_, js)| js.len() > 1) {
        let names: Vec<Name> = js
            .iter()
            .map(|&j| copies[&(v.clone(), j)].clone())
            .collect();
        acc = mux(acc, names, v.clone())?;
    }
    Ok(delta.replay(acc)?)
}

/// Moves the δ-sequence above the function premise of an `(→E)` leaf below
/// it, so that `(→I)` feeds `(→E)` directly.
pub fn commute_delta(leaf: &Derivation) -> Result<Derivation, TransformError> {
    if leaf.rule != Rule::ArrowElim {
        return Err(TransformError::Shape(format!(
            "expected (→E), found {:?}",
            leaf.rule
        )));
    }
    let leaf = freshen_locals(leaf, []);
    let mut ps = leaf.premises.clone().into_iter();
    let (f, a) = (ps.next().unwrap(), ps.next().unwrap());
    let (delta, core) = DeltaSequence::peel(f);
    if !matches!(core.rule, Rule::ArrowIntro { .. }) {
        return Err(TransformError::Shape(
            "function premise is not δ over (→I)".into(),
        ));
    }
    let out = delta
        .replay(arrow_elim(core, a)?)
        .map_err(|e| TransformError::Shape(format!("δ cannot be delayed: {e}")))?;
    verify(
        &out,
        leaf.context(),
        leaf.subject(),
        leaf.ty(),
        "commuted leaf",
    )?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DerivedStep {
    pub before: Derivation,
    pub redex: RedexPosition,
    pub after: Derivation,
    /// Intersection-tree leaves rewritten by this one term-level step.
    pub virtual_copies: usize,
}

/// Transports `pi` along the β-step at `p`.
pub fn reduce_subject(pi: &Derivation, p: &RedexPosition) -> Result<DerivedStep, TransformError> {
    let r = check_derivation(pi);
    if !r.is_ok() {
        return pre(format!("Π does not check: {r}"));
    }
    let reduct =
        reduce_at(pi.subject(), p).map_err(|e| TransformError::Precondition(e.to_string()))?;
    let d = freshen_locals(pi, []);
    let mut copies = 0;
    let after = transport(&d, p.steps(), &mut copies)?;
    verify(&after, pi.context(), &reduct, pi.ty(), "reduced derivation")?;
    Ok(DerivedStep {
        before: pi.clone(),
        redex: p.clone(),
        after,
        virtual_copies: copies,
    })
}

fn transport(
    d: &Derivation,
    path: &[Step],
    copies: &mut usize,
) -> Result<Derivation, TransformError> {
    let shape = |what: &str| TransformError::Shape(format!("{what} at {:?}", d.rule));
    match (&d.rule, path.split_first()) {
        (Rule::Weaken { .. } | Rule::Mux { .. } | Rule::And, _) => {
            let ps = d
                .premises
                .iter()
                .map(|p| transport(p, path, copies))
                .collect::<Result<_, _>>()?;
            Ok(Derivation::rebuild(&d.rule, ps)?)
        }
        (Rule::ArrowIntro { .. }, Some((Step::Body, rest))) => {
            let p = transport(&d.premises[0], rest, copies)?;
            Ok(Derivation::rebuild(&d.rule, vec![p])?)
        }
        (Rule::ArrowElim, Some((step @ (Step::Fun | Step::Arg), rest))) => {
            let i = if *step == Step::Fun { 0 } else { 1 };
            let mut ps = d.premises.clone();
            ps[i] = transport(&ps[i], rest, copies)?;
            Ok(Derivation::rebuild(&d.rule, ps)?)
        }
        (Rule::ArrowElim, None) => {
            let (delta, core) = DeltaSequence::peel(d.premises[0].clone());
            let Rule::ArrowIntro { var } = &core.rule else {
                return Err(shape("function premise is not δ over (→I)"));
            };
            let body = &core.premises[0];
            let arg = &d.premises[1];
            let mut supply = FreshSupply::avoiding(crate::derivation::all_names(d));
            let contracted = subst(arg, body, var, &mut supply)?;
            *copies += 1;
            Ok(delta.replay(contracted)?)
        }
        _ => Err(shape("path does not follow the derivation")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub term: String,
    /// `None` for the initial term.
    pub redex: Option<RedexPosition>,
    pub virtual_copies: usize,
    pub measures: MeasureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<serde_json::Value>,
}

#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub entries: Vec<TraceEntry>,
    pub derivations: Vec<Derivation>,
    /// `R(Π)` of the initial derivation; weights are compared at this `r`.
    pub rank: u64,
}

impl ReductionTrace {
    pub fn steps(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn final_derivation(&self) -> &Derivation {
        self.derivations.last().unwrap()
    }

    pub fn weights_at(&self, r: u64) -> Vec<u64> {
        self.derivations.iter().map(|d| weight(d, r)).collect()
    }

    pub fn to_json(&self, with_derivations: bool) -> serde_json::Value {
        let entries: Vec<TraceEntry> = self
            .entries
            .iter()
            .zip(&self.derivations)
            .map(|(e, d)| TraceEntry {
                derivation: with_derivations.then(|| to_json(d)),
                ..e.clone()
            })
            .collect();
        serde_json::to_value(entries).expect("trace serializes")
    }
}

/// Reduces the subject of `pi` to normal form under `strategy`, carrying the
/// derivation along and insisting that `W(·, R(pi))` strictly decreases.
pub fn normalize_with_derivation(
    pi: &Derivation,
    strategy: Strategy,
    fuel: usize,
) -> Result<ReductionTrace, TransformError> {
    let r0 = rank(pi);
    let rs: Vec<u64> = (1..=r0.max(2)).collect();
    let entry = |d: &Derivation, redex, virtual_copies| TraceEntry {
        term: d.subject().to_string(),
        redex,
        virtual_copies,
        measures: MeasureReport::new(d, rs.iter().copied()),
        derivation: None,
    };
    let mut entries = vec![entry(pi, None, 0)];
    let mut derivations = vec![pi.clone()];
    while let Some(p) = strategy.pick(derivations.last().unwrap().subject()) {
        if entries.len() > fuel {
            return Err(TransformError::FuelExhausted(fuel));
        }
        let cur = derivations.last().unwrap();
        let step = reduce_subject(cur, &p)?;
        let (w0, w1) = (weight(cur, r0), weight(&step.after, r0));
        if w1 >= w0 {
            return Err(TransformError::Internal(format!(
                "weight at r = {r0} did not decrease ({w0} → {w1}) reducing {p}"
            )));
        }
        entries.push(entry(&step.after, Some(p), step.virtual_copies));
        derivations.push(step.after);
    }
    Ok(ReductionTrace {
        entries,
        derivations,
        rank: r0,
    })
}
