//! Corpus generation and end-to-end checks of the quantitative claims:
//! measure inequalities, weight decrease along reduction, and the reduction
//! length bound `n < |M|^(D+1)`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::derivation::{
    canonical_key, check_derivation, decompose_intersection_tree, DeltaSequence, Derivation, Rule,
};
use crate::inference::{infer, infer_minimal_depth, InferError, SearchBounds};
use crate::measures::{degree, proof_size, rank, weight};
use crate::names::Name;
use crate::term::{normalize, redexes, reduction_graph, Strategy, Term, TermError};
use crate::transform::{reduce_subject, subst_derivation, TransformError};

/// Extra weights checked above the rank: `r ∈ rank..=rank + MONOTONICITY_SPAN`.
pub const MONOTONICITY_SPAN: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("derivation graph exceeds {0} states")]
    FuelExhausted(usize),
}

impl HarnessError {
    /// Running out of fuel or search bounds, as opposed to a real failure.
    pub fn is_exhaustion(&self) -> bool {
        matches!(
            self,
            HarnessError::Infer(InferError::BoundsExhausted { .. })
                | HarnessError::Term(TermError::FuelExhausted { .. })
                | HarnessError::Transform(TransformError::FuelExhausted(_))
                | HarnessError::FuelExhausted(_)
        )
    }
}

// ---------------------------------------------------------------------------
// corpus

#[derive(Debug, Clone, PartialEq, Eq)]
enum Simple {
    Base,
    Arrow(Rc<Simple>, Rc<Simple>),
}

fn random_type(rng: &mut ChaCha8Rng, depth: u32) -> Simple {
    if depth == 0 || rng.gen_bool(0.4) {
        Simple::Base
    } else {
        Simple::Arrow(
            Rc::new(random_type(rng, depth - 1)),
            Rc::new(random_type(rng, depth - 1)),
        )
    }
}

const BINDERS: [&str; 10] = ["x", "y", "z", "u", "v", "w", "p", "q", "r", "s"];

fn binder(level: usize) -> Name {
    let base = BINDERS[level % BINDERS.len()];
    match level / BINDERS.len() {
        0 => Name::new(base),
        k => Name::from(format!("{base}{k}")),
    }
}

/// A term of simple type `ty` under `env` using at most `budget` nodes.
fn synth(
    rng: &mut ChaCha8Rng,
    env: &mut Vec<(Name, Simple)>,
    ty: &Simple,
    budget: usize,
) -> Option<Term> {
    if budget == 0 {
        return None;
    }
    let mut moves = [0u8, 1, 2];
    moves.shuffle(rng);
    for mv in moves {
        let found = match mv {
            0 => {
                let vars: Vec<&Name> = env
                    .iter()
                    .rev()
                    .filter(|(_, t)| t == ty)
                    .map(|(x, _)| x)
                    .collect();
                vars.choose(rng).map(|x| Term::Var((*x).clone()))
            }
            1 => match ty {
                Simple::Arrow(dom, cod) if budget >= 2 => {
                    let x = binder(env.len());
                    env.push((x.clone(), (**dom).clone()));
                    let body = synth(rng, env, cod, budget - 1);
                    env.pop();
                    body.map(|b| Term::lam(x, b))
                }
                _ => None,
            },
            _ if budget >= 3 => {
                // lean on types already in scope so variables get reused
                let heads: Vec<&Simple> = env
                    .iter()
                    .filter_map(|(_, t)| match t {
                        Simple::Arrow(d, c) if **c == *ty => Some(&**d),
                        _ => None,
                    })
                    .collect();
                let arg_ty = match (heads.choose(rng), env.choose(rng)) {
                    (Some(d), _) if rng.gen_bool(0.5) => (*d).clone(),
                    (_, Some((_, t))) if rng.gen_bool(0.5) => t.clone(),
                    _ => random_type(rng, 1),
                };
                let fun_budget = rng.gen_range(1..=budget - 2);
                let fun_ty = Simple::Arrow(Rc::new(arg_ty.clone()), Rc::new(ty.clone()));
                synth(rng, env, &fun_ty, fun_budget).and_then(|f| {
                    let left = budget - 1 - f.size();
                    synth(rng, env, &arg_ty, left).map(|a| Term::app(f, a))
                })
            }
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Closed simply-typed terms of size at most `max_size`, distinct up to α.
/// Same seed, same list. May return fewer than `count` terms when the size
/// limit leaves too few distinct ones.
pub fn gen_sn_terms(seed: u64, count: usize, max_size: usize) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    if max_size < 2 {
        return out;
    }
    let attempts = count.saturating_mul(200).max(1000);
    for _ in 0..attempts {
        if out.len() >= count {
            break;
        }
        let ty = random_type(&mut rng, 2);
        let budget = rng.gen_range(2..=max_size);
        if let Some(t) = synth(&mut rng, &mut Vec::new(), &ty, budget) {
            if t.size() <= max_size && seen.insert(t.alpha_key()) {
                out.push(t);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// per-derivation checks

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundVerdicts {
    /// `n < |M|^(D+1)`
    pub longest_below_bound: bool,
    /// every normal form reached in one or more steps is below the bound
    pub normal_forms_below_bound: bool,
    /// every term reached in one or more steps is below the bound
    pub reducts_below_bound: bool,
    /// `n < W(Π, R(Π))`
    pub longest_below_weight: bool,
}

impl BoundVerdicts {
    pub fn all(&self) -> bool {
        self.longest_below_bound
            && self.normal_forms_below_bound
            && self.reducts_below_bound
            && self.longest_below_weight
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub term: String,
    pub subject_size: u64,
    pub degree: u64,
    pub rank: u64,
    pub theorem_bound: u128,
    pub longest_reduction: u64,
    pub max_normal_form_size: u64,
    pub max_reduct_size: u64,
    pub weight_ceiling: u64,
    pub verdicts: BoundVerdicts,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.verdicts.all()
    }
}

/// Checks the reduction bounds for `m` against the measures of `pi`.
pub fn verify_bounds(m: &Term, pi: &Derivation, fuel: usize) -> Result<BoundReport, HarnessError> {
    let report = check_derivation(pi);
    if !report.is_ok() {
        return Err(HarnessError::Precondition(format!(
            "derivation does not check: {report}"
        )));
    }
    if !pi.subject().alpha_eq(m) {
        return Err(HarnessError::Precondition(format!(
            "derivation types {}, not {m}",
            pi.subject()
        )));
    }
    let g = reduction_graph(m, fuel)?;
    let size = m.size() as u64;
    let d = degree(pi);
    let bound = u128::from(size).pow((d + 1) as u32);
    let ceiling = weight(pi, rank(pi));
    let longest = g.longest as u64;
    // a term already normal is its own normal form after zero steps
    let nf = if longest == 0 {
        0
    } else {
        g.max_normal_form_size() as u64
    };
    let reduct = g.max_reduct_size as u64;
    Ok(BoundReport {
        term: m.to_string(),
        subject_size: size,
        degree: d,
        rank: rank(pi),
        theorem_bound: bound,
        longest_reduction: longest,
        max_normal_form_size: g.max_normal_form_size() as u64,
        max_reduct_size: reduct,
        weight_ceiling: ceiling,
        verdicts: BoundVerdicts {
            longest_below_bound: u128::from(longest) < bound,
            normal_forms_below_bound: u128::from(nf) < bound,
            reducts_below_bound: u128::from(reduct) < bound,
            longest_below_weight: longest < ceiling,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerCheck {
    pub r: u64,
    pub weight: u64,
    /// `r^D · W(Π, 1)`
    pub ceiling: u128,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma3mReport {
    pub rank: u64,
    pub subject_size: u64,
    pub proof_size: u64,
    pub degree: u64,
    pub weight_at_1: u64,
    /// `R(Π) ≤ |M| ≤ |Π|`
    pub rank_size_chain: bool,
    /// `W(Π, 1) = |M|`
    pub weight_at_1_is_size: bool,
    pub powers: Vec<PowerCheck>,
}

impl Lemma3mReport {
    pub fn passed(&self) -> bool {
        self.rank_size_chain && self.weight_at_1_is_size && self.powers.iter().all(|p| p.ok)
    }
}

pub fn check_lemma3m(pi: &Derivation, rs: RangeInclusive<u64>) -> Lemma3mReport {
    let (rk, m, p, d) = (
        rank(pi),
        pi.subject().size() as u64,
        proof_size(pi),
        degree(pi),
    );
    let w1 = weight(pi, 1);
    let powers = rs
        .map(|r| {
            let w = weight(pi, r);
            let ceiling = u128::from(r).pow(d as u32) * u128::from(w1);
            PowerCheck {
                r,
                weight: w,
                ceiling,
                ok: u128::from(w) <= ceiling,
            }
        })
        .collect();
    Lemma3mReport {
        rank: rk,
        subject_size: m,
        proof_size: p,
        degree: d,
        weight_at_1: w1,
        rank_size_chain: rk <= m && m <= p,
        weight_at_1_is_size: w1 == m,
        powers,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    /// Distinct derivations visited, up to local renaming.
    pub states: usize,
    pub edges: usize,
    /// Edge checks performed, one per edge and `r`.
    pub checks: usize,
    pub violations: Vec<String>,
    /// Informational: edges along which the rank went up.
    pub rank_increases: usize,
    /// Informational: edges along which the degree went up.
    pub degree_increases: usize,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Transports `pi` along every redex of every reachable derivation and
/// checks `W(Π', r) < W(Π, r)` for `r` from the source's rank up to
/// [`MONOTONICITY_SPAN`] above it. `fuel` caps the number of states.
pub fn check_weight_monotonicity(
    pi: &Derivation,
    fuel: usize,
) -> Result<MonotonicityReport, HarnessError> {
    let report = check_derivation(pi);
    if !report.is_ok() {
        return Err(HarnessError::Precondition(format!(
            "derivation does not check: {report}"
        )));
    }
    let mut out = MonotonicityReport {
        states: 1,
        edges: 0,
        checks: 0,
        violations: Vec::new(),
        rank_increases: 0,
        degree_increases: 0,
    };
    let mut seen = HashSet::new();
    seen.insert(canonical_key(pi));
    let mut stack = vec![pi.clone()];
    while let Some(d) = stack.pop() {
        let r0 = rank(&d);
        for p in redexes(d.subject()) {
            out.edges += 1;
            let after = match reduce_subject(&d, &p) {
                Ok(step) => step.after,
                Err(e) => {
                    out.violations
                        .push(format!("{} at {p}: transport failed: {e}", d.subject()));
                    continue;
                }
            };
            for r in r0..=r0 + MONOTONICITY_SPAN {
                out.checks += 1;
                let (wb, wa) = (weight(&d, r), weight(&after, r));
                if wa >= wb {
                    out.violations.push(format!(
                        "{} at {p}, r = {r}: W went {wb} → {wa}",
                        d.subject()
                    ));
                }
            }
            out.rank_increases += usize::from(rank(&after) > r0);
            out.degree_increases += usize::from(degree(&after) > degree(&d));
            if seen.insert(canonical_key(&after)) {
                if seen.len() > fuel {
                    return Err(HarnessError::FuelExhausted(fuel));
                }
                stack.push(after);
            }
        }
    }
    out.states = seen.len();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    /// Subderivations with an intersection conclusion.
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Every subderivation concluding with an intersection type must
/// decompose into a proper tree whose leaves match the type's elements.
pub fn check_intersection_trees(pi: &Derivation) -> TreeReport {
    let mut out = TreeReport {
        checked: 0,
        violations: Vec::new(),
    };
    for d in pi.subderivations() {
        if d.ty().is_linear() {
            continue;
        }
        out.checked += 1;
        let tree = decompose_intersection_tree(d);
        let leaves = tree.leaf_count();
        if tree.is_empty() || leaves < 2 || leaves != d.ty().element_count() {
            out.violations
                .push(format!("{}: {} has {leaves} leaves", d.subject(), d.ty()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// substitution pairs

/// `Σ ▷ Δ ⊢ N : σ` and `Π ▷ Γ, x : σ ⊢ M : τ`.
#[derive(Debug, Clone)]
pub struct SubstPair {
    pub sigma: Derivation,
    pub pi: Derivation,
    pub var: Name,
}

/// The pairs sitting at the redexes of `d`: the body of each abstraction
/// applied (through δ rules) and its argument.
pub fn redex_pairs(d: &Derivation) -> Vec<SubstPair> {
    let mut out = Vec::new();
    for node in d.subderivations() {
        if node.rule != Rule::ArrowElim {
            continue;
        }
        let (_, core) = DeltaSequence::peel(node.premises[0].clone());
        if let Rule::ArrowIntro { var } = &core.rule {
            out.push(SubstPair {
                sigma: node.premises[1].clone(),
                pi: core.premises[0].clone(),
                var: var.clone(),
            });
        }
    }
    out
}

/// Up to `count` pairs drawn from the redexes of `ds`, in a seeded order.
pub fn sample_subst_pairs(ds: &[Derivation], seed: u64, count: usize) -> Vec<SubstPair> {
    let mut all: Vec<SubstPair> = ds.iter().flat_map(redex_pairs).collect();
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all.truncate(count);
    all
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstCheck {
    pub r: u64,
    /// `(r, W(S(Σ, Π), r), W(Π, r) + W(Σ, r))` at `r` and `r + 1`
    pub weights: Vec<(u64, u64, u64)>,
    pub conclusion_ok: bool,
    pub weights_ok: bool,
}

impl SubstCheck {
    pub fn passed(&self) -> bool {
        self.conclusion_ok && self.weights_ok
    }
}

/// Builds `S(Σ, Π)` and checks its conclusion and weight against the parts,
/// at `r = max(R(Π), R(Σ))` and `r + 1`.
pub fn check_subst_pair(pair: &SubstPair) -> Result<SubstCheck, HarnessError> {
    let s = subst_derivation(&pair.sigma, &pair.pi, &pair.var)?;
    let ctx = pair.pi.context().without(&pair.var);
    let expected_ctx = ctx
        .disjoint_union(pair.sigma.context())
        .map_err(|e| HarnessError::Precondition(e.to_string()))?;
    let conclusion_ok = check_derivation(&s).is_ok()
        && s.context().equiv(&expected_ctx)
        && s.subject().alpha_eq(
            &pair
                .pi
                .subject()
                .substitute(&pair.var, pair.sigma.subject()),
        )
        && s.ty().type_equal(pair.pi.ty());
    let r = rank(&pair.pi).max(rank(&pair.sigma));
    let weights: Vec<(u64, u64, u64)> = [r, r + 1]
        .iter()
        .map(|&r| {
            (
                r,
                weight(&s, r),
                weight(&pair.pi, r) + weight(&pair.sigma, r),
            )
        })
        .collect();
    let weights_ok = weights.iter().all(|(_, ws, sum)| ws <= sum);
    Ok(SubstCheck {
        r,
        weights,
        conclusion_ok,
        weights_ok,
    })
}

// ---------------------------------------------------------------------------
// the family (λx y. y x … x)(I I)

/// `(λx y. y x … x) (I I)` with `n` copies of `x` and `I = λz. z`.
pub fn remark_term(n: usize) -> Term {
    let mut body = Term::var("y");
    for _ in 0..n {
        body = Term::app(body, Term::var("x"));
    }
    let f = Term::lam("x", Term::lam("y", body));
    let id = || Term::lam("z", Term::var("z"));
    Term::app(f, Term::app(id(), id()))
}

/// Figures quoted for this family; reported, never asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimedFigures {
    pub subject_size: u64,
    pub reductions: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemarkRow {
    pub n: usize,
    pub term: String,
    pub subject_size: u64,
    pub longest_reduction: u64,
    pub degree: u64,
    pub rank: u64,
    pub proof_size: u64,
    pub theorem_bound: u128,
    pub weight_ceiling: u64,
    pub verdicts: BoundVerdicts,
    pub claimed: ClaimedFigures,
}

impl RemarkRow {
    pub fn passed(&self) -> bool {
        self.verdicts.all()
    }
}

pub fn remark_family_report(
    n_max: usize,
    b: &SearchBounds,
    fuel: usize,
) -> Result<Vec<RemarkRow>, HarnessError> {
    if n_max == 0 {
        return Err(HarnessError::Precondition(
            "n_max must be at least 1".into(),
        ));
    }
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let m = remark_term(n);
            let (pi, d) = infer_minimal_depth(&m, b)?;
            let report = verify_bounds(&m, &pi, fuel)?;
            let k = n as u64;
            Ok(RemarkRow {
                n,
                term: m.to_string(),
                subject_size: report.subject_size,
                longest_reduction: report.longest_reduction,
                degree: d,
                rank: report.rank,
                proof_size: proof_size(&pi),
                theorem_bound: report.theorem_bound,
                weight_ceiling: report.weight_ceiling,
                verdicts: report.verdicts,
                claimed: ClaimedFigures {
                    subject_size: 2 * k + 6,
                    reductions: 2 * k + 1,
                    bound: 2 * k + 6,
                },
            })
        })
        .collect()
}

pub fn render_remark_table(rows: &[RemarkRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>2}  {:>4} {:>6}  {:>7} {:>7}  {:>6} {:>4}  {:>8} {:>7}  {:>11}  verdict",
        "n",
        "|M|",
        "claim",
        "longest",
        "claim",
        "degree",
        "rank",
        "|M|^(D+1)",
        "W(Π,R)",
        "claim bound"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>2}  {:>4} {:>6}  {:>7} {:>7}  {:>6} {:>4}  {:>8} {:>7}  {:>11}  {}",
            r.n,
            r.subject_size,
            r.claimed.subject_size,
            r.longest_reduction,
            r.claimed.reductions,
            r.degree,
            r.rank,
            r.theorem_bound,
            r.weight_ceiling,
            r.claimed.bound,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    out.push_str("claim columns: expected figures quoted for this family, informational only\n");
    out
}

// ---------------------------------------------------------------------------
// corpus suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub max_size: usize,
    pub bounds: SearchBounds,
    /// Reduction fuel for the term-level graph.
    pub fuel: usize,
    /// State cap for the derivation-level graph.
    pub graph_fuel: usize,
    /// Substitution pairs to sample.
    pub subst_pairs: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 42,
            count: 500,
            max_size: 12,
            bounds: SearchBounds::default(),
            fuel: crate::term::DEFAULT_FUEL,
            graph_fuel: 100_000,
            subst_pairs: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteSummary {
    pub name: &'static str,
    pub items: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SuiteSummary {
    fn new(name: &'static str) -> Self {
        SuiteSummary {
            name,
            items: 0,
            checks: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub term: Term,
    pub derivation: Derivation,
    pub degree: u64,
}

/// Infers a derivation for every term, in parallel, keeping input order.
pub fn infer_corpus(terms: &[Term], b: &SearchBounds) -> Vec<Result<CorpusItem, InferError>> {
    terms
        .par_iter()
        .map(|m| {
            infer(m, b).map(|r| CorpusItem {
                term: m.clone(),
                derivation: r.derivation,
                degree: r.degree,
            })
        })
        .collect()
}

/// Inference soundness: every term typed, every derivation checks and
/// types the term it was asked about.
pub fn inference_suite(results: &[Result<CorpusItem, InferError>]) -> SuiteSummary {
    let mut s = SuiteSummary::new("inference");
    for r in results {
        s.items += 1;
        s.checks += 1;
        match r {
            Ok(item) => {
                let report = check_derivation(&item.derivation);
                if !report.is_ok() {
                    s.violations.push(format!("{}: {report}", item.term));
                } else if !item.derivation.subject().alpha_eq(&item.term) {
                    s.violations.push(format!(
                        "{}: derivation types {}",
                        item.term,
                        item.derivation.subject()
                    ));
                }
            }
            Err(e) => s.violations.push(format!("inference failed: {e}")),
        }
    }
    s
}

pub fn lemma3m_suite(items: &[CorpusItem], rs: RangeInclusive<u64>) -> SuiteSummary {
    let mut s = SuiteSummary::new("measure_relations");
    for item in items {
        let r = check_lemma3m(&item.derivation, rs.clone());
        s.items += 1;
        s.checks += 2 + r.powers.len();
        if !r.passed() {
            s.violations.push(format!("{}: {r:?}", item.term));
        }
    }
    s
}

pub fn theorem_suite(items: &[CorpusItem], fuel: usize) -> (SuiteSummary, Vec<BoundReport>) {
    let reports: Vec<Result<BoundReport, HarnessError>> = items
        .par_iter()
        .map(|i| verify_bounds(&i.term, &i.derivation, fuel))
        .collect();
    let mut s = SuiteSummary::new("reduction_bound");
    let mut ok = Vec::new();
    for (item, r) in items.iter().zip(reports) {
        s.items += 1;
        s.checks += 4;
        match r {
            Ok(r) if r.passed() => ok.push(r),
            Ok(r) => {
                s.violations
                    .push(format!("{}: {:?}", item.term, r.verdicts));
                ok.push(r);
            }
            Err(e) => s.violations.push(format!("{}: {e}", item.term)),
        }
    }
    (s, ok)
}

pub fn monotonicity_suite(items: &[CorpusItem], graph_fuel: usize) -> SuiteSummary {
    let reports: Vec<Result<MonotonicityReport, HarnessError>> = items
        .par_iter()
        .map(|i| check_weight_monotonicity(&i.derivation, graph_fuel))
        .collect();
    let mut s = SuiteSummary::new("weight_monotonicity");
    for (item, r) in items.iter().zip(reports) {
        s.items += 1;
        match r {
            Ok(r) => {
                s.checks += r.checks;
                s.violations.extend(
                    r.violations
                        .into_iter()
                        .map(|v| format!("{}: {v}", item.term)),
                );
            }
            Err(e) => s.violations.push(format!("{}: {e}", item.term)),
        }
    }
    s
}

pub fn tree_suite(items: &[CorpusItem]) -> SuiteSummary {
    let mut s = SuiteSummary::new("intersection_trees");
    for item in items {
        let r = check_intersection_trees(&item.derivation);
        s.items += 1;
        s.checks += r.checked;
        s.violations.extend(r.violations);
    }
    s
}

pub fn subst_suite(items: &[CorpusItem], seed: u64, count: usize) -> SuiteSummary {
    let ds: Vec<Derivation> = items.iter().map(|i| i.derivation.clone()).collect();
    let pairs = sample_subst_pairs(&ds, seed, count);
    let results: Vec<Result<SubstCheck, HarnessError>> =
        pairs.par_iter().map(check_subst_pair).collect();
    let mut s = SuiteSummary::new("wsubs");
    for (pair, r) in pairs.iter().zip(results) {
        s.items += 1;
        s.checks += 3;
        match r {
            Ok(c) if c.passed() => {}
            Ok(c) => s.violations.push(format!(
                "{}[{}/{}]: {c:?}",
                pair.pi.subject(),
                pair.sigma.subject(),
                pair.var
            )),
            Err(e) => s.violations.push(format!(
                "{}[{}/{}]: {e}",
                pair.pi.subject(),
                pair.sigma.subject(),
                pair.var
            )),
        }
    }
    if s.items < count {
        s.violations.push(format!(
            "only {} substitution pairs available, {count} wanted",
            s.items
        ));
    }
    s
}

/// Every generated term normalizes under both strategies within fuel.
pub fn normalization_suite(terms: &[Term], fuel: usize) -> SuiteSummary {
    let mut s = SuiteSummary::new("normalization");
    for t in terms {
        s.items += 1;
        for strategy in [Strategy::LeftmostOutermost, Strategy::RightmostInnermost] {
            s.checks += 1;
            if let Err(e) = normalize(t, strategy, fuel) {
                s.violations.push(format!("{t}: {e}"));
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub config: CorpusConfig,
    pub terms: usize,
    pub suites: Vec<SuiteSummary>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteSummary::passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "corpus: {} terms (seed {}, max size {})\n",
            self.terms, self.config.seed, self.config.max_size
        );
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{:<20} {:>5} items {:>8} checks  {:>4} violations  {}",
                s.name,
                s.items,
                s.checks,
                s.violations.len(),
                if s.passed() { "pass" } else { "FAIL" }
            );
            for v in s.violations.iter().take(5) {
                let _ = writeln!(out, "    {v}");
            }
        }
        out
    }
}

/// All corpus suites in one go.
pub fn run_corpus(cfg: &CorpusConfig) -> CorpusReport {
    let terms = gen_sn_terms(cfg.seed, cfg.count, cfg.max_size);
    let results = infer_corpus(&terms, &cfg.bounds);
    let items: Vec<CorpusItem> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().cloned())
        .collect();
    let suites = vec![
        normalization_suite(&terms, cfg.fuel),
        inference_suite(&results),
        lemma3m_suite(&items, 1..=8),
        theorem_suite(&items, cfg.fuel).0,
        monotonicity_suite(&items, cfg.graph_fuel),
        tree_suite(&items),
        subst_suite(&items, cfg.seed, cfg.subst_pairs),
    ];
    CorpusReport {
        config: *cfg,
        terms: terms.len(),
        suites,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::axiom;
    use crate::derivation::fixtures::*;
    use crate::term::parse_term;

    #[test]
    fn smallest_closed_term() {
        let ts = gen_sn_terms(0, 1, 2);
        assert_eq!(ts.len(), 1);
        assert!(ts[0].alpha_eq(&parse_term("\\x. x").unwrap()));
    }

    #[test]
    fn generation_is_deterministic_and_bounded() {
        let a = gen_sn_terms(7, 50, 10);
        assert_eq!(a, gen_sn_terms(7, 50, 10));
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|t| t.size() <= 10 && t.free_vars().is_empty()));
        let keys: HashSet<_> = a.iter().map(Term::alpha_key).collect();
        assert_eq!(keys.len(), a.len());
    }

    #[test]
    fn example_bounds() {
        let d = first();
        let r = verify_bounds(d.subject(), &d, 1000).unwrap();
        assert_eq!(
            (
                r.subject_size,
                r.degree,
                r.theorem_bound,
                r.longest_reduction
            ),
            (9, 1, 81, 3)
        );
        assert_eq!(r.weight_ceiling, 13);
        assert!(r.passed());
    }

    #[test]
    fn identity_bounds() {
        let id = parse_term("\\x. x").unwrap();
        let d = infer(&id, &SearchBounds::default()).unwrap().derivation;
        let r = verify_bounds(&id, &d, 1000).unwrap();
        assert_eq!((r.theorem_bound, r.longest_reduction), (2, 0));
        assert!(r.passed());
    }

    #[test]
    fn lemma3m_on_example_and_axiom() {
        assert!(check_lemma3m(&first(), 1..=4).passed());
        assert!(check_lemma3m(&axiom("x", a()), 1..=4).passed());
    }

    #[test]
    fn example_monotonicity() {
        let r = check_weight_monotonicity(&first(), 1000).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.edges >= 3);
        let nf = check_weight_monotonicity(&third(), 1000).unwrap();
        assert_eq!(nf.edges, 0);
    }

    #[test]
    fn example_trees() {
        let r = check_intersection_trees(&first());
        assert_eq!(r.checked, 1);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn example_subst_pair() {
        let pairs = redex_pairs(&first());
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert!(check_subst_pair(p).unwrap().passed());
        }
    }

    #[test]
    fn remark_terms() {
        assert_eq!(
            remark_term(2).to_string(),
            parse_term("(\\x y. y x x) ((\\z. z) (\\z. z))")
                .unwrap()
                .to_string()
        );
        let rows = remark_family_report(2, &SearchBounds::default(), 10_000).unwrap();
        assert_eq!(rows[1].degree, 1);
        assert_eq!(rows[1].rank, 2);
        assert!(rows.iter().all(RemarkRow::passed));
    }

    #[test]
    fn small_corpus_passes() {
        let cfg = CorpusConfig {
            count: 20,
            max_size: 8,
            subst_pairs: 5,
            ..CorpusConfig::default()
        };
        let r = run_corpus(&cfg);
        assert!(r.passed(), "{}", r.render());
    }
}
