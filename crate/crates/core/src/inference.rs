//! Bounded derivation search.
//!
//! The term is linearized first: a variable with two or more occurrences has
//! them renamed apart, and `(m)` merges them again right under the binder (or
//! at the root, for free variables). An unused binder is weakened right under
//! its `→I`. `(∧n)` appears only where an argument is demanded at an
//! intersection type, so the shape of a derivation is fixed by the term up to
//! the arity of each argument's intersection.
//!
//! The search is depth-first over a goal stack with a trail-based unifier.
//! Iterative deepening on the degree makes the first degree that admits a
//! derivation the answer; inside one degree, branch and bound on the proof
//! size. Type metavariables still open at the end become the variable `a`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::Context;
use crate::derivation::{
    and, arrow_elim, arrow_intro, axiom, check_derivation, mux, weaken, Derivation, DerivationError,
};
use crate::measures::{degree, proof_size};
use crate::names::{FreshSupply, Name};
use crate::term::Term;
use crate::types::{LinearType, Type};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// Cap on `l(σ)` for the type of any one binding.
    pub max_type_elements: usize,
    pub max_degree: u64,
    pub max_proof_size: u64,
    /// Search nodes expanded before giving up.
    pub time_fuel: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_type_elements: 8,
            max_degree: 4,
            max_proof_size: 300,
            time_fuel: 1_000_000,
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<(), InferError> {
        let bad = |what: &str| {
            Err(InferError::InvalidBounds(format!(
                "{what} must be positive"
            )))
        };
        if self.max_type_elements == 0 {
            return bad("max_type_elements");
        }
        if self.max_proof_size == 0 {
            return bad("max_proof_size");
        }
        if self.time_fuel == 0 {
            return bad("time_fuel");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub memo_hits: u64,
    /// Complete derivations reached, including ones beaten by an earlier find.
    pub solutions: u64,
    /// Degree levels searched.
    pub degree_levels: u64,
    /// False when fuel ran out after a derivation was found but before the
    /// size search finished.
    pub size_minimal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhaustion {
    Fuel,
    SearchSpace,
}

impl fmt::Display for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exhaustion::Fuel => f.write_str("time fuel"),
            Exhaustion::SearchSpace => f.write_str("degree, size and element bounds"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferError {
    /// Nothing found within the bounds. Says nothing about typability.
    #[error("{reason} exhausted after {} search nodes; no derivation found within bounds", stats.nodes_expanded)]
    BoundsExhausted {
        reason: Exhaustion,
        stats: SearchStats,
    },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("bad context: {0}")]
    Context(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct Inferred {
    pub derivation: Derivation,
    pub degree: u64,
    pub stats: SearchStats,
}

/// A derivation of `Γ ⊢ m : A` with `Γ` synthesized over the free variables of
/// `m`, of least degree, then least proof size, then least canonical type.
pub fn infer(m: &Term, b: &SearchBounds) -> Result<Inferred, InferError> {
    run(m, None, b)
}

/// [`infer`], returning the degree the search proved minimal.
pub fn infer_minimal_depth(m: &Term, b: &SearchBounds) -> Result<(Derivation, u64), InferError> {
    infer(m, b).map(|r| (r.derivation, r.degree))
}

/// As [`infer`] but with the context given. Names in `ctx` that are not free
/// in `m` are weakened in at the root, so they must have linear types.
pub fn infer_with_context(
    m: &Term,
    ctx: &Context,
    b: &SearchBounds,
) -> Result<Inferred, InferError> {
    let free = m.free_vars();
    if let Some(x) = free.iter().find(|x| !ctx.contains(x)) {
        return Err(InferError::Context(format!(
            "free variable {x} is not in the context"
        )));
    }
    for (x, t) in ctx.iter() {
        if !free.contains(x) && !t.is_linear() {
            return Err(InferError::Context(format!(
                "{x} is unused and {t} cannot be weakened in"
            )));
        }
    }
    run(m, Some(ctx), b)
}

// ---------------------------------------------------------------------------
// linearized program

#[derive(Debug)]
enum PNode {
    Var(Name),
    Lam {
        var: Name,
        occs: Vec<Name>,
        body: usize,
    },
    App(usize, usize),
}

struct Program {
    nodes: Vec<PNode>,
    /// Proof size of the node when every argument is typed once.
    msize: Vec<u64>,
    root: usize,
    /// Free variables with their occurrence names.
    free: Vec<(Name, Vec<Name>)>,
    /// Node of each `λ`, by binder number.
    binders: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Binder {
    Lam(usize),
    Free(usize),
}

impl Program {
    fn new(m: &Term) -> Program {
        let mut p = Program {
            nodes: Vec::new(),
            msize: Vec::new(),
            root: 0,
            free: Vec::new(),
            binders: Vec::new(),
        };
        let mut occurrences: HashMap<Binder, Vec<usize>> = HashMap::new();
        let mut env: Vec<(Name, Binder)> = Vec::new();
        p.root = p.build(m, &mut env, &mut occurrences);

        let mut supply = FreshSupply::avoiding(m.all_names());
        let mut binders: Vec<Binder> = (0..p.binders.len()).map(Binder::Lam).collect();
        binders.extend((0..p.free.len()).map(Binder::Free));
        for binder in binders {
            let occ_nodes = occurrences.remove(&binder).unwrap_or_default();
            let base = match binder {
                Binder::Lam(i) => match &p.nodes[p.binders[i]] {
                    PNode::Lam { var, .. } => var.clone(),
                    _ => unreachable!(),
                },
                Binder::Free(i) => p.free[i].0.clone(),
            };
            let names: Vec<Name> = if occ_nodes.len() >= 2 {
                occ_nodes.iter().map(|_| supply.fresh(&base)).collect()
            } else {
                occ_nodes.iter().map(|_| base.clone()).collect()
            };
            for (&node, name) in occ_nodes.iter().zip(&names) {
                p.nodes[node] = PNode::Var(name.clone());
            }
            match binder {
                Binder::Lam(i) => {
                    let node = p.binders[i];
                    if let PNode::Lam { occs, .. } = &mut p.nodes[node] {
                        *occs = names;
                    }
                }
                Binder::Free(i) => p.free[i].1 = names,
            }
        }
        p.msize = vec![0; p.nodes.len()];
        // children always precede their parent
        for i in 0..p.nodes.len() {
            p.msize[i] = match &p.nodes[i] {
                PNode::Var(_) => 1,
                PNode::Lam { occs, body, .. } => 1 + u64::from(occs.len() != 1) + p.msize[*body],
                PNode::App(f, a) => 1 + p.msize[*f] + p.msize[*a],
            };
        }
        p
    }

    fn build(
        &mut self,
        m: &Term,
        env: &mut Vec<(Name, Binder)>,
        occ: &mut HashMap<Binder, Vec<usize>>,
    ) -> usize {
        match m {
            Term::Var(x) => {
                let binder = match env.iter().rev().find(|(y, _)| y == x) {
                    Some((_, b)) => *b,
                    None => {
                        let i = match self.free.iter().position(|(y, _)| y == x) {
                            Some(i) => i,
                            None => {
                                self.free.push((x.clone(), Vec::new()));
                                self.free.len() - 1
                            }
                        };
                        Binder::Free(i)
                    }
                };
                self.nodes.push(PNode::Var(x.clone()));
                let id = self.nodes.len() - 1;
                occ.entry(binder).or_default().push(id);
                id
            }
            Term::Lam(x, body) => {
                let binder = Binder::Lam(self.binders.len());
                self.binders.push(usize::MAX);
                env.push((x.clone(), binder));
                let b = self.build(body, env, occ);
                env.pop();
                self.nodes.push(PNode::Lam {
                    var: x.clone(),
                    occs: Vec::new(),
                    body: b,
                });
                let id = self.nodes.len() - 1;
                if let Binder::Lam(i) = binder {
                    self.binders[i] = id;
                }
                id
            }
            Term::App(f, a) => {
                let f = self.build(f, env, occ);
                let a = self.build(a, env, occ);
                self.nodes.push(PNode::App(f, a));
                self.nodes.len() - 1
            }
        }
    }
}

// ---------------------------------------------------------------------------
// search types

#[derive(Clone, Debug)]
enum LTy {
    Meta(u32),
    Var(Name),
    Arrow(Rc<ITy>, Rc<LTy>),
}

#[derive(Clone, Debug)]
enum ITy {
    Meta(u32),
    Lin(LTy),
    Inter(Rc<[ITy]>),
}

impl ITy {
    fn from_type(t: &Type) -> ITy {
        match t {
            Type::Linear(a) => ITy::Lin(LTy::from_linear(a)),
            Type::Inter(cs) => ITy::Inter(cs.iter().map(ITy::from_type).collect()),
        }
    }
}

impl LTy {
    fn from_linear(a: &LinearType) -> LTy {
        match a {
            LinearType::Var(v) => LTy::Var(v.clone()),
            LinearType::Arrow(d, c) => {
                LTy::Arrow(Rc::new(ITy::from_type(d)), Rc::new(LTy::from_linear(c)))
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Sk {
    Hole,
    /// A variable at any type: an axiom, or a tree of `(∧n)` over axioms
    /// when the type resolves to an intersection.
    Var {
        name: Name,
        ty: ITy,
    },
    Lam {
        node: usize,
        body: usize,
        dom: ITy,
    },
    App {
        f: usize,
        a: usize,
    },
    And(Vec<usize>),
}

#[derive(Clone, Debug)]
enum Goal {
    Gen {
        node: usize,
        slot: usize,
        demand: ITy,
        depth: u64,
    },
    Close {
        node: usize,
        body: usize,
        dom: ITy,
    },
    FreeClose {
        var: usize,
    },
    UnifyI(ITy, ITy),
    UnifyL(LTy, LTy),
    /// Match the first list against some permutation of the second.
    Match(Vec<ITy>, Vec<ITy>),
}

struct Cell {
    goal: Goal,
    next: Goals,
}

type Goals = Option<Rc<Cell>>;

fn push(goal: Goal, next: Goals) -> Goals {
    Some(Rc::new(Cell { goal, next }))
}

enum Undo {
    L(u32),
    I(u32),
    Sk(usize),
}

#[derive(Clone, Copy)]
struct Mark {
    trail: usize,
    lmeta: usize,
    imeta: usize,
    skel: usize,
}

#[derive(PartialEq, Eq)]
enum Flow {
    Continue,
    Abort,
}

struct Best {
    size: u64,
    ty: Type,
    derivation: Derivation,
}

struct Search<'a> {
    prog: &'a Program,
    bounds: SearchBounds,
    fixed: Option<Vec<ITy>>,
    weakened: Vec<(Name, LinearType)>,
    lmeta: Vec<Option<LTy>>,
    imeta: Vec<Option<ITy>>,
    skel: Vec<Sk>,
    trail: Vec<Undo>,
    root_ty: LTy,
    /// Degree allowed at the current level.
    depth: u64,
    fuel: u64,
    budget: u64,
    best: Option<Best>,
    memo: HashSet<u128>,
    stats: SearchStats,
    failure: Option<InferError>,
}

fn run(m: &Term, ctx: Option<&Context>, b: &SearchBounds) -> Result<Inferred, InferError> {
    b.validate()?;
    let prog = Program::new(m);
    let fixed = ctx.map(|c| {
        prog.free
            .iter()
            .map(|(x, _)| ITy::from_type(c.get(x).unwrap()))
            .collect()
    });
    let weakened = match ctx {
        Some(c) => c
            .iter()
            .filter(|(x, _)| !prog.free.iter().any(|(y, _)| y == *x))
            .map(|(x, t)| (x.clone(), t.as_linear().unwrap().clone()))
            .collect(),
        None => Vec::new(),
    };
    let mut s = Search {
        prog: &prog,
        bounds: *b,
        fixed,
        weakened,
        lmeta: Vec::new(),
        imeta: Vec::new(),
        skel: Vec::new(),
        trail: Vec::new(),
        root_ty: LTy::Meta(0),
        depth: 0,
        fuel: b.time_fuel,
        budget: b.max_proof_size,
        best: None,
        memo: HashSet::new(),
        stats: SearchStats::default(),
        failure: None,
    };
    for d in 0..=b.max_degree {
        s.stats.degree_levels += 1;
        let flow = s.level(d);
        if let Some(e) = s.failure.take() {
            return Err(e);
        }
        if let Some(best) = s.best.take() {
            s.stats.size_minimal = flow == Flow::Continue;
            return Ok(Inferred {
                degree: degree(&best.derivation),
                derivation: best.derivation,
                stats: s.stats,
            });
        }
        if flow == Flow::Abort {
            return Err(InferError::BoundsExhausted {
                reason: Exhaustion::Fuel,
                stats: s.stats,
            });
        }
    }
    Err(InferError::BoundsExhausted {
        reason: Exhaustion::SearchSpace,
        stats: s.stats,
    })
}

impl Search<'_> {
    fn level(&mut self, depth: u64) -> Flow {
        self.depth = depth;
        self.lmeta.clear();
        self.imeta.clear();
        self.skel.clear();
        self.trail.clear();
        self.root_ty = self.new_lmeta();
        self.skel.push(Sk::Hole);
        let mut goals: Goals = None;
        for var in (0..self.prog.free.len()).rev() {
            goals = push(Goal::FreeClose { var }, goals);
        }
        let root = Goal::Gen {
            node: self.prog.root,
            slot: 0,
            demand: ITy::Lin(self.root_ty.clone()),
            depth,
        };
        goals = push(root, goals);
        let muxes = self.prog.free.iter().filter(|(_, o)| o.len() >= 2).count() as u64;
        let used = muxes + self.weakened.len() as u64;
        self.run(goals, used, self.prog.msize[self.prog.root])
    }

    // --- metavariables and the trail

    fn new_lmeta(&mut self) -> LTy {
        self.lmeta.push(None);
        LTy::Meta(self.lmeta.len() as u32 - 1)
    }

    fn new_imeta(&mut self) -> ITy {
        self.imeta.push(None);
        ITy::Meta(self.imeta.len() as u32 - 1)
    }

    fn mark(&self) -> Mark {
        Mark {
            trail: self.trail.len(),
            lmeta: self.lmeta.len(),
            imeta: self.imeta.len(),
            skel: self.skel.len(),
        }
    }

    fn undo(&mut self, m: Mark) {
        while self.trail.len() > m.trail {
            match self.trail.pop().unwrap() {
                Undo::L(i) => self.lmeta[i as usize] = None,
                Undo::I(i) => self.imeta[i as usize] = None,
                Undo::Sk(i) => self.skel[i] = Sk::Hole,
            }
        }
        self.lmeta.truncate(m.lmeta);
        self.imeta.truncate(m.imeta);
        self.skel.truncate(m.skel);
    }

    fn bind_l(&mut self, m: u32, t: LTy) {
        self.lmeta[m as usize] = Some(t);
        self.trail.push(Undo::L(m));
    }

    fn bind_i(&mut self, m: u32, t: ITy) {
        self.imeta[m as usize] = Some(t);
        self.trail.push(Undo::I(m));
    }

    fn set(&mut self, slot: usize, sk: Sk) {
        self.skel[slot] = sk;
        self.trail.push(Undo::Sk(slot));
    }

    fn alloc(&mut self) -> usize {
        self.skel.push(Sk::Hole);
        self.skel.len() - 1
    }

    fn deref_l(&self, t: &LTy) -> LTy {
        let mut t = t.clone();
        while let LTy::Meta(m) = t {
            match &self.lmeta[m as usize] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn deref_i(&self, t: &ITy) -> ITy {
        let mut t = t.clone();
        while let ITy::Meta(m) = t {
            match &self.imeta[m as usize] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs_l(&self, m: u32, t: &LTy) -> bool {
        match self.deref_l(t) {
            LTy::Meta(n) => n == m,
            LTy::Var(_) => false,
            LTy::Arrow(d, c) => self.occurs_l_in_i(m, &d) || self.occurs_l(m, &c),
        }
    }

    fn occurs_l_in_i(&self, m: u32, t: &ITy) -> bool {
        match self.deref_i(t) {
            ITy::Meta(_) => false,
            ITy::Lin(l) => self.occurs_l(m, &l),
            ITy::Inter(cs) => cs.iter().any(|c| self.occurs_l_in_i(m, c)),
        }
    }

    fn occurs_i(&self, m: u32, t: &ITy) -> bool {
        match self.deref_i(t) {
            ITy::Meta(n) => n == m,
            ITy::Lin(l) => self.occurs_i_in_l(m, &l),
            ITy::Inter(cs) => cs.iter().any(|c| self.occurs_i(m, c)),
        }
    }

    fn occurs_i_in_l(&self, m: u32, t: &LTy) -> bool {
        match self.deref_l(t) {
            LTy::Meta(_) | LTy::Var(_) => false,
            LTy::Arrow(d, c) => self.occurs_i(m, &d) || self.occurs_i_in_l(m, &c),
        }
    }

    /// `l(σ)`, counting an open intersection metavariable as one element.
    fn elements(&self, t: &ITy) -> usize {
        match self.deref_i(t) {
            ITy::Meta(_) | ITy::Lin(_) => 1,
            ITy::Inter(cs) => cs.iter().map(|c| self.elements(c)).sum(),
        }
    }

    // --- the machine

    fn run(&mut self, mut goals: Goals, mut used: u64, mut reserved: u64) -> Flow {
        loop {
            let Some(cell) = goals.clone() else {
                return self.solution();
            };
            if self.fuel == 0 {
                return Flow::Abort;
            }
            self.fuel -= 1;
            self.stats.nodes_expanded += 1;
            goals = cell.next.clone();
            match &cell.goal {
                Goal::Gen {
                    node,
                    slot,
                    demand,
                    depth,
                } => {
                    let (node, slot, depth) = (*node, *slot, *depth);
                    if let PNode::Var(name) = &self.prog.nodes[node] {
                        // never branches: the shape is read off the type later
                        used += 1;
                        reserved -= 1;
                        self.set(
                            slot,
                            Sk::Var {
                                name: name.clone(),
                                ty: demand.clone(),
                            },
                        );
                        continue;
                    }
                    match self.deref_i(demand) {
                        ITy::Meta(m) => return self.choose_shape(m, &cell, used, reserved),
                        ITy::Inter(cs) => {
                            if depth == 0 {
                                return Flow::Continue;
                            }
                            let k = cs.len() as u64;
                            used += 1;
                            reserved += (k - 1) * self.prog.msize[node];
                            let slots: Vec<usize> = cs.iter().map(|_| self.alloc()).collect();
                            for (c, &s) in cs.iter().zip(&slots).rev() {
                                goals = push(
                                    Goal::Gen {
                                        node,
                                        slot: s,
                                        demand: c.clone(),
                                        depth: depth - 1,
                                    },
                                    goals,
                                );
                            }
                            self.set(slot, Sk::And(slots));
                        }
                        ITy::Lin(l) => {
                            reserved -= self.prog.msize[node];
                            match &self.prog.nodes[node] {
                                PNode::Var(_) => unreachable!(),
                                PNode::Lam { occs, body, .. } => {
                                    let (dom, cod) = match self.deref_l(&l) {
                                        LTy::Arrow(d, c) => ((*d).clone(), (*c).clone()),
                                        LTy::Meta(m) => {
                                            let (d, c) = (self.new_imeta(), self.new_lmeta());
                                            self.bind_l(
                                                m,
                                                LTy::Arrow(Rc::new(d.clone()), Rc::new(c.clone())),
                                            );
                                            (d, c)
                                        }
                                        LTy::Var(_) => return Flow::Continue,
                                    };
                                    used += 1 + u64::from(occs.len() != 1);
                                    reserved += self.prog.msize[*body];
                                    let b = self.alloc();
                                    self.set(
                                        slot,
                                        Sk::Lam {
                                            node,
                                            body: b,
                                            dom: dom.clone(),
                                        },
                                    );
                                    goals = push(Goal::Close { node, body: b, dom }, goals);
                                    goals = push(
                                        Goal::Gen {
                                            node: *body,
                                            slot: b,
                                            demand: ITy::Lin(cod),
                                            depth,
                                        },
                                        goals,
                                    );
                                }
                                PNode::App(f, a) => {
                                    used += 1;
                                    reserved += self.prog.msize[*f] + self.prog.msize[*a];
                                    let rho = self.new_imeta();
                                    let (sf, sa) = (self.alloc(), self.alloc());
                                    self.set(slot, Sk::App { f: sf, a: sa });
                                    let fty = LTy::Arrow(Rc::new(rho.clone()), Rc::new(l));
                                    goals = push(
                                        Goal::Gen {
                                            node: *a,
                                            slot: sa,
                                            demand: rho,
                                            depth,
                                        },
                                        goals,
                                    );
                                    goals = push(
                                        Goal::Gen {
                                            node: *f,
                                            slot: sf,
                                            demand: ITy::Lin(fty),
                                            depth,
                                        },
                                        goals,
                                    );
                                }
                            }
                        }
                    }
                    if used + reserved > self.budget {
                        return Flow::Continue;
                    }
                }
                Goal::Close { node, body, dom } => {
                    let PNode::Lam { occs, .. } = &self.prog.nodes[*node] else {
                        unreachable!()
                    };
                    let Some(target) = self.occurrence_type(occs, *body) else {
                        return Flow::Continue;
                    };
                    goals = push(Goal::UnifyI(dom.clone(), target), goals);
                }
                Goal::FreeClose { var } => {
                    let occs = &self.prog.free[*var].1;
                    let Some(target) = self.occurrence_type(occs, 0) else {
                        return Flow::Continue;
                    };
                    if let Some(fixed) = &self.fixed {
                        goals = push(Goal::UnifyI(fixed[*var].clone(), target), goals);
                    }
                }
                Goal::UnifyI(s, t) => match (self.deref_i(s), self.deref_i(t)) {
                    (ITy::Meta(m), ITy::Meta(n)) if m == n => {}
                    (ITy::Meta(m), u) | (u, ITy::Meta(m)) => {
                        if self.occurs_i(m, &u) {
                            return Flow::Continue;
                        }
                        self.bind_i(m, u);
                    }
                    (ITy::Lin(a), ITy::Lin(b)) => goals = push(Goal::UnifyL(a, b), goals),
                    (ITy::Inter(cs), ITy::Inter(ds)) if cs.len() == ds.len() => {
                        goals = push(Goal::Match(cs.to_vec(), ds.to_vec()), goals);
                    }
                    _ => return Flow::Continue,
                },
                Goal::UnifyL(a, b) => match (self.deref_l(a), self.deref_l(b)) {
                    (LTy::Meta(m), LTy::Meta(n)) if m == n => {}
                    (LTy::Meta(m), u) | (u, LTy::Meta(m)) => {
                        if self.occurs_l(m, &u) {
                            return Flow::Continue;
                        }
                        self.bind_l(m, u);
                    }
                    (LTy::Var(x), LTy::Var(y)) if x == y => {}
                    (LTy::Arrow(d1, c1), LTy::Arrow(d2, c2)) => {
                        goals = push(Goal::UnifyL((*c1).clone(), (*c2).clone()), goals);
                        goals = push(Goal::UnifyI((*d1).clone(), (*d2).clone()), goals);
                    }
                    _ => return Flow::Continue,
                },
                Goal::Match(cs, ds) => {
                    if cs.is_empty() {
                        continue;
                    }
                    if ds.len() == 1 {
                        goals = push(Goal::UnifyI(cs[0].clone(), ds[0].clone()), goals);
                        continue;
                    }
                    return self.choose_match(&cell, used, reserved);
                }
            }
        }
    }

    /// The type the binder must receive: weakened, the lone occurrence's, or
    /// the flat intersection of all occurrences'.
    fn occurrence_type(&mut self, occs: &[Name], body: usize) -> Option<ITy> {
        let t = match occs.len() {
            0 => ITy::Lin(self.new_lmeta()),
            1 => self.ctx_type(body, &occs[0])?,
            _ => {
                let parts: Option<Vec<ITy>> = occs.iter().map(|o| self.ctx_type(body, o)).collect();
                ITy::Inter(parts?.into())
            }
        };
        (self.elements(&t) <= self.bounds.max_type_elements).then_some(t)
    }

    /// The type `name` receives in the context of the skeleton at `slot`.
    fn ctx_type(&self, slot: usize, name: &Name) -> Option<ITy> {
        match &self.skel[slot] {
            Sk::Hole => None,
            Sk::Var { name: n, ty } => (n == name).then(|| ty.clone()),
            Sk::Lam { node, body, .. } => match &self.prog.nodes[*node] {
                PNode::Lam { var, .. } if var == name => None,
                _ => self.ctx_type(*body, name),
            },
            Sk::App { f, a } => self.ctx_type(*f, name).or_else(|| self.ctx_type(*a, name)),
            Sk::And(ch) => {
                let mut ts: Vec<ITy> = ch.iter().filter_map(|c| self.ctx_type(*c, name)).collect();
                match ts.len() {
                    0 => None,
                    1 => ts.pop(),
                    _ => Some(ITy::Inter(ts.into())),
                }
            }
        }
    }

    /// An open argument type: linear first, then intersections of growing arity.
    fn choose_shape(&mut self, m: u32, cell: &Rc<Cell>, used: u64, reserved: u64) -> Flow {
        let Goal::Gen { node, depth, .. } = &cell.goal else {
            unreachable!()
        };
        let key = self.fingerprint(&Some(cell.clone()), used);
        if self.memo.contains(&key) {
            self.stats.memo_hits += 1;
            return Flow::Continue;
        }
        let before = self.mark();
        let again = Some(cell.clone());
        let lin = self.new_lmeta();
        self.bind_i(m, ITy::Lin(lin));
        if self.run(again.clone(), used, reserved) == Flow::Abort {
            return Flow::Abort;
        }
        self.undo(before);
        if *depth > 0 {
            for k in 2..=self.bounds.max_type_elements as u64 {
                if used + reserved + (k - 1) * self.prog.msize[*node] + 1 > self.budget {
                    break;
                }
                let parts: Vec<ITy> = (0..k).map(|_| self.new_imeta()).collect();
                self.bind_i(m, ITy::Inter(parts.into()));
                if self.run(again.clone(), used, reserved) == Flow::Abort {
                    return Flow::Abort;
                }
                self.undo(before);
            }
        }
        self.memo.insert(key);
        Flow::Continue
    }

    fn choose_match(&mut self, cell: &Rc<Cell>, used: u64, reserved: u64) -> Flow {
        let Goal::Match(cs, ds) = &cell.goal else {
            unreachable!()
        };
        let key = self.fingerprint(&Some(cell.clone()), used);
        if self.memo.contains(&key) {
            self.stats.memo_hits += 1;
            return Flow::Continue;
        }
        let before = self.mark();
        let mut tried: Vec<Vec<u32>> = Vec::new();
        for j in 0..ds.len() {
            // identical candidates give identical branches
            let mut enc = Encoder::default();
            self.encode_i(&ds[j], &mut enc);
            if tried.contains(&enc.out) {
                continue;
            }
            tried.push(enc.out);
            let mut rest = ds.clone();
            let dj = rest.remove(j);
            let next = push(Goal::Match(cs[1..].to_vec(), rest), cell.next.clone());
            let goals = push(Goal::UnifyI(cs[0].clone(), dj), next);
            if self.run(goals, used, reserved) == Flow::Abort {
                return Flow::Abort;
            }
            self.undo(before);
        }
        self.memo.insert(key);
        Flow::Continue
    }

    // --- solutions

    fn solution(&mut self) -> Flow {
        self.stats.solutions += 1;
        let d = match self.build_root() {
            Ok(d) => d,
            Err(e) => {
                self.failure = Some(InferError::Internal(format!(
                    "could not assemble a derivation: {e}"
                )));
                return Flow::Abort;
            }
        };
        let report = check_derivation(&d);
        if !report.is_ok() {
            self.failure = Some(InferError::Internal(format!(
                "assembled derivation does not check: {report}"
            )));
            return Flow::Abort;
        }
        let size = proof_size(&d);
        if size > self.budget || degree(&d) > self.depth {
            return Flow::Continue;
        }
        let ty = d.ty().canonicalize();
        let better = match &self.best {
            None => true,
            Some(b) => size < b.size || (size == b.size && ty < b.ty),
        };
        if better {
            self.budget = size;
            self.best = Some(Best {
                size,
                ty,
                derivation: d,
            });
        }
        Flow::Continue
    }

    fn resolve_l(&self, t: &LTy) -> LinearType {
        match self.deref_l(t) {
            LTy::Meta(_) => LinearType::var("a"),
            LTy::Var(v) => LinearType::Var(v),
            LTy::Arrow(d, c) => LinearType::arrow(self.resolve_i(&d), self.resolve_l(&c)),
        }
    }

    fn resolve_i(&self, t: &ITy) -> Type {
        match self.deref_i(t) {
            ITy::Meta(_) => Type::var("a"),
            ITy::Lin(l) => Type::Linear(self.resolve_l(&l)),
            ITy::Inter(cs) => Type::Inter(cs.iter().map(|c| self.resolve_i(c)).collect()),
        }
    }

    fn build(&self, slot: usize) -> Result<Derivation, DerivationError> {
        match &self.skel[slot] {
            Sk::Hole => unreachable!("hole in a finished skeleton"),
            Sk::Var { name, ty } => var_tree(name, &self.resolve_i(ty)),
            Sk::App { f, a } => arrow_elim(self.build(*f)?, self.build(*a)?),
            Sk::And(ch) => and(ch
                .iter()
                .map(|c| self.build(*c))
                .collect::<Result<_, _>>()?),
            Sk::Lam { node, body, dom } => {
                let PNode::Lam { var, occs, .. } = &self.prog.nodes[*node] else {
                    unreachable!()
                };
                let d = self.build(*body)?;
                let d = match occs.len() {
                    0 => match self.resolve_i(dom) {
                        Type::Linear(a) => weaken(d, var.clone(), a)?,
                        other => return Err(DerivationError::NotLinear(other)),
                    },
                    1 => d,
                    _ => mux(d, occs.clone(), var.clone())?,
                };
                arrow_intro(d, var.clone())
            }
        }
    }

    fn build_root(&self) -> Result<Derivation, DerivationError> {
        let mut d = self.build(0)?;
        for (x, occs) in &self.prog.free {
            if occs.len() >= 2 {
                d = mux(d, occs.clone(), x.clone())?;
            }
        }
        for (x, a) in &self.weakened {
            d = weaken(d, x.clone(), a.clone())?;
        }
        Ok(d)
    }

    // --- memo keys

    /// Everything the rest of the search can observe: the pending goals with
    /// their types resolved, the occurrence types pending closes will read,
    /// the root type, and the size used so far. Metavariables are numbered
    /// by first appearance, so states differing only in meta identities
    /// share a key.
    fn fingerprint(&self, goals: &Goals, used: u64) -> u128 {
        let mut enc = Encoder::default();
        enc.out.push(used as u32);
        self.encode_l(&self.root_ty, &mut enc);
        // variable types decide the final size and degree
        for sk in &self.skel {
            if let Sk::Var { ty, .. } = sk {
                self.encode_i(ty, &mut enc);
            }
        }
        let mut g = goals.clone();
        while let Some(cell) = g {
            match &cell.goal {
                Goal::Gen {
                    node,
                    slot,
                    demand,
                    depth,
                } => {
                    enc.out
                        .extend([1, *node as u32, *slot as u32, *depth as u32]);
                    self.encode_i(demand, &mut enc);
                }
                Goal::Close { node, body, dom } => {
                    enc.out.extend([2, *node as u32]);
                    self.encode_i(dom, &mut enc);
                    let PNode::Lam { occs, .. } = &self.prog.nodes[*node] else {
                        unreachable!()
                    };
                    for o in occs {
                        self.encode_ctx(*body, o, &mut enc);
                    }
                }
                Goal::FreeClose { var } => {
                    enc.out.extend([3, *var as u32]);
                    for o in &self.prog.free[*var].1 {
                        self.encode_ctx(0, o, &mut enc);
                    }
                }
                Goal::UnifyI(s, t) => {
                    enc.out.push(4);
                    self.encode_i(s, &mut enc);
                    self.encode_i(t, &mut enc);
                }
                Goal::UnifyL(a, b) => {
                    enc.out.push(5);
                    self.encode_l(a, &mut enc);
                    self.encode_l(b, &mut enc);
                }
                Goal::Match(cs, ds) => {
                    enc.out.extend([6, cs.len() as u32]);
                    for t in cs.iter().chain(ds) {
                        self.encode_i(t, &mut enc);
                    }
                }
            }
            g = cell.next.clone();
        }
        enc.finish()
    }

    fn encode_l(&self, t: &LTy, enc: &mut Encoder) {
        match self.deref_l(t) {
            LTy::Meta(m) => {
                let n = enc.meta(0, m);
                enc.out.extend([10, n]);
            }
            LTy::Var(v) => {
                let n = enc.name(&v);
                enc.out.extend([11, n]);
            }
            LTy::Arrow(d, c) => {
                enc.out.push(12);
                self.encode_i(&d, enc);
                self.encode_l(&c, enc);
            }
        }
    }

    fn encode_i(&self, t: &ITy, enc: &mut Encoder) {
        match self.deref_i(t) {
            ITy::Meta(m) => {
                let n = enc.meta(1, m);
                enc.out.extend([13, n]);
            }
            ITy::Lin(l) => self.encode_l(&l, enc),
            ITy::Inter(cs) => {
                enc.out.extend([14, cs.len() as u32]);
                for c in cs.iter() {
                    self.encode_i(c, enc);
                }
            }
        }
    }

    fn encode_ctx(&self, slot: usize, name: &Name, enc: &mut Encoder) {
        match &self.skel[slot] {
            Sk::Hole => enc.out.extend([20, slot as u32]),
            Sk::Var { name: n, ty } => {
                if n == name {
                    enc.out.push(21);
                    self.encode_i(ty, enc);
                }
            }
            Sk::Lam { node, body, .. } => match &self.prog.nodes[*node] {
                PNode::Lam { var, .. } if var == name => {}
                _ => self.encode_ctx(*body, name, enc),
            },
            Sk::App { f, a } => {
                self.encode_ctx(*f, name, enc);
                self.encode_ctx(*a, name, enc);
            }
            Sk::And(ch) => {
                enc.out.extend([22, ch.len() as u32]);
                for c in ch {
                    self.encode_ctx(*c, name, enc);
                }
                enc.out.push(23);
            }
        }
    }
}

fn var_tree(x: &Name, t: &Type) -> Result<Derivation, DerivationError> {
    match t {
        Type::Linear(a) => Ok(axiom(x.clone(), a.clone())),
        Type::Inter(cs) => and(cs
            .iter()
            .map(|c| var_tree(x, c))
            .collect::<Result<_, _>>()?),
    }
}

#[derive(Default)]
struct Encoder {
    out: Vec<u32>,
    metas: HashMap<(u8, u32), u32>,
    names: HashMap<Name, u32>,
}

impl Encoder {
    fn meta(&mut self, kind: u8, m: u32) -> u32 {
        let n = self.metas.len() as u32;
        *self.metas.entry((kind, m)).or_insert(n)
    }

    fn name(&mut self, v: &Name) -> u32 {
        let n = self.names.len() as u32;
        *self.names.entry(v.clone()).or_insert(n)
    }

    fn finish(&self) -> u128 {
        let half = |salt: u64| {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            salt.hash(&mut h);
            self.out.hash(&mut h);
            h.finish()
        };
        (u128::from(half(0x5eed)) << 64) | u128::from(half(0xfeed))
    }
}
