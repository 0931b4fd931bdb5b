use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Term, TermError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    /// Into the body of an abstraction.
    Body,
    /// Into the function part of an application.
    Fun,
    /// Into the argument part of an application.
    Arg,
}

/// Path from the root to a subterm.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RedexPosition(pub Vec<Step>);

impl RedexPosition {
    pub fn root() -> Self {
        RedexPosition(Vec::new())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn child(&self, step: Step) -> Self {
        let mut v = self.0.clone();
        v.push(step);
        RedexPosition(v)
    }
}

impl fmt::Display for RedexPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                Step::Body => "body",
                Step::Fun => "fun",
                Step::Arg => "arg",
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for RedexPosition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() || s == "root" {
            return Ok(RedexPosition::root());
        }
        s.split('.')
            .map(|p| match p {
                "body" => Ok(Step::Body),
                "fun" => Ok(Step::Fun),
                "arg" => Ok(Step::Arg),
                other => Err(format!("unknown path step {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(RedexPosition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    LeftmostOutermost,
    RightmostInnermost,
}

impl Strategy {
    pub fn pick(self, m: &Term) -> Option<RedexPosition> {
        match self {
            Strategy::LeftmostOutermost => redexes(m).into_iter().next(),
            Strategy::RightmostInnermost => {
                let mut path = Vec::new();
                rightmost_innermost(m, &mut path).then_some(RedexPosition(path))
            }
        }
    }
}

fn rightmost_innermost(m: &Term, path: &mut Vec<Step>) -> bool {
    match m {
        Term::Var(_) => false,
        Term::Lam(_, body) => {
            path.push(Step::Body);
            if rightmost_innermost(body, path) {
                return true;
            }
            path.pop();
            false
        }
        Term::App(f, a) => {
            path.push(Step::Arg);
            if rightmost_innermost(a, path) {
                return true;
            }
            path.pop();
            path.push(Step::Fun);
            if rightmost_innermost(f, path) {
                return true;
            }
            path.pop();
            m.is_redex()
        }
    }
}

/// All β-redex positions, leftmost-outermost first.
pub fn redexes(m: &Term) -> Vec<RedexPosition> {
    fn go(m: &Term, path: &mut Vec<Step>, out: &mut Vec<RedexPosition>) {
        match m {
            Term::Var(_) => {}
            Term::Lam(_, body) => {
                path.push(Step::Body);
                go(body, path, out);
                path.pop();
            }
            Term::App(f, a) => {
                if m.is_redex() {
                    out.push(RedexPosition(path.clone()));
                }
                path.push(Step::Fun);
                go(f, path, out);
                path.pop();
                path.push(Step::Arg);
                go(a, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(m, &mut Vec::new(), &mut out);
    out
}

impl Term {
    pub fn subterm(&self, p: &RedexPosition) -> Option<&Term> {
        let mut cur = self;
        for step in p.steps() {
            cur = match (step, cur) {
                (Step::Body, Term::Lam(_, b)) => b,
                (Step::Fun, Term::App(f, _)) => f,
                (Step::Arg, Term::App(_, a)) => a,
                _ => return None,
            };
        }
        Some(cur)
    }
}

/// Contracts the redex at `p`.
pub fn reduce_at(m: &Term, p: &RedexPosition) -> Result<Term, TermError> {
    fn go(m: &Term, steps: &[Step], p: &RedexPosition) -> Result<Term, TermError> {
        match (steps.split_first(), m) {
            (None, Term::App(f, n)) => match &**f {
                Term::Lam(x, body) => Ok(body.substitute(x, n)),
                _ => Err(TermError::NotARedex(p.clone())),
            },
            (None, _) => Err(TermError::NotARedex(p.clone())),
            (Some((Step::Body, rest)), Term::Lam(x, b)) => {
                Ok(Term::Lam(x.clone(), Box::new(go(b, rest, p)?)))
            }
            (Some((Step::Fun, rest)), Term::App(f, a)) => {
                Ok(Term::App(Box::new(go(f, rest, p)?), a.clone()))
            }
            (Some((Step::Arg, rest)), Term::App(f, a)) => {
                Ok(Term::App(f.clone(), Box::new(go(a, rest, p)?)))
            }
            _ => Err(TermError::BadPosition(p.clone())),
        }
    }
    go(m, p.steps(), p)
}

/// The reduction sequence from `m` to its normal form under `strategy`.
pub fn normalize(m: &Term, strategy: Strategy, fuel: usize) -> Result<Vec<Term>, TermError> {
    let mut seq = vec![m.clone()];
    let mut steps = 0;
    while let Some(p) = strategy.pick(seq.last().unwrap()) {
        if steps >= fuel {
            return Err(TermError::FuelExhausted { steps });
        }
        let next = reduce_at(seq.last().unwrap(), &p)?;
        seq.push(next);
        steps += 1;
    }
    Ok(seq)
}
