//! Typing contexts and their two combinators: intersection (for `∧n`) and
//! disjoint union (for `→E`).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::names::Name;
use crate::types::Type;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context(BTreeMap<Name, Type>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("contexts overlap on {}", join(.0))]
pub struct OverlapError(pub Vec<Name>);

fn join(names: &[Name]) -> String {
    names
        .iter()
        .map(|n| n.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: Name, t: Type) -> Self {
        let mut c = Self::new();
        c.insert(x, t);
        c
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    pub fn insert(&mut self, x: Name, t: Type) -> Option<Type> {
        self.0.insert(x, t)
    }

    pub fn remove(&mut self, x: &str) -> Option<Type> {
        self.0.remove(x)
    }

    pub fn with(&self, x: Name, t: Type) -> Self {
        let mut c = self.clone();
        c.insert(x, t);
        c
    }

    pub fn without(&self, x: &str) -> Self {
        let mut c = self.clone();
        c.remove(x);
        c
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.0.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    /// Same domain and pairwise `type_equal` bindings.
    pub fn equiv(&self, other: &Context) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .all(|(x, t)| other.get(x).is_some_and(|u| t.type_equal(u)))
    }

    pub fn canonicalize(&self) -> Context {
        Context(
            self.0
                .iter()
                .map(|(x, t)| (x.clone(), t.canonicalize()))
                .collect(),
        )
    }

    /// `Γ ⊎ Δ`, failing when the domains meet.
    pub fn disjoint_union(&self, other: &Context) -> Result<Context, OverlapError> {
        let overlap: Vec<Name> = self
            .names()
            .filter(|x| other.contains(x))
            .cloned()
            .collect();
        if !overlap.is_empty() {
            return Err(OverlapError(overlap));
        }
        let mut out = self.clone();
        out.0
            .extend(other.iter().map(|(x, t)| (x.clone(), t.clone())));
        Ok(out)
    }
}

/// `⋀ Γi`: a variable bound in several contexts receives one flat
/// intersection of its types, in argument order.
pub fn ctx_intersect(gs: &[Context]) -> Context {
    let mut acc: BTreeMap<Name, Vec<Type>> = BTreeMap::new();
    for g in gs {
        for (x, t) in g.iter() {
            acc.entry(x.clone()).or_default().push(t.clone());
        }
    }
    Context(
        acc.into_iter()
            .map(|(x, mut ts)| {
                let t = if ts.len() == 1 {
                    ts.pop().unwrap()
                } else {
                    Type::Inter(ts)
                };
                (x, t)
            })
            .collect(),
    )
}

impl FromIterator<(Name, Type)> for Context {
    fn from_iter<I: IntoIterator<Item = (Name, Type)>>(iter: I) -> Self {
        Context(iter.into_iter().collect())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, t)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}: {t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}
