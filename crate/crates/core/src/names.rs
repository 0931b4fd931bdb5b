//! Identifiers and the deterministic fresh-name supply.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

/// An interned-ish identifier shared cheaply between terms, types and contexts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with any trailing `_<digits>` counter removed.
    pub fn stem(&self) -> &str {
        let s = self.as_str();
        if let Some(idx) = s.rfind('_') {
            let tail = &s[idx + 1..];
            if idx > 0 && !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
                return &s[..idx];
            }
        }
        s
    }
}

impl Deref for Name {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Generates `stem_1`, `stem_2`, ... avoiding every name it has been told about.
///
/// Output depends only on the sequence of calls, so traces are reproducible.
#[derive(Debug, Clone, Default)]
pub struct FreshSupply {
    used: HashSet<Name>,
    counters: HashMap<String, usize>,
}

impl FreshSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<I: IntoIterator<Item = Name>>(names: I) -> Self {
        let mut supply = Self::new();
        supply.reserve_all(names);
        supply
    }

    pub fn reserve(&mut self, name: Name) {
        self.used.insert(name);
    }

    pub fn reserve_all<I: IntoIterator<Item = Name>>(&mut self, names: I) {
        self.used.extend(names);
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    /// A name derived from `base` that has never been used or reserved.
    pub fn fresh(&mut self, base: &Name) -> Name {
        let stem = base.stem().to_string();
        let counter = self.counters.entry(stem.clone()).or_insert(0);
        loop {
            *counter += 1;
            let candidate = Name::from(format!("{stem}_{counter}"));
            if !self.used.contains(&candidate) {
                self.used.insert(candidate.clone());
                return candidate;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stem_strips_counter_suffix() {
        assert_eq!(Name::new("x_12").stem(), "x");
        assert_eq!(Name::new("x_").stem(), "x_");
        assert_eq!(Name::new("x1").stem(), "x1");
        assert_eq!(Name::new("_1").stem(), "_1");
    }

    #[test]
    fn fresh_skips_reserved_names() {
        let mut supply = FreshSupply::avoiding([Name::new("x"), Name::new("x_1")]);
        assert_eq!(supply.fresh(&Name::new("x")).as_str(), "x_2");
        assert_eq!(supply.fresh(&Name::new("x_2")).as_str(), "x_3");
        assert_eq!(supply.fresh(&Name::new("y")).as_str(), "y_1");
    }
}
