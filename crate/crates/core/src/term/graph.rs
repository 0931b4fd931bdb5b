//! Exhaustive exploration of the β-reduction graph, memoized on α-classes.

use std::collections::{HashMap, HashSet};

use super::{redexes, reduce_at, AlphaKey, Term, TermError};

/// Hard cap on distinct α-classes visited, independent of path fuel.
const MAX_STATES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionGraph {
    /// Length of the longest reduction sequence from the root.
    pub longest: usize,
    /// Distinct α-classes reachable from the root (root included).
    pub states: usize,
    pub edges: usize,
    /// Largest term reachable from the root.
    pub max_term_size: usize,
    /// Largest term reachable in one or more steps; 0 when the root is normal.
    pub max_reduct_size: usize,
    pub normal_forms: Vec<Term>,
}

impl ReductionGraph {
    pub fn max_normal_form_size(&self) -> usize {
        self.normal_forms.iter().map(Term::size).max().unwrap_or(0)
    }
}

struct Frame {
    key: AlphaKey,
    succ: Vec<Term>,
    next: usize,
    best: usize,
}

/// Longest-path DP over the memoized reduction DAG.
///
/// Fails with [`TermError::FuelExhausted`] when a path longer than `fuel` is
/// found, when a cycle is found (the term is not strongly normalizing), or when
/// the graph is unreasonably large.
pub fn reduction_graph(m: &Term, fuel: usize) -> Result<ReductionGraph, TermError> {
    let mut memo: HashMap<AlphaKey, usize> = HashMap::new();
    let mut on_stack: HashSet<AlphaKey> = HashSet::new();
    let mut normal_forms = Vec::new();
    let mut max_term_size = 0;
    let mut max_reduct_size = 0;
    let mut edges = 0;

    let mut open = |t: Term, key: AlphaKey, normal_forms: &mut Vec<Term>| -> Frame {
        max_term_size = max_term_size.max(t.size());
        let succ: Vec<Term> = redexes(&t)
            .iter()
            .map(|p| reduce_at(&t, p).expect("enumerated redex"))
            .collect();
        edges += succ.len();
        max_reduct_size = succ
            .iter()
            .map(Term::size)
            .fold(max_reduct_size, usize::max);
        if succ.is_empty() {
            normal_forms.push(t);
        }
        Frame {
            key,
            succ,
            next: 0,
            best: 0,
        }
    };

    let root_key = m.alpha_key();
    on_stack.insert(root_key.clone());
    let mut stack = vec![open(m.clone(), root_key, &mut normal_forms)];
    let mut longest = 0;

    while let Some(top) = stack.last_mut() {
        if top.next < top.succ.len() {
            let child = top.succ[top.next].clone();
            top.next += 1;
            let key = child.alpha_key();
            if let Some(&v) = memo.get(&key) {
                top.best = top.best.max(v + 1);
                continue;
            }
            if on_stack.contains(&key) || stack.len() > fuel {
                return Err(TermError::FuelExhausted { steps: stack.len() });
            }
            if memo.len() + stack.len() > MAX_STATES {
                return Err(TermError::FuelExhausted { steps: stack.len() });
            }
            on_stack.insert(key.clone());
            stack.push(open(child, key, &mut normal_forms));
        } else {
            let done = stack.pop().unwrap();
            on_stack.remove(&done.key);
            memo.insert(done.key, done.best);
            match stack.last_mut() {
                Some(parent) => parent.best = parent.best.max(done.best + 1),
                None => longest = done.best,
            }
        }
    }

    Ok(ReductionGraph {
        longest,
        states: memo.len(),
        edges,
        max_term_size,
        max_reduct_size,
        normal_forms,
    })
}

/// Length of the longest β-reduction sequence starting at `m`.
pub fn max_reduction_length(m: &Term, fuel: usize) -> Result<usize, TermError> {
    reduction_graph(m, fuel).map(|g| g.longest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    /// Plain recursive enumeration of every reduction sequence.
    fn brute_longest(m: &Term, depth: usize) -> usize {
        assert!(depth < 64, "runaway");
        redexes(m)
            .iter()
            .map(|p| 1 + brute_longest(&reduce_at(m, p).unwrap(), depth + 1))
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn longest_paths() {
        assert_eq!(max_reduction_length(&t("\\x. x"), 100).unwrap(), 0);
        assert_eq!(max_reduction_length(&t("(\\y. y) z"), 100).unwrap(), 1);
        assert_eq!(
            max_reduction_length(&t("(\\x. x x) ((\\y. y) z)"), 100).unwrap(),
            3
        );
    }

    #[test]
    fn agrees_with_brute_force() {
        for s in [
            "(\\x. x x) ((\\y. y) z)",
            "(\\x y. y x x) ((\\x. x) (\\x. x))",
            "(\\f x. f (f x)) ((\\g. g) (\\y. y))",
            "(\\a b. b) ((\\x. x) z) ((\\y. y y) w)",
        ] {
            let m = t(s);
            assert_eq!(
                max_reduction_length(&m, 1000).unwrap(),
                brute_longest(&m, 0),
                "{s}"
            );
        }
    }

    #[test]
    fn divergence_is_reported() {
        let omega = t("(\\x. x x) (\\x. x x)");
        assert!(matches!(
            max_reduction_length(&omega, 100),
            Err(TermError::FuelExhausted { .. })
        ));
        let growing = t("(\\x. x x x) (\\x. x x x)");
        assert!(matches!(
            max_reduction_length(&growing, 50),
            Err(TermError::FuelExhausted { .. })
        ));
    }

    #[test]
    fn normal_forms_are_collected() {
        let g = reduction_graph(&t("(\\x. x x) ((\\y. y) z)"), 100).unwrap();
        assert_eq!(g.normal_forms.len(), 1);
        assert_eq!(g.max_normal_form_size(), 3);
        assert_eq!(g.max_term_size, 9);
        assert_eq!(g.max_reduct_size, 9);
        assert_eq!(
            reduction_graph(&t("\\x. x"), 10).unwrap().max_reduct_size,
            0
        );
    }
}
