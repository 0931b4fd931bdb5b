//! Intersection trees: `(∧n)` nodes interleaved with δ-sequences of `(w)`
//! and `(m)`, down to leaves ending in a constructive rule.

use super::{mux, weaken, Derivation, DerivationError, Rule};
use crate::names::Name;
use crate::types::LinearType;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DeltaStep {
    Weaken { var: Name, ty: LinearType },
    Mux { merged: Vec<Name>, fresh: Name },
}

/// A run of `(w)`/`(m)` applications, stored innermost first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DeltaSequence {
    steps: Vec<DeltaStep>,
}

impl DeltaSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[DeltaStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends a step applied after (below) the existing ones.
    pub fn push(&mut self, step: DeltaStep) {
        self.steps.push(step);
    }

    /// Splits `d` into its trailing δ-sequence and the first non-δ node.
    pub fn peel(mut d: Derivation) -> (DeltaSequence, Derivation) {
        let mut outer_first = Vec::new();
        loop {
            let step = match &d.rule {
                Rule::Weaken { var, ty } => DeltaStep::Weaken {
                    var: var.clone(),
                    ty: ty.clone(),
                },
                Rule::Mux { merged, fresh } => DeltaStep::Mux {
                    merged: merged.clone(),
                    fresh: fresh.clone(),
                },
                _ => break,
            };
            outer_first.push(step);
            d = d.premises.pop().expect("δ rules have one premise");
        }
        outer_first.reverse();
        (DeltaSequence { steps: outer_first }, d)
    }

    /// Reapplies the steps on top of `core`, recomputing conclusions.
    pub fn replay(&self, core: Derivation) -> Result<Derivation, DerivationError> {
        self.steps.iter().try_fold(core, |d, step| match step {
            DeltaStep::Weaken { var, ty } => weaken(d, var.clone(), ty.clone()),
            DeltaStep::Mux { merged, fresh } => mux(d, merged.clone(), fresh.clone()),
        })
    }
}

#[derive(Debug, Clone)]
pub enum TreeNode<'a> {
    /// A subderivation ending in a constructive rule.
    Leaf(&'a Derivation),
    And {
        node: &'a Derivation,
        branches: Vec<IntersectionTree<'a>>,
    },
}

#[derive(Debug, Clone)]
pub struct IntersectionTree<'a> {
    /// δ nodes above `node`, outermost first.
    pub delta: Vec<&'a Derivation>,
    pub node: TreeNode<'a>,
}

impl<'a> IntersectionTree<'a> {
    /// True for a δ-sequence directly over a constructive leaf.
    pub fn is_empty(&self) -> bool {
        matches!(self.node, TreeNode::Leaf(_))
    }

    pub fn leaves(&self) -> Vec<&'a Derivation> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<&'a Derivation>) {
        match &self.node {
            TreeNode::Leaf(d) => out.push(d),
            TreeNode::And { branches, .. } => branches.iter().for_each(|b| b.collect(out)),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match &self.node {
            TreeNode::Leaf(_) => 1,
            TreeNode::And { branches, .. } => branches.iter().map(|b| b.leaf_count()).sum(),
        }
    }
}

/// Peels δ-sequences and `(∧n)` nodes from the root until constructive
/// leaves are reached.
pub fn decompose_intersection_tree(d: &Derivation) -> IntersectionTree<'_> {
    let mut delta = Vec::new();
    let mut cur = d;
    while cur.rule.is_delta() {
        delta.push(cur);
        cur = &cur.premises[0];
    }
    let node = match cur.rule {
        Rule::And => TreeNode::And {
            node: cur,
            branches: cur
                .premises
                .iter()
                .map(decompose_intersection_tree)
                .collect(),
        },
        _ => TreeNode::Leaf(cur),
    };
    IntersectionTree { delta, node }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::fixtures::*;
    use crate::derivation::{arrow_intro, axiom, check_derivation};

    #[test]
    fn example_sigma_has_two_leaves() {
        let d = first();
        let sigma = &d.premises[1];
        let tree = decompose_intersection_tree(sigma);
        assert!(!tree.is_empty());
        assert_eq!(tree.leaf_count(), 2);
        for leaf in tree.leaves() {
            assert_eq!(leaf.rule, Rule::ArrowElim);
            assert!(sigma.subject().is_instance_of(leaf.subject()));
        }
    }

    #[test]
    fn identity_is_an_empty_tree() {
        let d = arrow_intro(axiom("x", a()), "x").unwrap();
        let tree = decompose_intersection_tree(&d);
        assert!(tree.is_empty());
        assert_eq!(tree.leaves(), vec![&d]);
    }

    #[test]
    fn peel_and_replay_round_trip() {
        let d = third();
        let (delta, core) = DeltaSequence::peel(d.clone());
        assert_eq!(delta.len(), 1);
        assert_eq!(core.rule, Rule::ArrowElim);
        let back = delta.replay(core).unwrap();
        assert_eq!(back, d);
        assert!(check_derivation(&back).is_ok());
    }
}
