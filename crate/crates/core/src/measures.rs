//! Proof measures: size, rank, degree and the parametric weight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::derivation::{Derivation, Rule};

/// `|Π|`: number of rule applications.
pub fn proof_size(d: &Derivation) -> u64 {
    1 + d.premises.iter().map(proof_size).sum::<u64>()
}

/// `R(Π)`: the largest number of merged variables free in the premise
/// subject of any `(m)`, and at least 1.
pub fn rank(d: &Derivation) -> u64 {
    let here = match &d.rule {
        Rule::Mux { merged, .. } => {
            let subject = d.premises[0].subject();
            merged.iter().filter(|x| subject.is_free(x)).count() as u64
        }
        _ => 1,
    };
    d.premises.iter().map(rank).fold(here.max(1), u64::max)
}

/// `D(Π)`: the most `(∧n)` nodes on one root-to-leaf path.
pub fn degree(d: &Derivation) -> u64 {
    let below = d.premises.iter().map(degree).max().unwrap_or(0);
    match d.rule {
        Rule::And => below + 1,
        _ => below,
    }
}

/// `W(Π, r)`.
pub fn weight(d: &Derivation, r: u64) -> u64 {
    let ws = d.premises.iter().map(|p| weight(p, r));
    match d.rule {
        Rule::Ax => 1,
        Rule::ArrowIntro { .. } | Rule::ArrowElim => ws.sum::<u64>() + 1,
        Rule::And => r
            .checked_mul(ws.max().unwrap_or(0))
            .expect("weight overflows u64"),
        Rule::Weaken { .. } | Rule::Mux { .. } => ws.sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub proof_size: u64,
    pub subject_size: u64,
    pub rank: u64,
    pub degree: u64,
    /// `r ↦ W(Π, r)` for the requested `r`.
    pub weights: BTreeMap<u64, u64>,
}

impl MeasureReport {
    pub fn new(d: &Derivation, rs: impl IntoIterator<Item = u64>) -> Self {
        MeasureReport {
            proof_size: proof_size(d),
            subject_size: d.subject().size() as u64,
            rank: rank(d),
            degree: degree(d),
            weights: rs.into_iter().map(|r| (r, weight(d, r))).collect(),
        }
    }

    /// Weights at `1..=max(rank, 2)`, enough to show both `|M|` and the
    /// weight the reduction bound is stated at.
    pub fn standard(d: &Derivation) -> Self {
        let top = rank(d).max(2);
        Self::new(d, 1..=top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::fixtures::*;
    use crate::derivation::{and, arrow_elim, arrow_intro, axiom, mux, weaken};

    fn identity() -> Derivation {
        arrow_intro(axiom("x", a()), "x").unwrap()
    }

    #[test]
    fn axiom_and_identity() {
        let ax = axiom("x", a());
        assert_eq!(proof_size(&ax), 1);
        assert_eq!(proof_size(&identity()), 2);
        assert_eq!(rank(&identity()), 1);
        assert_eq!(degree(&identity()), 0);
        for r in 1..5 {
            assert_eq!(weight(&identity(), r), 2);
        }
    }

    #[test]
    fn example_measures() {
        // node count by hand: left spine 5, Σ1 4, Σ2 4, ∧2 1, root 1
        let d = first();
        assert_eq!(proof_size(&d), 15);
        assert_eq!(rank(&d), 2);
        assert_eq!(degree(&d), 1);
        assert_eq!(weight(&d, 2), 13);
        assert_eq!(weight(&d, 1), 9);
        assert_eq!([weight(&second(), 2), weight(&third(), 2)], [7, 3]);
        assert_eq!([weight(&second(), 1), weight(&third(), 1)], [6, 3]);
    }

    #[test]
    fn rank_counts_only_free_merged_variables() {
        let pair = arrow_elim(axiom("p1", big_a()), axiom("p2", a())).unwrap();
        let merged = vec!["p1".into(), "p2".into(), "p3".into()];
        let m = mux(weaken(pair, "p3", a()).unwrap(), merged, "p").unwrap();
        assert_eq!(rank(&m), 2);
        let lone = mux(
            weaken(axiom("q1", a()), "q2", a()).unwrap(),
            vec!["q1".into(), "q2".into()],
            "q",
        );
        assert_eq!(rank(&lone.unwrap()), 1);
    }

    #[test]
    fn nested_and_degree() {
        let inner = |v: &str| and(vec![axiom(v, a()), axiom(v, a())]).unwrap();
        let outer = and(vec![inner("x"), inner("x")]).unwrap();
        assert_eq!(degree(&outer), 2);
        assert_eq!(weight(&outer, 3), 9);
    }

    #[test]
    fn report_json_shape() {
        let r = MeasureReport::new(&first(), [1, 2]);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"proof_size": 15, "subject_size": 9, "rank": 2, "degree": 1,
                               "weights": {"1": 9, "2": 13}})
        );
    }
}
