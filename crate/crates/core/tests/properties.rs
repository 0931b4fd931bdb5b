use proptest::prelude::*;

use sti_core::derivation::{alpha_equal, from_json, parse_pretty, pretty_print, to_json};
use sti_core::harness::{check_lemma3m, gen_sn_terms};
use sti_core::inference::{infer, SearchBounds};
use sti_core::measures::weight;
use sti_core::term::DEFAULT_FUEL;
use sti_core::transform::normalize_with_derivation;
use sti_core::{check_derivation, parse_term, parse_type, LinearType, Strategy as Reduction, Type};

fn linear() -> impl Strategy<Value = LinearType> {
    let leaf = prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(LinearType::var);
    leaf.prop_recursive(4, 24, 3, |inner| {
        let ty = prop_oneof![
            inner.clone().prop_map(Type::Linear),
            prop::collection::vec(inner.clone().prop_map(Type::Linear), 2..4)
                .prop_map(|ts| Type::inter(ts).unwrap()),
        ];
        (ty, inner).prop_map(|(d, c)| LinearType::arrow(d, c))
    })
}

fn ty() -> impl Strategy<Value = Type> {
    prop_oneof![
        linear().prop_map(Type::Linear),
        prop::collection::vec(linear().prop_map(Type::Linear), 2..4)
            .prop_map(|ts| Type::inter(ts).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn type_print_parse_roundtrip(t in ty()) {
        let back = parse_type(&t.to_string()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn canonicalize_is_idempotent_and_sound(t in ty()) {
        let c = t.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!(c.type_equal(&t));
    }

    #[test]
    fn intersection_is_commutative(s in ty(), t in ty()) {
        let st = Type::inter(vec![s.clone(), t.clone()]).unwrap();
        let ts = Type::inter(vec![t, s]).unwrap();
        prop_assert!(st.type_equal(&ts));
    }

    #[test]
    fn intersection_is_not_idempotent(t in ty()) {
        let tt = Type::inter(vec![t.clone(), t.clone()]).unwrap();
        prop_assert!(!tt.type_equal(&t));
    }

    #[test]
    fn generated_terms_roundtrip_through_text(seed in any::<u64>()) {
        for m in gen_sn_terms(seed, 5, 12) {
            prop_assert!(parse_term(&m.to_string()).unwrap().alpha_eq(&m));
        }
    }

    #[test]
    fn inferred_derivations_check_and_roundtrip(seed in any::<u64>()) {
        for m in gen_sn_terms(seed, 5, 12) {
            let d = infer(&m, &SearchBounds::default()).unwrap().derivation;
            prop_assert!(check_derivation(&d).is_ok());
            prop_assert!(d.subject().alpha_eq(&m));
            prop_assert!(check_lemma3m(&d, 1..=4).passed());
            prop_assert!(alpha_equal(&from_json(to_json(&d)).unwrap(), &d));
            prop_assert!(alpha_equal(&parse_pretty(&pretty_print(&d)).unwrap(), &d));
        }
    }

    #[test]
    fn weights_decrease_along_normalization(seed in any::<u64>()) {
        for m in gen_sn_terms(seed, 3, 12) {
            let d = infer(&m, &SearchBounds::default()).unwrap().derivation;
            for strategy in [Reduction::LeftmostOutermost, Reduction::RightmostInnermost] {
                let trace = normalize_with_derivation(&d, strategy, DEFAULT_FUEL).unwrap();
                let ws = trace.weights_at(trace.rank.max(1));
                prop_assert!(ws.windows(2).all(|w| w[0] > w[1]), "{m}: {ws:?}");
                prop_assert!(trace.final_derivation().subject().is_normal());
                prop_assert!(trace.steps() as u64 <= weight(&d, trace.rank.max(1)));
            }
        }
    }
}
