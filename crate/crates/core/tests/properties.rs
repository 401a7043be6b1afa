use proptest::prelude::*;

use ontogrow::eval::{compute_metrics, wilcoxon_signed_rank, ConfusionMatrix};
use ontogrow::fixtures;
use ontogrow::insertion::{replay, run_with_oracle, Method, OracleUser, Outcome, SessionContext};
use ontogrow::nlu::EntityType;
use ontogrow::ontology::Ontology;

fn targets(onto: &Ontology) -> Vec<String> {
    onto.classes()
        .filter(|c| c.name != onto.root_name())
        .map(|c| c.name.clone())
        .collect()
}

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn entity_type() -> impl Strategy<Value = Option<EntityType>> {
    prop::option::of(prop::sample::select(EntityType::ALL.to_vec()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn depth_first_never_climbs(i in 0usize..51) {
        let onto = fixtures::standard();
        let nlu = fixtures::local_nlu();
        let target = &targets(&onto)[i];
        let run = run_with_oracle("blorp", Method::DepthFirst, &SessionContext::default(), &OracleUser::new(target), &onto, &nlu).unwrap();
        let depths: Vec<usize> = run.transcript.iter().filter_map(|e| e.question.object.as_deref()).map(|c| onto.depth(c)).collect();
        prop_assert!(depths.windows(2).all(|w| w[0] <= w[1] + 1));
        let yes_depths: Vec<usize> = run.transcript.iter()
            .filter(|e| e.answer.kind == ontogrow::insertion::AnswerKind::Yes && !e.question.kind.is_attach())
            .filter_map(|e| e.question.object.as_deref())
            .map(|c| onto.depth(c))
            .collect();
        prop_assert!(yes_depths.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn steps_exclude_the_attach_confirmation(i in 0usize..51, m in method(), ty in entity_type(), sentence in prop::option::of("[a-z ]{0,30}")) {
        let onto = fixtures::standard();
        let nlu = fixtures::local_nlu();
        let target = &targets(&onto)[i];
        let ctx = SessionContext { entity_type: ty, user_sentence: sentence };
        let run = run_with_oracle("blorp", m, &ctx, &OracleUser::new(target), &onto, &nlu).unwrap();
        prop_assert_eq!(run.outcome, Outcome::Inserted);
        prop_assert_eq!(run.steps, run.transcript.len() - 1);
        prop_assert!(run.transcript.last().unwrap().question.kind.is_attach());
        prop_assert_eq!(&run.placements[0].parent, target);
    }

    #[test]
    fn replay_reproduces_the_session(i in 0usize..51, m in method(), ty in entity_type()) {
        let onto = fixtures::standard();
        let nlu = fixtures::local_nlu();
        let target = &targets(&onto)[i];
        let ctx = SessionContext { entity_type: ty, user_sentence: None };
        let named = onto.class(target).unwrap().display_name.to_lowercase();
        let oracle = OracleUser::new(target).with_definitions("blorp", &["zorbel", &named]);
        let run = run_with_oracle("blorp", m, &ctx, &oracle, &onto, &nlu).unwrap();
        let again = replay("blorp", m, &ctx, &run.transcript, &onto, &nlu).unwrap();
        prop_assert_eq!(&again.transcript, &run.transcript);
        prop_assert_eq!(again.outcome, run.outcome);
        prop_assert_eq!(again.placements, run.placements);
        prop_assert_eq!(again.steps, run.steps);
    }

    #[test]
    fn wilcoxon_swap_negates_z(pairs in prop::collection::vec((0i32..9, 0i32..9), 1..30)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let x = wilcoxon_signed_rank(&a, &b).unwrap();
        let y = wilcoxon_signed_rank(&b, &a).unwrap();
        prop_assert_eq!(x.w, y.w);
        prop_assert_eq!(x.w_plus, y.w_minus);
        prop_assert_eq!(x.p, y.p);
        match (x.z, y.z) {
            (Some(p), Some(q)) => prop_assert!((p + q).abs() < 1e-12),
            (p, q) => prop_assert_eq!(p, q),
        }
    }

    #[test]
    fn wilcoxon_ignores_scale(pairs in prop::collection::vec((0i32..9, 0i32..9), 1..30), k in 1u32..50) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let c = k as f64 * 0.37;
        let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
        let sb: Vec<f64> = b.iter().map(|v| v * c).collect();
        let x = wilcoxon_signed_rank(&a, &b).unwrap();
        let y = wilcoxon_signed_rank(&sa, &sb).unwrap();
        prop_assert_eq!(x.w, y.w);
        prop_assert_eq!(x.n_effective, y.n_effective);
        prop_assert_eq!(x.p, y.p);
    }

    #[test]
    fn metrics_stay_in_range(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500, tn in 0u64..500) {
        prop_assume!(tp + fp + fn_ + tn > 0);
        let r = compute_metrics(&ConfusionMatrix::new(tp, fp, fn_, tn)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.accuracy));
        for v in [r.sensitivity, r.specificity, r.precision].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if let Some(m) = r.mcc {
            prop_assert!((-1.0..=1.0).contains(&m));
            if tp * tn == fp * fn_ {
                prop_assert_eq!(m, 0.0);
            }
        }
    }
}

#[test]
fn balanced_matrix_has_zero_mcc() {
    for (tp, fp, fn_, tn) in [(2, 4, 3, 6), (5, 5, 5, 5), (1, 2, 3, 6)] {
        let r = compute_metrics(&ConfusionMatrix::new(tp, fp, fn_, tn)).unwrap();
        assert_eq!(r.mcc, Some(0.0));
    }
}
