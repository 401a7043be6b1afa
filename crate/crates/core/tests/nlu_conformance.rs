use ontogrow::extraction::extract_concepts;
use ontogrow::fixtures;
use ontogrow::insertion::{run_with_oracle, Method, SessionContext};
use ontogrow::nlu::conformance::check_provider;
use ontogrow::nlu::provider::serve_json;
use ontogrow::nlu::{LocalNlu, NluProvider, WireNlu};

fn samples() -> Vec<String> {
    let mut all: Vec<String> = fixtures::filter_sentences().into_iter().map(String::from).collect();
    all.extend(fixtures::worked_replies().into_iter().map(|u| u.text));
    all.extend(fixtures::training_corpus().into_iter().take(60).map(|u| u.text));
    all.push(String::new());
    all.push("and and and".to_string());
    all.push("x".repeat(700));
    all
}

fn wire(local: &LocalNlu) -> WireNlu<impl Fn(&str) -> Result<String, ontogrow::nlu::NluError> + '_> {
    WireNlu::new(move |req: &str| serve_json(local, req))
}

#[test]
fn local_provider_conforms() {
    let nlu = fixtures::local_nlu();
    let samples = samples();
    let refs: Vec<&str> = samples.iter().map(String::as_str).collect();
    let bad = check_provider(&nlu, &refs);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn wire_provider_conforms_and_agrees() {
    let local = fixtures::local_nlu();
    let remote = wire(&local);
    let samples = samples();
    let refs: Vec<&str> = samples.iter().map(String::as_str).collect();
    assert!(check_provider(&remote, &refs).is_empty());
    let onto = fixtures::standard();
    for s in &refs {
        assert_eq!(extract_concepts(s, &remote, &onto), extract_concepts(s, &local, &onto), "{s:?}");
        assert_eq!(remote.lemmatize(s), local.lemmatize(s));
    }
}

#[test]
fn insertion_does_not_depend_on_the_transport() {
    let local = fixtures::local_nlu();
    let remote = wire(&local);
    let onto = fixtures::standard();
    let scripts = fixtures::eval_scripts();
    for spec in fixtures::eval_nouns() {
        let ctx = SessionContext {
            entity_type: Some(spec.entity_type),
            user_sentence: None,
        };
        let oracle = scripts.oracle(&spec.target_parent);
        for method in Method::ALL {
            let a = run_with_oracle(&spec.noun, method, &ctx, &oracle, &onto, &local).unwrap();
            let b = run_with_oracle(&spec.noun, method, &ctx, &oracle, &onto, &remote).unwrap();
            assert_eq!(a.transcript, b.transcript, "{} m{method}", spec.noun);
        }
    }
}

#[test]
fn broken_transport_degrades_to_no_understanding() {
    let broken = WireNlu::new(|_: &str| Err(ontogrow::nlu::NluError::Transport("down".into())));
    let onto = fixtures::standard();
    let r = extract_concepts("I love to drink orange juice in the morning", &broken, &onto);
    assert!(r.candidates.is_empty());
}
