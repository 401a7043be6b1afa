use super::*;
use crate::fixtures;
use crate::nlu::LocalNlu;
use crate::tree::build_tree;

fn setup() -> (Ontology, LocalNlu) {
    (fixtures::standard(), fixtures::local_nlu())
}

fn texts(entries: &[TranscriptEntry]) -> Vec<&str> {
    entries.iter().map(|e| e.question.text.as_str()).collect()
}

fn ctx(entity_type: Option<EntityType>) -> SessionContext {
    SessionContext {
        entity_type,
        user_sentence: None,
    }
}

#[test]
fn first_questions_use_the_fixed_wording() {
    let (onto, nlu) = setup();
    let fig = fixtures::beverages();
    let mut s = start_session("espresso coffee", Method::DepthFirst, &ctx(None), &fig, &nlu).unwrap();
    assert_eq!(
        s.question().unwrap().text,
        "Is it correct to say that espresso coffee is a type of beverage?"
    );
    let next = s.answer(Answer::yes(), &fig, &nlu).unwrap().unwrap();
    assert_eq!(next.text, "Is it correct to say that espresso coffee is a type of coffee?");

    let s = start_session(
        "American coffee",
        Method::EntityType,
        &ctx(Some(EntityType::FoodAndBeverages)),
        &onto,
        &nlu,
    )
    .unwrap();
    assert_eq!(s.question().unwrap().text, "Is American coffee a kind of food or beverage?");

    let s = start_session("orange juice", Method::Definition, &ctx(None), &onto, &nlu).unwrap();
    assert_eq!(
        s.question().unwrap().text,
        "I'm not sure what you are talking about. Please, try to define orange juice with one word"
    );

    let s = start_session("orange juice", Method::Content, &ctx(None), &onto, &nlu).unwrap();
    assert_eq!(s.question().unwrap().text, "Please tell me a sentence about orange juice");
    assert_eq!(s.question().unwrap().object, None);
}

#[test]
fn known_concepts_and_bad_methods_are_rejected() {
    let (onto, nlu) = setup();
    let err = start_session("drink", Method::DepthFirst, &ctx(None), &onto, &nlu).unwrap_err();
    assert_eq!(err.code(), "duplicate-concept");
    assert_eq!(Method::try_from(5).unwrap_err(), InsertionError::UnknownMethod(5));
}

#[test]
fn refusing_every_child_offers_the_parent() {
    let fig = fixtures::beverages();
    let nlu = fixtures::local_nlu();
    let mut s = start_session("lemonade", Method::DepthFirst, &ctx(None), &fig, &nlu).unwrap();
    for a in [Answer::yes(), Answer::no(), Answer::no(), Answer::no()] {
        s.answer(a, &fig, &nlu).unwrap();
    }
    let q = s.question().unwrap();
    assert_eq!(q.kind, QuestionKind::ProposeSiblingAttach);
    assert_eq!(q.text, "Can I add lemonade as a new kind of beverage?");
    s.answer(Answer::yes(), &fig, &nlu).unwrap();
    assert_eq!(s.outcome, Outcome::Inserted);
    assert_eq!(s.steps, 4);

    let mut onto = fig.clone();
    let tree = build_tree(&onto);
    let tree = attach_and_patch(&mut s, &mut onto, &tree).unwrap();
    let kids: Vec<_> = onto.children("Beverage").iter().map(|c| c.name.clone()).collect();
    assert_eq!(kids, ["Coffee", "Milk", "Tea", "lemonade"]);
    assert_eq!(tree, build_tree(&onto));
}

#[test]
fn refusing_a_leaf_declines() {
    let fig = fixtures::beverages();
    let nlu = fixtures::local_nlu();
    let mut s = start_session("ristretto", Method::DepthFirst, &ctx(None), &fig, &nlu).unwrap();
    // Beverage, Coffee, Espresso; Espresso is a leaf
    for a in [Answer::yes(), Answer::yes(), Answer::yes()] {
        s.answer(a, &fig, &nlu).unwrap();
    }
    assert_eq!(s.question().unwrap().kind, QuestionKind::ProposeLeafAttach);
    assert_eq!(s.answer(Answer::no(), &fig, &nlu).unwrap(), None);
    assert_eq!(s.outcome, Outcome::Declined);
    assert!(s.inserted.is_empty());
    assert_eq!(s.steps, 4);
    let mut onto = fig.clone();
    let tree = build_tree(&onto);
    assert_eq!(attach_and_patch(&mut s, &mut onto, &tree).unwrap_err(), InsertionError::NotInserted);
    assert_eq!(s.answer(Answer::yes(), &fig, &nlu).unwrap_err(), InsertionError::SessionFinished);
}

#[test]
fn answer_kinds_must_fit_the_question() {
    let (onto, nlu) = setup();
    let mut s = start_session("orange juice", Method::Definition, &ctx(None), &onto, &nlu).unwrap();
    let err = s.answer(Answer::yes(), &onto, &nlu).unwrap_err();
    assert_eq!(err.code(), "illegal-answer");
    assert!(s.transcript.is_empty());

    let mut s = start_session("orange juice", Method::DepthFirst, &ctx(None), &onto, &nlu).unwrap();
    assert!(s.answer(Answer::free_text("juice"), &onto, &nlu).is_err());
    // a typed stop phrase is a stop, which is always legal
    s.answer(Answer::free_text("I don't know."), &onto, &nlu).unwrap();
    assert_eq!(s.outcome, Outcome::Aborted);
}

#[test]
fn answer_parsing() {
    assert_eq!(Answer::parse(" Yes "), Answer::yes());
    assert_eq!(Answer::parse("nope"), Answer::no());
    assert_eq!(Answer::parse("Stop!"), Answer::stop());
    assert_eq!(Answer::parse("I don’t know"), Answer::stop());
    assert_eq!(Answer::parse("juice").text.as_deref(), Some("juice"));
}

#[test]
fn method_one_on_the_standard_fixture() {
    let (onto, nlu) = setup();
    let run = run_with_oracle(
        "orange juice",
        Method::DepthFirst,
        &ctx(None),
        &OracleUser::new("Beverage"),
        &onto,
        &nlu,
    )
    .unwrap();
    // six top-level questions, Food then Beverage, then its three children
    assert_eq!(run.steps, 11);
    assert_eq!(run.transcript.len(), 12);
    assert_eq!(run.inserted, ["orange juice"]);
    assert!(!run.fallback_used);
}

#[test]
fn definition_chain_inserts_general_first() {
    let (onto, nlu) = setup();
    let oracle = OracleUser::new("Beverage").with_definitions("orange juice", &["juice", "beverage"]);
    let run = run_with_oracle("orange juice", Method::Definition, &ctx(None), &oracle, &onto, &nlu).unwrap();
    assert_eq!(run.inserted, ["juice", "orange juice"]);
    assert_eq!(
        run.placements,
        [
            Placement { concept: "juice".into(), parent: "Beverage".into() },
            Placement { concept: "orange juice".into(), parent: "juice".into() },
        ]
    );
    // two definitions, then Coffee, Milk and Tea refused
    assert_eq!(run.steps, 5);
    assert_eq!(run.steps_per_inserted, 2.5);
    assert_eq!(
        run.transcript[1].question.text,
        "I'm not sure what you are talking about. Please, try to define juice with one word"
    );
    assert_eq!(run.transcript[2].question.subject, "juice");
}

#[test]
fn definition_sentences_are_reduced_to_their_slot() {
    let nlu = fixtures::local_nlu();
    assert_eq!(definition_word("It is a kind of beverage", &nlu), "beverage");
    assert_eq!(definition_word("a drink", &nlu), "drink");
    assert_eq!(definition_word("Juices", &nlu), "juice");
}

#[test]
fn definition_fallbacks() {
    let (onto, nlu) = setup();
    let m1 = run_with_oracle("river", Method::DepthFirst, &ctx(None), &OracleUser::new("NaturalPlace"), &onto, &nlu)
        .unwrap();
    assert_eq!(m1.steps, 7);

    // "thing" is a synonym of the root
    let thing = OracleUser::new("NaturalPlace").with_definitions("river", &["thing"]);
    let m3 = run_with_oracle("river", Method::Definition, &ctx(None), &thing, &onto, &nlu).unwrap();
    assert_eq!(m3.steps, 8);
    assert!(m3.fallback_used);
    assert_eq!(texts(&m3.transcript[1..]), texts(&m1.transcript));

    // a script that runs out answers stop
    let silent = OracleUser::new("NaturalPlace");
    let m3 = run_with_oracle("river", Method::Definition, &ctx(None), &silent, &onto, &nlu).unwrap();
    assert_eq!(m3.steps, 8);

    // repeating a definition trips the loop guard
    let looping = OracleUser::new("NaturalPlace").with_definitions("river", &["stream", "stream"]);
    let m3 = run_with_oracle("river", Method::Definition, &ctx(None), &looping, &onto, &nlu).unwrap();
    assert_eq!(m3.steps, 9);
    assert_eq!(m3.inserted, ["river"]);
}

#[test]
fn entity_type_start() {
    let (onto, nlu) = setup();
    let target = OracleUser::new("Organization");
    let m1 = run_with_oracle("police", Method::DepthFirst, &ctx(None), &target, &onto, &nlu).unwrap();
    let rejected = run_with_oracle("police", Method::EntityType, &ctx(Some(EntityType::Person)), &target, &onto, &nlu)
        .unwrap();
    assert_eq!(m1.steps, 6);
    assert_eq!(rejected.steps, 7);
    assert!(rejected.fallback_used);

    let other = run_with_oracle("police", Method::EntityType, &ctx(Some(EntityType::Other)), &target, &onto, &nlu)
        .unwrap();
    assert_eq!(other.transcript, m1.transcript);

    let accepted = run_with_oracle(
        "police",
        Method::EntityType,
        &ctx(Some(EntityType::Organization)),
        &target,
        &onto,
        &nlu,
    )
    .unwrap();
    // the start, then Company, School and Team
    assert_eq!(accepted.steps, 4);
    assert!(!accepted.fallback_used);
}

#[test]
fn content_start() {
    let (onto, nlu) = setup();
    let sentence = "I love to drink orange juice in the morning";
    assert_eq!(candidate_starts(sentence, &onto, &nlu), ["FoodOrBeverage", "Beverage"]);
    let oracle = OracleUser::new("Beverage").with_sentence("orange juice", sentence);
    let run = run_with_oracle("orange juice", Method::Content, &ctx(None), &oracle, &onto, &nlu).unwrap();
    // sentence, FoodOrBeverage, Food, Beverage, then its three children
    assert_eq!(run.steps, 7);

    let given = SessionContext {
        entity_type: None,
        user_sentence: Some(sentence.into()),
    };
    let run = run_with_oracle("orange juice", Method::Content, &given, &oracle, &onto, &nlu).unwrap();
    assert_eq!(run.steps, 6);

    // keywords only: "dog" and "pet"
    assert_eq!(keyword_starts("my dog is a good pet", &onto), ["Pet", "Dog"]);
}

#[test]
fn content_candidates_intersect_keywords_and_categories() {
    let (onto, nlu) = setup();
    // categories give Animal, keywords give Pet and Dog, both under Animal
    assert_eq!(candidate_starts("my dog is a good pet", &onto, &nlu), ["Pet", "Dog"]);
    // Food & Drink ranks before Family & Relationships, so Pasta comes first
    assert_eq!(candidate_starts("my wife cooks pasta for dinner", &onto, &nlu), ["Pasta", "Wife"]);
    // "tennis" gives Sports but no class keyword sits under Sport
    assert_eq!(candidate_starts("tennis with my sister", &onto, &nlu), Vec::<String>::new());
    assert_eq!(candidate_starts("I like every animal", &onto, &nlu), ["Animal"]);
}

#[test]
fn content_without_candidates_falls_back() {
    let (onto, nlu) = setup();
    let oracle = OracleUser::new("Beverage").with_sentence("orange juice", "it is nice");
    let m4 = run_with_oracle("orange juice", Method::Content, &ctx(None), &oracle, &onto, &nlu).unwrap();
    assert!(m4.fallback_used);
    assert_eq!(m4.steps, 12);
}

#[test]
fn oracle_with_an_unreachable_target_is_inconsistent() {
    let (onto, nlu) = setup();
    let oracle = OracleUser::new("Tea").with_definitions("orange juice", &["fruit"]);
    let err = run_with_oracle("orange juice", Method::Definition, &ctx(None), &oracle, &onto, &nlu).unwrap_err();
    assert_eq!(err.code(), "oracle-inconsistent");
    let err = run_with_oracle("x", Method::DepthFirst, &ctx(None), &OracleUser::new("Nope"), &onto, &nlu).unwrap_err();
    assert_eq!(err, InsertionError::UnknownTarget("Nope".into()));
}

#[test]
fn stale_commit_is_refused() {
    let (onto, nlu) = setup();
    let oracle = OracleUser::new("Tea");
    let mut s = start_session("chai", Method::DepthFirst, &ctx(None), &onto, &nlu).unwrap();
    while let Some(q) = s.question.clone() {
        let a = oracle.reply(&s, &q, &onto);
        s.answer(a, &onto, &nlu).unwrap();
    }
    let mut live = onto.clone();
    live.insert_class("Soda", "Beverage").unwrap();
    let tree = build_tree(&live);
    let err = attach_and_patch(&mut s, &mut live, &tree).unwrap_err();
    assert_eq!(err.code(), "stale-revision");
    assert_eq!(s.outcome, Outcome::Aborted);
    assert!(!live.has_class("chai"));
}

#[test]
fn transcripts_round_trip_and_replay() {
    let (onto, nlu) = setup();
    let oracle = OracleUser::new("Beverage").with_definitions("orange juice", &["juice", "beverage"]);
    let run = run_with_oracle("orange juice", Method::Definition, &ctx(None), &oracle, &onto, &nlu).unwrap();
    let text = write_transcript(&run.transcript);
    assert_eq!(text.lines().count(), run.transcript.len());
    let back = read_transcript(&text).unwrap();
    assert_eq!(back, run.transcript);
    let again = replay("orange juice", Method::Definition, &ctx(None), &back, &onto, &nlu).unwrap();
    assert_eq!(again.transcript, run.transcript);
    assert_eq!(again.inserted, run.inserted);

    let mut bent = back.clone();
    bent[2].question.text.push('!');
    let err = replay("orange juice", Method::Definition, &ctx(None), &bent, &onto, &nlu).unwrap_err();
    assert_eq!(err, InsertionError::ReplayDiverged(3));
}
