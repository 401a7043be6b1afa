//! The six-noun insertion experiment on the bundled fixtures.

use ontogrow::eval::{run_insertion_eval, step_table_csv, wilcoxon_table_csv, Cohort};
use ontogrow::fixtures;
use ontogrow::insertion::Method;
use ontogrow::ontology::Ontology;

/// Method 1 cost: refuse every earlier sibling on the way down, then every
/// child of the target.
fn depth_first_steps(onto: &Ontology, target: &str) -> f64 {
    let mut steps = onto.children(target).len();
    let mut at = target.to_string();
    while let Some(parent) = onto.class(&at).unwrap().parent.clone() {
        steps += onto.children(&parent).iter().position(|c| c.name == at).unwrap() + 1;
        at = parent;
    }
    steps as f64
}

// noun, m1, m2, m3 per inserted, m3 inserted, m4, fallbacks m1..m4
type Row = (&'static str, f64, f64, f64, usize, f64, [bool; 4]);

const TABLE: [Row; 6] = [
    ("police", 6.0, 7.0, 4.0, 1, 8.0, [false, true, false, true]),
    ("orange juice", 11.0, 6.0, 2.5, 2, 7.0, [false, false, false, false]),
    ("river", 7.0, 6.0, 8.0, 1, 10.0, [false, false, true, true]),
    ("hamster", 10.0, 10.0, 3.0, 1, 4.0, [false, true, false, false]),
    ("chess", 7.0, 7.0, 1.0, 1, 9.0, [false, true, false, true]),
    ("nephew", 6.0, 6.0, 3.0, 2, 6.0, [false, false, false, false]),
];

#[test]
fn step_table() {
    let onto = fixtures::standard();
    let nlu = fixtures::local_nlu();
    let report = run_insertion_eval(&fixtures::eval_nouns(), &onto, &fixtures::eval_scripts(), &nlu).unwrap();
    assert_eq!(report.records.len(), TABLE.len());
    for (r, (noun, m1, m2, m3, m3n, m4, fell)) in report.records.iter().zip(TABLE) {
        assert_eq!(r.noun, noun);
        assert_eq!(r.steps_by_method[&Method::DepthFirst], depth_first_steps(&onto, &r.target_parent));
        let got = Method::ALL.map(|m| r.steps_by_method[&m]);
        assert_eq!(got, [m1, m2, m3, m4], "{noun}");
        assert_eq!(r.m3_inserted, m3n, "{noun}");
        assert_eq!(Method::ALL.map(|m| r.fallback_used[&m]), fell, "{noun}");
    }
    let mean = |i: usize| TABLE.iter().map(|t| [t.1, t.2, t.3, t.5][i]).sum::<f64>() / 6.0;
    for (i, m) in Method::ALL.into_iter().enumerate() {
        assert!((report.averages[&m] - mean(i)).abs() < 1e-12);
    }
}

#[test]
fn cohorts_and_tests() {
    let onto = fixtures::standard();
    let nlu = fixtures::local_nlu();
    let report = run_insertion_eval(&fixtures::eval_nouns(), &onto, &fixtures::eval_scripts(), &nlu).unwrap();
    let other: Vec<&str> = report
        .records
        .iter()
        .filter(|r| r.cohort == Cohort::Other)
        .map(|r| r.noun.as_str())
        .collect();
    assert_eq!(other, ["hamster", "chess"]);
    assert_eq!(report.tests.len(), 12);
    // an unmapped type makes method 2 exactly method 1
    let t = report
        .tests
        .iter()
        .find(|t| t.cohort == Cohort::Other && t.a == Method::DepthFirst && t.b == Method::EntityType)
        .unwrap();
    assert_eq!(t.result.n_effective, 0);
    assert!(!t.result.reliable);
    assert!(report.tests.iter().all(|t| !t.result.reliable));

    let steps = step_table_csv(&report.records);
    assert_eq!(steps.lines().nth(3).unwrap(), "river,NaturalPlace,LOCATION,7,6,8,1,10,false,false,true,true");
    let w = wilcoxon_table_csv(&report.tests);
    assert!(w.lines().skip(1).all(|l| l.ends_with(",false")));
}
