mod support;

use std::collections::BTreeSet;

use ontodx::client::{LabelOrNa, Observation};
use ontodx::prompt::ConceptKind;
use ontodx::query::{build_query, QueryBuilder, QueryError, QueryOutcome};
use ontodx::reasoner::{AbnormalityVocabulary, VocabularyRoots};
use ontodx::{classify_expression, extract_vocabulary, is_subsumed, ClassExpression, Iri, Ontology};
use proptest::prelude::*;

fn leaf(onto: &Ontology) -> Iri {
    onto.iri("Leaf").unwrap()
}

fn expression(outcome: QueryOutcome) -> ClassExpression {
    match outcome {
        QueryOutcome::Expression(e) => e,
        QueryOutcome::HealthyFinding => panic!("expected an expression"),
    }
}

#[test]
fn spot_light_yellow_halo() {
    let onto = support::rice();
    let iri = |l: &str| onto.iri(l).unwrap();
    let some = |p: &str, c: &str| ClassExpression::some(iri(p), ClassExpression::Named(iri(c)));
    let want = ClassExpression::some(
        iri("abnormalityGroup"),
        ClassExpression::Intersection(vec![
            some("hasSymptom", "Spot"),
            some("hasSymptomAt", "Leaf"),
            some("hasColor", "LightYellow"),
            some("hasShape", "Halo"),
        ]),
    );
    let got = expression(build_query(&Observation::new("Spot", "Light Yellow", "halo"), &onto, &leaf(&onto)).unwrap());
    assert_eq!(got, want);
}

#[test]
fn all_na_is_healthy() {
    let onto = support::rice();
    let got = build_query(&Observation::new("N/A", "n/a", "N/A"), &onto, &leaf(&onto)).unwrap();
    assert_eq!(got, QueryOutcome::HealthyFinding);
}

#[test]
fn yellowish_brown_is_unknown_with_suggestions() {
    let onto = support::rice();
    let err = build_query(&Observation::new("Spot", "YellowishBrown", "Linear"), &onto, &leaf(&onto)).unwrap_err();
    let QueryError::UnknownLabel(list) = err else {
        panic!("{err:?}")
    };
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].field, ConceptKind::Color);
    assert_eq!(list[0].value, "YellowishBrown");
    assert_eq!(list[0].suggestions[0], "BrownishYellow");
    assert!(list[0].suggestions.len() <= 3);
}

#[test]
fn every_failing_field_is_reported() {
    let onto = support::rice();
    let err = build_query(&Observation::new("Spot and Lesion", "Purple", "Oval"), &onto, &leaf(&onto)).unwrap_err();
    let QueryError::UnknownLabel(list) = err else { panic!() };
    assert_eq!(
        list.iter().map(|u| u.field).collect::<Vec<_>>(),
        [ConceptKind::Symptom, ConceptKind::Color]
    );
}

fn vocab(onto: &Ontology) -> AbnormalityVocabulary {
    extract_vocabulary(onto, &VocabularyRoots::conventional(onto)).unwrap()
}

fn field(labels: Vec<String>) -> impl Strategy<Value = LabelOrNa> {
    prop_oneof![
        1 => Just(LabelOrNa::Na),
        3 => proptest::sample::select(labels).prop_map(LabelOrNa::Label),
    ]
}

fn observations() -> impl Strategy<Value = Observation> {
    let onto = support::rice();
    let v = vocab(&onto);
    let labels = |kind: ConceptKind| kind.entries(&v).iter().map(|e| e.label.clone()).collect::<Vec<_>>();
    (
        field(labels(ConceptKind::Symptom)),
        field(labels(ConceptKind::Color)),
        field(labels(ConceptKind::Shape)),
    )
        .prop_map(|(symptom, color, shape)| Observation {
            symptom,
            color,
            shape,
            raw_text: String::new(),
            model_fingerprint: String::new(),
        })
}

/// One `abnormalityGroup` existential over a union-free conjunction of
/// `property some Named` restrictions in canonical order.
fn check_shape(onto: &Ontology, obs: &Observation, e: &ClassExpression) {
    let ClassExpression::Some { property, filler } = e else {
        panic!("not an existential: {e:?}")
    };
    assert_eq!(property.local(), "abnormalityGroup");
    assert!(!e.contains_union());
    let order = ["hasSymptom", "hasSymptomAt", "hasColor", "hasShape"];
    let mut last = None;
    for c in filler.conjuncts() {
        let ClassExpression::Some { property, filler } = c else {
            panic!("bad conjunct {c:?}")
        };
        let class = filler.as_named().expect("named filler");
        assert!(onto.is_class(class));
        let pos = order.iter().position(|p| *p == property.local()).unwrap();
        assert!(last < Some(pos), "conjuncts out of order");
        last = Some(pos);
    }
    let expected = [
        !obs.symptom.is_na(),
        !obs.symptom.is_na(),
        !obs.color.is_na(),
        !obs.shape.is_na(),
    ];
    assert_eq!(filler.conjuncts().len(), expected.iter().filter(|b| **b).count());
}

fn holding(onto: &Ontology, q: &ClassExpression) -> BTreeSet<Iri> {
    let root = onto.iri("RiceDisease").unwrap();
    let d = classify_expression(onto, q, &root).unwrap();
    d.verdicts.into_iter().filter(|(_, v)| v.holds).map(|(k, _)| k).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn queries_have_the_canonical_shape(obs in observations()) {
        let onto = support::rice();
        let builder = QueryBuilder::new(&onto, &vocab(&onto), leaf(&onto)).unwrap();
        match builder.build(&onto, &obs).unwrap() {
            QueryOutcome::HealthyFinding => prop_assert!(obs.is_all_na()),
            QueryOutcome::Expression(e) => {
                check_shape(&onto, &obs, &e);
                prop_assert_eq!(builder.build(&onto, &obs.clone()).unwrap(), QueryOutcome::Expression(e));
            }
        }
    }

    #[test]
    fn adding_evidence_narrows_the_query(obs in observations(), extra in observations()) {
        let onto = support::rice();
        let builder = QueryBuilder::new(&onto, &vocab(&onto), leaf(&onto)).unwrap();
        for kind in ConceptKind::ALL {
            if !obs.field(kind).is_na() || extra.field(kind).is_na() || obs.is_all_na() {
                continue;
            }
            let mut wider = obs.clone();
            match kind {
                ConceptKind::Symptom => wider.symptom = extra.symptom.clone(),
                ConceptKind::Color => wider.color = extra.color.clone(),
                ConceptKind::Shape => wider.shape = extra.shape.clone(),
            }
            let q = expression(builder.build(&onto, &obs).unwrap());
            let q2 = expression(builder.build(&onto, &wider).unwrap());
            prop_assert!(is_subsumed(&onto, &q2, &q).unwrap().holds);
            prop_assert!(holding(&onto, &q).is_subset(&holding(&onto, &q2)));
        }
    }
}
