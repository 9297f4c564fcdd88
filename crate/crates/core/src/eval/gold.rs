use std::collections::BTreeSet;

use serde::Serialize;

use super::EvalError;
use crate::expr::ClassExpression;
use crate::iri::Iri;
use crate::owl::Ontology;
use crate::prompt::ConceptKind;

/// Concepts a disease's definition accepts for each field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GoldConcepts {
    pub symptoms: BTreeSet<Iri>,
    pub colors: BTreeSet<Iri>,
    pub shapes: BTreeSet<Iri>,
}

impl GoldConcepts {
    pub fn get(&self, kind: ConceptKind) -> &BTreeSet<Iri> {
        match kind {
            ConceptKind::Symptom => &self.symptoms,
            ConceptKind::Color => &self.colors,
            ConceptKind::Shape => &self.shapes,
        }
    }

    fn get_mut(&mut self, kind: ConceptKind) -> &mut BTreeSet<Iri> {
        match kind {
            ConceptKind::Symptom => &mut self.symptoms,
            ConceptKind::Color => &mut self.colors,
            ConceptKind::Shape => &mut self.shapes,
        }
    }
}

fn kind_of(property: &Iri) -> Option<ConceptKind> {
    match property.local() {
        "hasSymptom" => Some(ConceptKind::Symptom),
        "hasColor" => Some(ConceptKind::Color),
        "hasShape" => Some(ConceptKind::Shape),
        _ => None,
    }
}

fn named_disjuncts(filler: &ClassExpression) -> Option<Vec<Iri>> {
    match filler {
        ClassExpression::Named(c) => Some(vec![c.clone()]),
        ClassExpression::Union(ops) => ops.iter().map(|op| op.as_named().cloned()).collect(),
        _ => None,
    }
}

fn collect(onto: &Ontology, body: &ClassExpression, gold: &mut GoldConcepts, disease: &Iri) -> Result<(), EvalError> {
    for conjunct in body.conjuncts() {
        match conjunct {
            ClassExpression::Some { property, filler } => {
                if let Some(kind) = kind_of(property) {
                    let names = named_disjuncts(filler).ok_or_else(|| EvalError::MalformedDefinition(disease.clone()))?;
                    gold.get_mut(kind).extend(names);
                }
            }
            ClassExpression::Named(n) => {
                if let Some(def) = onto.definition(n) {
                    collect(onto, def, gold, disease)?;
                }
            }
            _ => return Err(EvalError::MalformedDefinition(disease.clone())),
        }
    }
    Ok(())
}

/// Reads symptom, color and shape fillers off `abnormalityGroup some (...)`
/// in the disease's definition, unfolding defined names in the body.
pub fn derive_gold_concepts(onto: &Ontology, disease: &Iri) -> Result<GoldConcepts, EvalError> {
    let def = onto
        .definition(disease)
        .ok_or_else(|| EvalError::MalformedDefinition(disease.clone()))?;
    let mut gold = GoldConcepts::default();
    let mut groups = 0;
    for conjunct in def.conjuncts() {
        if let ClassExpression::Some { property, filler } = conjunct {
            if property.local() == "abnormalityGroup" {
                groups += 1;
                collect(onto, filler, &mut gold, disease)?;
            }
        }
    }
    if groups == 0 {
        return Err(EvalError::MalformedDefinition(disease.clone()));
    }
    Ok(gold)
}
