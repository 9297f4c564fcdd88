//! Compiles an [`Observation`] into a class expression.
//!
//! The query has the shape
//! `abnormalityGroup some (hasSymptom some S and hasSymptomAt some P and hasColor some C and hasShape some H)`
//! with NA fields left out. The plant part is only added alongside a symptom.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::client::Observation;
use crate::expr::ClassExpression;
use crate::iri::Iri;
use crate::owl::{LabelError, Ontology};
use crate::prompt::ConceptKind;
use crate::reasoner::{extract_vocabulary, AbnormalityVocabulary, ReasonerError, VocabularyRoots};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "expression", rename_all = "kebab-case")]
pub enum QueryOutcome {
    Expression(ClassExpression),
    /// Every field was NA: nothing abnormal to classify.
    HealthyFinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnknownLabel {
    pub field: ConceptKind,
    pub value: String,
    pub suggestions: Vec<String>,
}

impl std::fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} `{}`", self.field, self.value)?;
        if !self.suggestions.is_empty() {
            write!(f, " (closest: {})", self.suggestions.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown label: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    UnknownLabel(Vec<UnknownLabel>),
    #[error("undeclared entity {0}")]
    UndeclaredEntity(Iri),
    #[error(transparent)]
    Vocabulary(ReasonerError),
}

impl From<ReasonerError> for QueryError {
    fn from(e: ReasonerError) -> Self {
        match e {
            ReasonerError::UndeclaredEntity(iri) => QueryError::UndeclaredEntity(iri),
            other => QueryError::Vocabulary(other),
        }
    }
}

/// Properties and label scopes used to compile observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBuilder {
    pub abnormality_group: Iri,
    pub has_symptom: Iri,
    pub has_symptom_at: Iri,
    pub has_color: Iri,
    pub has_shape: Iri,
    pub plant_part: Iri,
    symptoms: BTreeSet<Iri>,
    colors: BTreeSet<Iri>,
    shapes: BTreeSet<Iri>,
}

impl QueryBuilder {
    /// Conventional property names in the ontology's default namespace; each
    /// field resolves only within its vocabulary list.
    pub fn new(onto: &Ontology, vocab: &AbnormalityVocabulary, plant_part: Iri) -> Result<Self, QueryError> {
        if !onto.is_class(&plant_part) {
            return Err(QueryError::UndeclaredEntity(plant_part));
        }
        let property = |local: &str| -> Result<Iri, QueryError> {
            let iri = onto.iri(local).expect("constant local names are valid");
            if onto.is_property(&iri) {
                Ok(iri)
            } else {
                Err(QueryError::UndeclaredEntity(iri))
            }
        };
        Ok(Self {
            abnormality_group: property("abnormalityGroup")?,
            has_symptom: property("hasSymptom")?,
            has_symptom_at: property("hasSymptomAt")?,
            has_color: property("hasColor")?,
            has_shape: property("hasShape")?,
            plant_part,
            symptoms: AbnormalityVocabulary::classes(&vocab.symptoms),
            colors: AbnormalityVocabulary::classes(&vocab.colors),
            shapes: AbnormalityVocabulary::classes(&vocab.shapes),
        })
    }

    fn scope(&self, kind: ConceptKind) -> (&Iri, &BTreeSet<Iri>) {
        match kind {
            ConceptKind::Symptom => (&self.has_symptom, &self.symptoms),
            ConceptKind::Color => (&self.has_color, &self.colors),
            ConceptKind::Shape => (&self.has_shape, &self.shapes),
        }
    }

    pub fn build(&self, onto: &Ontology, obs: &Observation) -> Result<QueryOutcome, QueryError> {
        if obs.is_all_na() {
            return Ok(QueryOutcome::HealthyFinding);
        }
        let mut conjuncts = Vec::new();
        let mut unknown = Vec::new();
        for kind in ConceptKind::ALL {
            let Some(value) = obs.field(kind).label() else {
                continue;
            };
            let (property, scope) = self.scope(kind);
            match onto.resolve_label_within(value, scope) {
                Ok(class) => conjuncts.push(ClassExpression::some(property.clone(), ClassExpression::Named(class))),
                Err(LabelError::UnknownLabel { suggestions, .. }) => unknown.push(UnknownLabel {
                    field: kind,
                    value: value.to_owned(),
                    suggestions,
                }),
            }
            if kind == ConceptKind::Symptom {
                conjuncts.push(ClassExpression::some(
                    self.has_symptom_at.clone(),
                    ClassExpression::Named(self.plant_part.clone()),
                ));
            }
        }
        if !unknown.is_empty() {
            return Err(QueryError::UnknownLabel(unknown));
        }
        Ok(QueryOutcome::Expression(ClassExpression::some(
            self.abnormality_group.clone(),
            ClassExpression::and(conjuncts),
        )))
    }
}

/// Builds a query with the conventional vocabulary roots and property names.
pub fn build_query(obs: &Observation, onto: &Ontology, plant_part: &Iri) -> Result<QueryOutcome, QueryError> {
    let vocab = extract_vocabulary(onto, &VocabularyRoots::conventional(onto))?;
    QueryBuilder::new(onto, &vocab, plant_part.clone())?.build(onto, obs)
}
