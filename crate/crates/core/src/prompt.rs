//! Prompt rendering with ontology-derived abnormality vocabularies.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::owl::display_label;
use crate::reasoner::{AbnormalityVocabulary, VocabularyEntry};

/// Bumped whenever the rendered template changes; part of every fingerprint.
pub const TEMPLATE_VERSION: &str = "v1";

pub const SYMPTOM_KEY: &str = "SymptomAbnormality";
pub const COLOR_KEY: &str = "ColorAbnormality";
pub const SHAPE_KEY: &str = "ShapeOfSymptomAbnormality";

fn render(entity: &str, color: &str, symptom: &str, shape: &str) -> String {
    format!(
        "\
As an expert of {entity} diseases, your task is to examine the given image of the {entity} in a detailed manner to look for color abnormalities, symptom abnormalities, and shape of symptom abnormalities.
Alongside the image of {entity}, you will be provided with the possible set of color abnormalities and symptom abnormalities and the shape of these symptoms delimited by triple quotes.
Return the information in the following JSON format (note xxx is a placeholder, if the information is not available in the image, put \"N/A\" instead):
{{\"SymptomAbnormality\": xxx, \"ColorAbnormality\": xxx, \"ShapeOfSymptomAbnormality\": xxx}}
Don't provide anything other than the results in the JSON format.
'''
\"ColorAbnormality\": {color},
\"SymptomAbnormality\": {symptom},
\"ShapeOfSymptomAbnormality\": {shape}
'''
"
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Symptom,
    Color,
    Shape,
}

impl ConceptKind {
    pub const ALL: [ConceptKind; 3] = [ConceptKind::Symptom, ConceptKind::Color, ConceptKind::Shape];

    /// The JSON key models are asked to fill.
    pub fn key(self) -> &'static str {
        match self {
            ConceptKind::Symptom => SYMPTOM_KEY,
            ConceptKind::Color => COLOR_KEY,
            ConceptKind::Shape => SHAPE_KEY,
        }
    }

    pub fn entries(self, vocab: &AbnormalityVocabulary) -> &[VocabularyEntry] {
        match self {
            ConceptKind::Symptom => &vocab.symptoms,
            ConceptKind::Color => &vocab.colors,
            ConceptKind::Shape => &vocab.shapes,
        }
    }
}

impl std::fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConceptKind::Symptom => "symptom",
            ConceptKind::Color => "color",
            ConceptKind::Shape => "shape",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("entity name is empty")]
    EmptyEntity,
    #[error("no {0} labels in the vocabulary")]
    EmptyVocabulary(ConceptKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub entity: String,
    pub vocabulary: AbnormalityVocabulary,
    pub text: String,
    pub fingerprint: String,
}

/// Comma-separated display labels in vocabulary order.
pub fn label_list(entries: &[VocabularyEntry]) -> String {
    entries.iter().map(|e| display_label(&e.label)).collect::<Vec<_>>().join(", ")
}

/// First 16 hex digits of SHA-256 over the template version, entity, and
/// the full vocabulary (plant parts included).
pub fn fingerprint(entity: &str, vocab: &AbnormalityVocabulary) -> String {
    let payload = serde_json::json!({
        "template": TEMPLATE_VERSION,
        "entity": entity,
        "vocabulary": vocab,
    });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    hex::encode(&digest[..8])
}

pub fn build_prompt(entity: &str, vocab: &AbnormalityVocabulary) -> Result<PromptSpec, PromptError> {
    if entity.trim().is_empty() {
        return Err(PromptError::EmptyEntity);
    }
    for kind in ConceptKind::ALL {
        if kind.entries(vocab).is_empty() {
            return Err(PromptError::EmptyVocabulary(kind));
        }
    }
    let text = render(
        entity,
        &label_list(&vocab.colors),
        &label_list(&vocab.symptoms),
        &label_list(&vocab.shapes),
    );
    Ok(PromptSpec {
        entity: entity.to_owned(),
        vocabulary: vocab.clone(),
        fingerprint: fingerprint(entity, vocab),
        text,
    })
}
