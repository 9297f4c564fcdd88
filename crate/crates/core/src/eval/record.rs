use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::client::Observation;
use crate::iri::Iri;
use crate::prompt::ConceptKind;
use crate::query::UnknownLabel;
use crate::reasoner::Diagnosis;

pub const HEALTHY: &str = "healthy";

/// The expected label of a manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gold {
    Healthy,
    Disease(Iri),
}

impl Gold {
    pub fn disease(&self) -> Option<&Iri> {
        match self {
            Gold::Healthy => None,
            Gold::Disease(iri) => Some(iri),
        }
    }
}

impl Serialize for Gold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Gold::Healthy => s.serialize_str(HEALTHY),
            Gold::Disease(iri) => iri.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Gold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text.eq_ignore_ascii_case(HEALTHY) {
            Ok(Gold::Healthy)
        } else {
            Iri::parse(&text).map(Gold::Disease).map_err(serde::de::Error::custom)
        }
    }
}

/// Per-field exact-measure scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmTriple {
    pub symptom: u8,
    pub color: u8,
    pub shape: u8,
}

impl EmTriple {
    pub fn get(&self, kind: ConceptKind) -> u8 {
        match kind {
            ConceptKind::Symptom => self.symptom,
            ConceptKind::Color => self.color,
            ConceptKind::Shape => self.shape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Image,
    Send,
    Parse,
    Query,
    Classify,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Image => "image",
            Stage::Send => "send",
            Stage::Parse => "parse",
            Stage::Query => "query",
            Stage::Classify => "classify",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecordResult {
    Diagnosis { diagnosis: Diagnosis },
    HealthyFinding,
    Error { stage: Stage, message: String },
}

impl RecordResult {
    pub fn matched(&self) -> Option<&[Iri]> {
        match self {
            RecordResult::Diagnosis { diagnosis } => Some(&diagnosis.matched),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, RecordResult::Error { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalRecord {
    /// Position in the manifest.
    pub index: usize,
    pub sample: usize,
    pub image_path: String,
    pub gold_class: Gold,
    pub tags: Vec<String>,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observation: Option<Observation>,
    /// The reply text when it could not be parsed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_reply: Option<String>,
    pub result: RecordResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown_labels: Vec<UnknownLabel>,
    /// Present whenever the entry is diseased and the reply parsed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<EmTriple>,
}
