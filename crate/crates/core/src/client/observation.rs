use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::prompt::{ConceptKind, COLOR_KEY, SHAPE_KEY, SYMPTOM_KEY};

pub const NA: &str = "N/A";

/// A reply field: a free-text label, or the model saying it saw nothing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelOrNa {
    Na,
    Label(String),
}

impl LabelOrNa {
    /// Trims, and maps any casing of `N/A` to [`LabelOrNa::Na`].
    pub fn from_text(text: &str) -> Self {
        let t = text.trim();
        if t.eq_ignore_ascii_case(NA) {
            LabelOrNa::Na
        } else {
            LabelOrNa::Label(t.to_owned())
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            LabelOrNa::Na => None,
            LabelOrNa::Label(s) => Some(s),
        }
    }

    pub fn is_na(&self) -> bool {
        matches!(self, LabelOrNa::Na)
    }
}

impl std::fmt::Display for LabelOrNa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label().unwrap_or(NA))
    }
}

impl Serialize for LabelOrNa {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label().unwrap_or(NA))
    }
}

impl<'de> Deserialize<'de> for LabelOrNa {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(LabelOrNa::from_text(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub symptom: LabelOrNa,
    pub color: LabelOrNa,
    pub shape: LabelOrNa,
    pub raw_text: String,
    /// Backend, model and decoding parameters that produced `raw_text`.
    pub model_fingerprint: String,
}

impl Observation {
    /// An observation without a backing reply, mostly for tests and tools.
    pub fn new(symptom: &str, color: &str, shape: &str) -> Self {
        Self {
            symptom: LabelOrNa::from_text(symptom),
            color: LabelOrNa::from_text(color),
            shape: LabelOrNa::from_text(shape),
            raw_text: String::new(),
            model_fingerprint: String::new(),
        }
    }

    pub fn field(&self, kind: ConceptKind) -> &LabelOrNa {
        match kind {
            ConceptKind::Symptom => &self.symptom,
            ConceptKind::Color => &self.color,
            ConceptKind::Shape => &self.shape,
        }
    }

    pub fn is_all_na(&self) -> bool {
        ConceptKind::ALL.iter().all(|k| self.field(*k).is_na())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", content = "key")]
pub enum ParseError {
    #[error("no JSON object found in reply")]
    NoJsonFound,
    #[error("reply lacks key {0}")]
    MissingKey(String),
    #[error("value of {0} is not a string")]
    NonStringValue(String),
    #[error("value of {0} is empty")]
    EmptyValue(String),
}

/// The first JSON object in `raw`: scanning left to right, the first `{`
/// from which a complete object parses. Code fences and surrounding prose
/// are skipped by construction.
fn first_object(raw: &str) -> Option<serde_json::Map<String, Value>> {
    raw.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

pub fn parse_observation(raw: &str) -> Result<Observation, ParseError> {
    let object = first_object(raw).ok_or(ParseError::NoJsonFound)?;
    let field = |key: &str| -> Result<LabelOrNa, ParseError> {
        match object.get(key) {
            None => Err(ParseError::MissingKey(key.into())),
            Some(Value::String(s)) if s.trim().is_empty() => Err(ParseError::EmptyValue(key.into())),
            Some(Value::String(s)) => Ok(LabelOrNa::from_text(s)),
            Some(_) => Err(ParseError::NonStringValue(key.into())),
        }
    };
    Ok(Observation {
        symptom: field(SYMPTOM_KEY)?,
        color: field(COLOR_KEY)?,
        shape: field(SHAPE_KEY)?,
        raw_text: raw.to_owned(),
        model_fingerprint: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_reply() {
        let raw = r#"{"SymptomAbnormality": "Spot", "ColorAbnormality": "Brown", "ShapeOfSymptomAbnormality": "Oval"}"#;
        let o = parse_observation(raw).unwrap();
        assert_eq!(o.symptom, LabelOrNa::Label("Spot".into()));
        assert_eq!(o.color, LabelOrNa::Label("Brown".into()));
        assert_eq!(o.shape, LabelOrNa::Label("Oval".into()));
        assert_eq!(o.raw_text, raw);
    }

    #[test]
    fn fenced_reply_with_prose() {
        let raw = "```json\n{\"SymptomAbnormality\": \"N/A\", \"ColorAbnormality\": \"n/a\", \"ShapeOfSymptomAbnormality\": \" N/A \"}\n``` Hope this helps!";
        let o = parse_observation(raw).unwrap();
        assert!(o.is_all_na());
    }

    #[test]
    fn skips_braces_that_are_not_objects() {
        let raw = "Sure {here} you go: {\"SymptomAbnormality\": \" Lesion \", \"ColorAbnormality\": \"Gray\", \"ShapeOfSymptomAbnormality\": \"Eye\", \"extra\": {\"x\": 1}}";
        let o = parse_observation(raw).unwrap();
        assert_eq!(o.symptom.label(), Some("Lesion"));
    }

    #[test]
    fn typed_errors() {
        assert_eq!(parse_observation("no json"), Err(ParseError::NoJsonFound));
        assert_eq!(parse_observation("[1, 2]"), Err(ParseError::NoJsonFound));
        assert_eq!(
            parse_observation(r#"{"SymptomAbnormality": "Spot"}"#),
            Err(ParseError::MissingKey("ColorAbnormality".into()))
        );
        assert_eq!(
            parse_observation(r#"{"symptomabnormality": "Spot", "ColorAbnormality": "x", "ShapeOfSymptomAbnormality": "y"}"#),
            Err(ParseError::MissingKey("SymptomAbnormality".into()))
        );
        assert_eq!(
            parse_observation(r#"{"SymptomAbnormality": ["Spot"], "ColorAbnormality": "x", "ShapeOfSymptomAbnormality": "y"}"#),
            Err(ParseError::NonStringValue("SymptomAbnormality".into()))
        );
        assert_eq!(
            parse_observation(r#"{"SymptomAbnormality": "Spot", "ColorAbnormality": "  ", "ShapeOfSymptomAbnormality": "y"}"#),
            Err(ParseError::EmptyValue("ColorAbnormality".into()))
        );
    }

    #[test]
    fn label_or_na_serde() {
        let v = serde_json::to_string(&[LabelOrNa::Na, LabelOrNa::Label("Spot".into())]).unwrap();
        assert_eq!(v, r#"["N/A","Spot"]"#);
        let back: Vec<LabelOrNa> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, [LabelOrNa::Na, LabelOrNa::Label("Spot".into())]);
    }
}
