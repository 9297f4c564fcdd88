//! Run configuration: one JSON document, optionally overlaid with
//! individual values from the environment or the command line.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::client::ModelConfig;
use crate::eval::{EmMode, EvalSettings, MatchPolicy};
use crate::iri::Iri;
use crate::owl::Ontology;
use crate::reasoner::VocabularyRoots;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{0} is not a declared class")]
    UndeclaredClass(String),
}

/// Class names are local names in the ontology's namespace or full IRIs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootNames {
    pub color: String,
    pub symptom: String,
    pub shape: String,
    pub plant_part: String,
    #[serde(default)]
    pub exclude: Vec<String>,
}

impl Default for RootNames {
    fn default() -> Self {
        Self {
            color: "ColorAbnormality".into(),
            symptom: "SymptomAbnormality".into(),
            shape: "ShapeOfSymptomAbnormality".into(),
            plant_part: "PlantPart".into(),
            exclude: Vec::new(),
        }
    }
}

fn default_entity() -> String {
    "rice leaf".into()
}
fn default_disease_root() -> String {
    "RiceDisease".into()
}
fn default_plant_part() -> String {
    "Leaf".into()
}
fn default_normal_colors() -> Vec<String> {
    vec!["Green".into()]
}
fn default_concurrency() -> usize {
    4
}
fn default_samples() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default = "default_entity")]
    pub entity: String,
    #[serde(default)]
    pub roots: RootNames,
    #[serde(default = "default_disease_root")]
    pub disease_root: String,
    #[serde(default = "default_plant_part")]
    pub plant_part: String,
    #[serde(default)]
    pub match_policy: MatchPolicy,
    #[serde(default)]
    pub em_mode: EmMode,
    #[serde(default = "default_normal_colors")]
    pub normal_colors: Vec<String>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// A JSON config document with dotted-path overrides applied on top.
#[derive(Debug, Clone, Default)]
pub struct ConfigLayers {
    doc: Map<String, Value>,
}

impl ConfigLayers {
    /// Reads a config file. A relative `model.replay_dir` is taken from the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let mut layers = Self::from_json(&text)?;
        if let Some(Value::String(dir)) = layers.doc.get("model").and_then(|m| m.get("replay_dir")) {
            let dir = Path::new(dir);
            if dir.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                let joined = base.join(dir).to_string_lossy().into_owned();
                layers.set("model.replay_dir", Value::String(joined));
            }
        }
        Ok(layers)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        match serde_json::from_str(text) {
            Ok(Value::Object(doc)) => Ok(Self { doc }),
            Ok(_) => Err(ConfigError::Invalid("config must be a JSON object".into())),
            Err(e) => Err(ConfigError::Invalid(e.to_string())),
        }
    }

    /// Sets `value` at a dotted path such as `model.temperature`.
    pub fn set(&mut self, path: &str, value: Value) {
        let mut parts: Vec<&str> = path.split('.').collect();
        let last = parts.pop().expect("non-empty path");
        let mut node = &mut self.doc;
        for p in parts {
            let slot = node.entry(p).or_insert_with(|| Value::Object(Map::new()));
            if !slot.is_object() {
                *slot = Value::Object(Map::new());
            }
            node = slot.as_object_mut().expect("just made an object");
        }
        node.insert(last.to_owned(), value);
    }

    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let config: RunConfig =
            serde_json::from_value(Value::Object(self.doc)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(model) = &config.model {
            model.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(config)
    }
}

/// A declared class by local name or full IRI.
pub fn class_named(onto: &Ontology, name: &str) -> Result<Iri, ConfigError> {
    let iri = if name.contains("://") {
        Iri::parse(name).map_err(|e| ConfigError::Invalid(format!("{name}: {e}")))?
    } else {
        onto.iri(name).map_err(|e| ConfigError::Invalid(format!("{name}: {e}")))?
    };
    if onto.is_class(&iri) {
        Ok(iri)
    } else {
        Err(ConfigError::UndeclaredClass(name.to_owned()))
    }
}

impl RunConfig {
    pub fn vocabulary_roots(&self, onto: &Ontology) -> Result<VocabularyRoots, ConfigError> {
        let r = &self.roots;
        Ok(VocabularyRoots {
            color: class_named(onto, &r.color)?,
            symptom: class_named(onto, &r.symptom)?,
            shape: class_named(onto, &r.shape)?,
            plant_part: class_named(onto, &r.plant_part)?,
            exclude: r
                .exclude
                .iter()
                .map(|n| class_named(onto, n))
                .collect::<Result<BTreeSet<_>, _>>()?,
        })
    }

    pub fn eval_settings(&self, onto: &Ontology) -> Result<EvalSettings, ConfigError> {
        Ok(EvalSettings {
            disease_root: class_named(onto, &self.disease_root)?,
            plant_part: class_named(onto, &self.plant_part)?,
            match_policy: self.match_policy,
            em_mode: self.em_mode,
            normal_colors: self
                .normal_colors
                .iter()
                .map(|n| class_named(onto, n))
                .collect::<Result<_, _>>()?,
            samples: self.samples.max(1),
            concurrency: self.concurrency.max(1),
        })
    }
}
