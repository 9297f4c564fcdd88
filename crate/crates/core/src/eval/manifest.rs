use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::{Gold, HEALTHY};
use super::EvalError;
use crate::iri::Iri;
use crate::owl::Ontology;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    image_path: String,
    gold_class: String,
    #[serde(default)]
    tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    /// Position among the manifest's entries.
    pub index: usize,
    /// As written in the manifest.
    pub image_path: String,
    /// Relative paths are taken from the manifest's directory.
    #[serde(skip)]
    pub resolved_path: PathBuf,
    pub gold_class: Gold,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// SHA-256 of the manifest text.
    pub sha256: String,
}

fn manifest_error(line: usize, message: impl Into<String>) -> EvalError {
    EvalError::Manifest {
        line,
        message: message.into(),
    }
}

impl Manifest {
    pub fn load(path: &Path, onto: &Ontology, root: &Iri) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")), onto, root)
    }

    /// One JSON object per line with `image_path`, `gold_class` (an IRI, a
    /// local name in the ontology's namespace, or `healthy`) and optional
    /// `tags`. Blank lines are skipped. Diseased entries must name a strict
    /// told descendant of `root`.
    pub fn parse(text: &str, base_dir: &Path, onto: &Ontology, root: &Iri) -> Result<Self, EvalError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(raw).map_err(|e| manifest_error(n, e.to_string()))?;
            if line.image_path.trim().is_empty() {
                return Err(manifest_error(n, "empty image_path"));
            }
            let gold_class = if line.gold_class.eq_ignore_ascii_case(HEALTHY) {
                Gold::Healthy
            } else {
                let iri = Iri::parse(&line.gold_class)
                    .or_else(|_| onto.iri(&line.gold_class))
                    .map_err(|e| manifest_error(n, format!("gold_class {:?}: {e}", line.gold_class)))?;
                let under_root = onto.descendants(root).is_some_and(|d| d.contains(&iri));
                if !onto.is_class(&iri) || !under_root || &iri == root {
                    return Err(manifest_error(n, format!("gold_class {iri} is not a disease under {root}")));
                }
                Gold::Disease(iri)
            };
            let resolved_path = base_dir.join(&line.image_path);
            entries.push(ManifestEntry {
                index: entries.len(),
                image_path: line.image_path,
                resolved_path,
                gold_class,
                tags: line.tags,
            });
        }
        if entries.is_empty() {
            return Err(manifest_error(0, "manifest has no entries"));
        }
        Ok(Self {
            entries,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    /// Only the healthy entries, keeping their manifest order.
    pub fn healthy_only(&self) -> Result<Self, EvalError> {
        let entries: Vec<ManifestEntry> = self
            .entries
            .iter()
            .filter(|e| e.gold_class == Gold::Healthy)
            .cloned()
            .collect();
        if entries.is_empty() {
            return Err(manifest_error(0, "manifest has no healthy entries"));
        }
        Ok(Self {
            entries,
            sha256: self.sha256.clone(),
        })
    }
}
