use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ReasonerError;
use crate::iri::Iri;
use crate::owl::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyRoots {
    pub color: Iri,
    pub symptom: Iri,
    pub shape: Iri,
    pub plant_part: Iri,
    /// Grouping classes to leave out of the extracted lists.
    #[serde(default)]
    pub exclude: BTreeSet<Iri>,
}

impl VocabularyRoots {
    /// Conventional root names in the ontology's default namespace.
    pub fn conventional(onto: &Ontology) -> Self {
        let iri = |local: &str| onto.iri(local).expect("constant local names are valid");
        Self {
            color: iri("ColorAbnormality"),
            symptom: iri("SymptomAbnormality"),
            shape: iri("ShapeOfSymptomAbnormality"),
            plant_part: iri("PlantPart"),
            exclude: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub label: String,
    pub class: Iri,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbnormalityVocabulary {
    pub colors: Vec<VocabularyEntry>,
    pub symptoms: Vec<VocabularyEntry>,
    pub shapes: Vec<VocabularyEntry>,
    pub plant_parts: Vec<VocabularyEntry>,
}

impl AbnormalityVocabulary {
    pub fn classes(entries: &[VocabularyEntry]) -> BTreeSet<Iri> {
        entries.iter().map(|e| e.class.clone()).collect()
    }
}

fn subtree(onto: &Ontology, root: &Iri, exclude: &BTreeSet<Iri>) -> Result<Vec<VocabularyEntry>, ReasonerError> {
    let below = onto
        .descendants(root)
        .ok_or_else(|| ReasonerError::UndeclaredEntity(root.clone()))?;
    let mut entries: Vec<VocabularyEntry> = below
        .iter()
        .filter(|c| *c != root && !exclude.contains(*c))
        .map(|c| VocabularyEntry {
            label: onto.label(c),
            class: c.clone(),
        })
        .collect();
    entries.sort();
    entries.dedup_by(|a, b| a.class == b.class);
    Ok(entries)
}

/// Strict told descendants of each root as sorted `(label, class)` lists.
pub fn extract_vocabulary(onto: &Ontology, roots: &VocabularyRoots) -> Result<AbnormalityVocabulary, ReasonerError> {
    Ok(AbnormalityVocabulary {
        colors: subtree(onto, &roots.color, &roots.exclude)?,
        symptoms: subtree(onto, &roots.symptom, &roots.exclude)?,
        shapes: subtree(onto, &roots.shape, &roots.exclude)?,
        plant_parts: subtree(onto, &roots.plant_part, &roots.exclude)?,
    })
}
