use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::metrics::{
    ablation_rates, classification_accuracy, concept_distribution, per_class_concept_accuracy, AblationReport, ConceptRates,
    Distribution, EmMode, MatchPolicy,
};
use super::record::{EvalRecord, Gold, RecordResult, Stage};
use super::{concept_wise_accuracy, EvalSettings, Evaluation, Manifest};
use crate::client::{Backend, ModelConfig};
use crate::owl::{serialize_ontology, Ontology};
use crate::prompt::{ConceptKind, PromptSpec, TEMPLATE_VERSION};
use crate::reasoner::AbnormalityVocabulary;

const NOTE_GOLD: &str = "Gold concepts are class-level: they are read off each disease definition in the ontology, not annotated per image, so exact-measure scores mix model error with visual variation within a class.";
const NOTE_REPLAY: &str = "Replies were served from recorded fixtures. These figures describe the fixture set and do not reproduce results of live models.";
const NOTE_CONCEPT: &str =
    "Concept accuracy is TP / (TP + FP) over scored diseased records, which equals their mean exact measure.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub backend: Backend,
    pub model_name: String,
    pub model_fingerprint: String,
    pub template_version: &'static str,
    pub prompt_fingerprint: String,
    pub entity: String,
    pub disease_root: String,
    pub plant_part: String,
    pub match_policy: MatchPolicy,
    pub em_mode: EmMode,
    pub samples: usize,
    pub entries: usize,
    /// SHA-256 of the ontology in canonical serialization.
    pub ontology_sha256: String,
    pub manifest_sha256: String,
    /// SHA-256 over every reply text in record order.
    pub replies_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub records: usize,
    pub diseased: usize,
    pub healthy: usize,
    /// Diseased records with exact-measure scores.
    pub scored: usize,
    pub errors: usize,
    pub errors_by_stage: BTreeMap<Stage, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorSummary {
    pub index: usize,
    pub sample: usize,
    pub image_path: String,
    pub stage: Stage,
    pub message: String,
}

/// Aggregated metrics for one run. Class keys are ontology labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub notes: Vec<&'static str>,
    pub run: RunMetadata,
    pub counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concept_accuracy: Option<ConceptRates>,
    pub per_class_concept_accuracy: BTreeMap<String, ConceptRates>,
    pub classification_accuracy: BTreeMap<String, super::Rate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ablation: Option<AblationReport>,
    /// Over diseased records.
    pub distribution: Distribution,
    pub errors: Vec<ErrorSummary>,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl MetricsReport {
    pub(crate) fn build(
        records: &[EvalRecord],
        manifest: &Manifest,
        onto: &Ontology,
        vocab: &AbnormalityVocabulary,
        prompt: &PromptSpec,
        config: &ModelConfig,
        settings: &EvalSettings,
    ) -> Self {
        let mut notes = vec![NOTE_GOLD, NOTE_CONCEPT];
        if matches!(config.backend, Backend::Replay | Backend::Mock) {
            notes.insert(0, NOTE_REPLAY);
        }
        let mut replies = Sha256::new();
        for r in records {
            let text = r
                .observation
                .as_ref()
                .map(|o| o.raw_text.as_str())
                .or(r.raw_reply.as_deref())
                .unwrap_or("");
            replies.update((text.len() as u64).to_le_bytes());
            replies.update(text.as_bytes());
        }
        let run = RunMetadata {
            backend: config.backend,
            model_name: config.model_name.clone(),
            model_fingerprint: config.fingerprint(),
            template_version: TEMPLATE_VERSION,
            prompt_fingerprint: prompt.fingerprint.clone(),
            entity: prompt.entity.clone(),
            disease_root: onto.label(&settings.disease_root),
            plant_part: onto.label(&settings.plant_part),
            match_policy: settings.match_policy,
            em_mode: settings.em_mode,
            samples: settings.samples.max(1),
            entries: manifest.entries.len(),
            ontology_sha256: sha256(serialize_ontology(onto).as_bytes()),
            manifest_sha256: manifest.sha256.clone(),
            replies_sha256: hex::encode(replies.finalize()),
        };

        let diseased: Vec<EvalRecord> = records.iter().filter(|r| r.gold_class != Gold::Healthy).cloned().collect();
        let mut errors = Vec::new();
        let mut errors_by_stage = BTreeMap::new();
        for r in records {
            if let RecordResult::Error { stage, message } = &r.result {
                *errors_by_stage.entry(*stage).or_default() += 1;
                errors.push(ErrorSummary {
                    index: r.index,
                    sample: r.sample,
                    image_path: r.image_path.clone(),
                    stage: *stage,
                    message: message.clone(),
                });
            }
        }
        let counts = Counts {
            records: records.len(),
            diseased: diseased.len(),
            healthy: records.len() - diseased.len(),
            scored: diseased.iter().filter(|r| r.em.is_some()).count(),
            errors: errors.len(),
            errors_by_stage,
        };
        let concept_accuracy = (|| {
            Some(ConceptRates {
                symptom: concept_wise_accuracy(&diseased, ConceptKind::Symptom).ok()?,
                color: concept_wise_accuracy(&diseased, ConceptKind::Color).ok()?,
                shape: concept_wise_accuracy(&diseased, ConceptKind::Shape).ok()?,
            })
        })();
        let by_label = |iri: &crate::iri::Iri| onto.label(iri);
        Self {
            notes,
            run,
            counts,
            concept_accuracy,
            per_class_concept_accuracy: per_class_concept_accuracy(&diseased)
                .into_iter()
                .map(|(k, v)| (by_label(&k), v))
                .collect(),
            classification_accuracy: classification_accuracy(&diseased, settings.match_policy)
                .map(|m| m.into_iter().map(|(k, v)| (by_label(&k), v)).collect())
                .unwrap_or_default(),
            ablation: ablation_rates(records, onto, &settings.normal_colors).ok(),
            distribution: concept_distribution(&diseased, vocab, onto),
            errors,
        }
    }
}

/// Writes `records.jsonl` and `summary.json` into `out_dir`, returning their paths.
pub fn write_outputs(out_dir: &Path, evaluation: &Evaluation) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let mut lines = String::new();
    for r in &evaluation.records {
        lines.push_str(&serde_json::to_string(r).map_err(std::io::Error::other)?);
        lines.push('\n');
    }
    let records = out_dir.join("records.jsonl");
    std::fs::write(&records, lines)?;
    let mut summary_text = serde_json::to_string_pretty(&evaluation.report).map_err(std::io::Error::other)?;
    summary_text.push('\n');
    let summary = out_dir.join("summary.json");
    std::fs::write(&summary, summary_text)?;
    Ok((records, summary))
}
