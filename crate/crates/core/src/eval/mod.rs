//! Scoring model replies against ontology-derived ground truth.
//!
//! Gold concepts are read off each disease definition, so they are
//! class-level rather than per-image annotations.

mod gold;
mod manifest;
mod metrics;
mod record;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{Client, ImageRef, ObserveError};
use crate::iri::Iri;
use crate::owl::Ontology;
use crate::prompt::{ConceptKind, PromptSpec};
use crate::query::{QueryBuilder, QueryError, QueryOutcome};
use crate::reasoner::{classify_expression, AbnormalityVocabulary};

pub use gold::{derive_gold_concepts, GoldConcepts};
pub use manifest::{Manifest, ManifestEntry};
pub use metrics::{
    ablation_rates, classification_accuracy, concept_distribution, concept_wise_accuracy, exact_measure,
    per_class_concept_accuracy, AblationReport, ConceptRates, Distribution, EmMode, Hallucination, MatchPolicy, Rate,
    UNKNOWN_BUCKET, UNPARSED_BUCKET,
};
pub use record::{EmTriple, EvalRecord, Gold, RecordResult, Stage, HEALTHY};
pub use report::{write_outputs, MetricsReport, RunMetadata};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("definition of {0} does not have the abnormality-group shape")]
    MalformedDefinition(Iri),
    #[error("no records to score")]
    EmptyInput,
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Scoring and classification options for a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub disease_root: Iri,
    pub plant_part: Iri,
    #[serde(default)]
    pub match_policy: MatchPolicy,
    #[serde(default)]
    pub em_mode: EmMode,
    /// Colors that count as no abnormality in the ablation.
    pub normal_colors: BTreeSet<Iri>,
    /// Replies requested per image.
    pub samples: usize,
    /// Entries processed at once.
    pub concurrency: usize,
}

impl EvalSettings {
    /// `RiceDisease` root, `Leaf` plant part, `Green` as the normal color.
    pub fn conventional(onto: &Ontology) -> Self {
        let iri = |local: &str| onto.iri(local).expect("constant local names are valid");
        Self {
            disease_root: iri("RiceDisease"),
            plant_part: iri("Leaf"),
            match_policy: MatchPolicy::default(),
            em_mode: EmMode::default(),
            normal_colors: BTreeSet::from([iri("Green")]),
            samples: 1,
            concurrency: 4,
        }
    }
}

/// Everything needed to run the pipeline on one entry.
struct Pipeline<'a> {
    onto: &'a Ontology,
    prompt: &'a PromptSpec,
    client: &'a Client,
    builder: QueryBuilder,
    gold: BTreeMap<Iri, GoldConcepts>,
    settings: &'a EvalSettings,
}

impl Pipeline<'_> {
    fn run(&self, entry: &ManifestEntry, sample: usize) -> EvalRecord {
        let mut record = EvalRecord {
            index: entry.index,
            sample,
            image_path: entry.image_path.clone(),
            gold_class: entry.gold_class.clone(),
            tags: entry.tags.clone(),
            model: self.client.config().model_name.clone(),
            observation: None,
            raw_reply: None,
            result: RecordResult::HealthyFinding,
            unknown_labels: Vec::new(),
            em: None,
        };
        let fail = |record: &mut EvalRecord, stage: Stage, message: String| {
            record.result = RecordResult::Error { stage, message };
        };
        let image = match ImageRef::from_path(&entry.resolved_path) {
            Ok(i) => i,
            Err(e) => {
                fail(&mut record, Stage::Image, e.to_string());
                return record;
            }
        };
        let obs = match self.client.observe(self.prompt, &image, sample) {
            Ok(o) => o,
            Err(ObserveError::Send(e)) => {
                fail(&mut record, Stage::Send, e.to_string());
                return record;
            }
            Err(ObserveError::Parse { error, raw }) => {
                record.raw_reply = Some(raw);
                fail(&mut record, Stage::Parse, error.to_string());
                return record;
            }
        };
        if let Some(gold) = entry.gold_class.disease().and_then(|d| self.gold.get(d)) {
            let em = |kind: ConceptKind| exact_measure(obs.field(kind), gold.get(kind), self.onto, self.settings.em_mode);
            record.em = Some(EmTriple {
                symptom: em(ConceptKind::Symptom),
                color: em(ConceptKind::Color),
                shape: em(ConceptKind::Shape),
            });
        }
        let outcome = self.builder.build(self.onto, &obs);
        record.observation = Some(obs);
        match outcome {
            Ok(QueryOutcome::HealthyFinding) => record.result = RecordResult::HealthyFinding,
            Ok(QueryOutcome::Expression(query)) => match classify_expression(self.onto, &query, &self.settings.disease_root) {
                Ok(diagnosis) => record.result = RecordResult::Diagnosis { diagnosis },
                Err(e) => fail(&mut record, Stage::Classify, e.to_string()),
            },
            Err(e) => {
                if let QueryError::UnknownLabel(list) = &e {
                    record.unknown_labels = list.clone();
                }
                fail(&mut record, Stage::Query, e.to_string());
            }
        }
        record
    }
}

/// Records in manifest order (then sample order) and the aggregated report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub records: Vec<EvalRecord>,
    pub report: MetricsReport,
}

/// Runs every manifest entry through send, parse, query and classify, then
/// scores the results. Per-entry failures become error records.
pub fn run_evaluation(
    manifest: &Manifest,
    onto: &Ontology,
    vocab: &AbnormalityVocabulary,
    prompt: &PromptSpec,
    client: &Client,
    settings: &EvalSettings,
) -> Result<Evaluation, EvalError> {
    let mut gold = BTreeMap::new();
    for disease in manifest.entries.iter().filter_map(|e| e.gold_class.disease()) {
        if !gold.contains_key(disease) {
            gold.insert(disease.clone(), derive_gold_concepts(onto, disease)?);
        }
    }
    let pipeline = Pipeline {
        onto,
        prompt,
        client,
        builder: QueryBuilder::new(onto, vocab, settings.plant_part.clone())?,
        gold,
        settings,
    };
    let jobs: Vec<(&ManifestEntry, usize)> = manifest
        .entries
        .iter()
        .flat_map(|e| (0..settings.samples.max(1)).map(move |k| (e, k)))
        .collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|s| {
        for _ in 0..settings.concurrency.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((entry, sample)) = jobs.get(i) else { break };
                let record = pipeline.run(entry, *sample);
                done.lock().unwrap_or_else(|e| e.into_inner()).push(record);
            });
        }
    });
    let mut records = done.into_inner().unwrap_or_else(|e| e.into_inner());
    records.sort_by_key(|r| (r.index, r.sample));
    let report = MetricsReport::build(&records, manifest, onto, vocab, prompt, client.config(), settings);
    Ok(Evaluation { records, report })
}
