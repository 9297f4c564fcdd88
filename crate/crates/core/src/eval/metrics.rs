use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize, Serializer};

use super::record::{EvalRecord, Gold};
use super::EvalError;
use crate::client::{LabelOrNa, NA};
use crate::iri::Iri;
use crate::owl::Ontology;
use crate::prompt::ConceptKind;
use crate::reasoner::AbnormalityVocabulary;

/// An exact ratio `hits / total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Rate {
    pub hits: u64,
    pub total: u64,
}

impl Rate {
    pub fn new(hits: u64, total: u64) -> Self {
        Self { hits, total }
    }

    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.hits as f64 / self.total as f64
        }
    }

    /// Compares as rationals: `a/b == c/d` iff `a*d == c*b`.
    pub fn same_ratio(&self, hits: u64, total: u64) -> bool {
        u128::from(self.hits) * u128::from(total) == u128::from(hits) * u128::from(self.total)
    }

    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += u64::from(hit);
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Rate", 3)?;
        st.serialize_field("hits", &self.hits)?;
        st.serialize_field("total", &self.total)?;
        st.serialize_field("ratio", &self.ratio())?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmMode {
    /// A told descendant of a gold concept also scores.
    #[default]
    Descendant,
    /// Only the gold concepts themselves score.
    Strict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchPolicy {
    /// Correct only when the gold class is the single match.
    #[default]
    StrictUnique,
    /// Correct whenever the gold class is among the matches.
    GoldInMatched,
}

impl MatchPolicy {
    pub fn is_correct(self, matched: &[Iri], gold: &Iri) -> bool {
        match self {
            MatchPolicy::StrictUnique => matched == std::slice::from_ref(gold),
            MatchPolicy::GoldInMatched => matched.contains(gold),
        }
    }
}

/// 1 when `predicted` resolves to a gold concept (or, in descendant mode, a
/// told descendant of one); 0 for NA, unknown labels, and misses.
pub fn exact_measure(predicted: &LabelOrNa, gold: &BTreeSet<Iri>, onto: &Ontology, mode: EmMode) -> u8 {
    let Some(label) = predicted.label() else {
        return 0;
    };
    let Ok(class) = onto.resolve_label(label) else {
        return 0;
    };
    let hit = match mode {
        EmMode::Strict => gold.contains(&class),
        EmMode::Descendant => onto.ancestors(&class).is_some_and(|a| gold.iter().any(|g| a.contains(g))),
    };
    u8::from(hit)
}

/// Records scored with EM 1 over records scored at all, for one field.
/// Every scored record is either a true or a false positive, so this is the
/// mean EM.
pub fn concept_wise_accuracy(records: &[EvalRecord], kind: ConceptKind) -> Result<Rate, EvalError> {
    let mut rate = Rate::default();
    for em in records.iter().filter_map(|r| r.em) {
        rate.add(em.get(kind) == 1);
    }
    if rate.total == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(rate)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConceptRates {
    pub symptom: Rate,
    pub color: Rate,
    pub shape: Rate,
}

impl ConceptRates {
    pub fn get(&self, kind: ConceptKind) -> Rate {
        match kind {
            ConceptKind::Symptom => self.symptom,
            ConceptKind::Color => self.color,
            ConceptKind::Shape => self.shape,
        }
    }

    fn get_mut(&mut self, kind: ConceptKind) -> &mut Rate {
        match kind {
            ConceptKind::Symptom => &mut self.symptom,
            ConceptKind::Color => &mut self.color,
            ConceptKind::Shape => &mut self.shape,
        }
    }
}

/// Concept-wise accuracy per gold class.
pub fn per_class_concept_accuracy(records: &[EvalRecord]) -> BTreeMap<Iri, ConceptRates> {
    let mut out: BTreeMap<Iri, ConceptRates> = BTreeMap::new();
    for r in records {
        if let (Some(gold), Some(em)) = (r.gold_class.disease(), r.em) {
            let rates = out.entry(gold.clone()).or_default();
            for kind in ConceptKind::ALL {
                rates.get_mut(kind).add(em.get(kind) == 1);
            }
        }
    }
    out
}

/// Share of diseased records per gold class whose diagnosis is correct.
/// Errors and healthy findings count as incorrect.
pub fn classification_accuracy(records: &[EvalRecord], policy: MatchPolicy) -> Result<BTreeMap<Iri, Rate>, EvalError> {
    let mut out: BTreeMap<Iri, Rate> = BTreeMap::new();
    for r in records {
        if let Some(gold) = r.gold_class.disease() {
            let correct = r.result.matched().is_some_and(|m| policy.is_correct(m, gold));
            out.entry(gold.clone()).or_default().add(correct);
        }
    }
    if out.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hallucination {
    pub index: usize,
    pub sample: usize,
    pub image_path: String,
    pub field: ConceptKind,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AblationReport {
    pub rates: ConceptRates,
    pub hallucinations: Vec<Hallucination>,
    /// Healthy records without a parsed reply; they are left out of the rates.
    pub unscored: u64,
}

/// Share of healthy records reporting no abnormality per field. Color also
/// counts as normal when it resolves to one of `normal_colors`.
pub fn ablation_rates(
    records: &[EvalRecord],
    onto: &Ontology,
    normal_colors: &BTreeSet<Iri>,
) -> Result<AblationReport, EvalError> {
    let mut rates = ConceptRates::default();
    let mut hallucinations = Vec::new();
    let mut unscored = 0;
    let mut seen = 0;
    for r in records.iter().filter(|r| r.gold_class == Gold::Healthy) {
        seen += 1;
        let Some(obs) = &r.observation else {
            unscored += 1;
            continue;
        };
        for kind in ConceptKind::ALL {
            let field = obs.field(kind);
            let normal = match field.label() {
                None => true,
                Some(label) => kind == ConceptKind::Color && onto.resolve_label(label).is_ok_and(|c| normal_colors.contains(&c)),
            };
            rates.get_mut(kind).add(normal);
            if !normal {
                hallucinations.push(Hallucination {
                    index: r.index,
                    sample: r.sample,
                    image_path: r.image_path.clone(),
                    field: kind,
                    value: field.to_string(),
                });
            }
        }
    }
    if seen == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(AblationReport {
        rates,
        hallucinations,
        unscored,
    })
}

pub const UNKNOWN_BUCKET: &str = "Unknown";
pub const UNPARSED_BUCKET: &str = "Unparsed";

/// Counts per vocabulary label, plus `N/A`, `Unknown` and `Unparsed`
/// buckets, for each field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Distribution {
    pub symptom: BTreeMap<String, u64>,
    pub color: BTreeMap<String, u64>,
    pub shape: BTreeMap<String, u64>,
}

impl Distribution {
    pub fn get(&self, kind: ConceptKind) -> &BTreeMap<String, u64> {
        match kind {
            ConceptKind::Symptom => &self.symptom,
            ConceptKind::Color => &self.color,
            ConceptKind::Shape => &self.shape,
        }
    }

    fn get_mut(&mut self, kind: ConceptKind) -> &mut BTreeMap<String, u64> {
        match kind {
            ConceptKind::Symptom => &mut self.symptom,
            ConceptKind::Color => &mut self.color,
            ConceptKind::Shape => &mut self.shape,
        }
    }
}

pub fn concept_distribution(records: &[EvalRecord], vocab: &AbnormalityVocabulary, onto: &Ontology) -> Distribution {
    let mut dist = Distribution::default();
    for kind in ConceptKind::ALL {
        let entries = kind.entries(vocab);
        let scope = AbnormalityVocabulary::classes(entries);
        let buckets = dist.get_mut(kind);
        for e in entries {
            buckets.insert(e.label.clone(), 0);
        }
        for b in [NA, UNKNOWN_BUCKET, UNPARSED_BUCKET] {
            buckets.insert(b.to_owned(), 0);
        }
        for r in records {
            let bucket = match &r.observation {
                None => UNPARSED_BUCKET.to_owned(),
                Some(obs) => match obs.field(kind).label() {
                    None => NA.to_owned(),
                    Some(label) => match onto.resolve_label_within(label, &scope) {
                        Ok(class) => onto.label(&class),
                        Err(_) => UNKNOWN_BUCKET.to_owned(),
                    },
                },
            };
            *buckets.entry(bucket).or_default() += 1;
        }
    }
    dist
}
