use std::collections::BTreeSet;

use thiserror::Error;

use super::Ontology;
use crate::iri::Iri;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("unknown label `{label}`{}", suggestion_text(.suggestions))]
    UnknownLabel { label: String, suggestions: Vec<String> },
}

fn suggestion_text(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (closest: {})", suggestions.join(", "))
    }
}

/// Lowercases and drops whitespace, hyphens and underscores. Token order is kept.
pub fn normalize_label(label: &str) -> String {
    label
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Splits a camel-case identifier into words: `LightYellow` -> `Light Yellow`.
pub fn display_label(local: &str) -> String {
    let chars: Vec<char> = local.chars().collect();
    let mut out = String::with_capacity(local.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' {
            if !out.ends_with(' ') && !out.is_empty() {
                out.push(' ');
            }
            continue;
        }
        if i > 0 && c.is_uppercase() && !out.ends_with(' ') {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push(' ');
            }
        }
        out.push(c);
    }
    out.trim_end().to_owned()
}

const MAX_SUGGESTIONS: usize = 3;

pub(super) fn resolve(onto: &Ontology, label: &str, within: Option<&BTreeSet<Iri>>) -> Result<Iri, LabelError> {
    let key = normalize_label(label);
    if let Some(iri) = onto.label_index().get(&key) {
        if within.is_none_or(|set| set.contains(iri)) {
            return Ok(iri.clone());
        }
    }
    Err(LabelError::UnknownLabel {
        label: label.to_owned(),
        suggestions: suggest(onto, &key, within),
    })
}

/// Closest labels by character-bigram overlap on normalized forms.
///
/// Bigram overlap ranks token-swapped labels (`YellowishBrown` vs
/// `BrownishYellow`) as near neighbours, which Levenshtein distance does not.
fn suggest(onto: &Ontology, key: &str, within: Option<&BTreeSet<Iri>>) -> Vec<String> {
    let mut scored: Vec<(f64, String)> = onto
        .label_index()
        .iter()
        .filter(|(_, iri)| within.is_none_or(|set| set.contains(*iri)))
        .map(|(norm, iri)| (strsim::sorensen_dice(key, norm), onto.label(iri)))
        .filter(|(score, _)| *score > 0.0)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut out: Vec<String> = Vec::new();
    for (_, label) in scored {
        if !out.contains(&label) {
            out.push(label);
        }
        if out.len() == MAX_SUGGESTIONS {
            break;
        }
    }
    out
}
