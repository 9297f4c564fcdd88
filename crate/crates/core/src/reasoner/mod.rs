//! Subsumption, classification, and vocabulary extraction over an [`Ontology`].
//!
//! Subsumption is decided structurally: the query is unfolded through the
//! ontology's definitions and told hierarchy, then the candidate superclass
//! is matched conjunct by conjunct. This is sound for the supported subset
//! and complete when every class is either defined by one equivalence or
//! described only by subclass axioms.

mod structural;
mod vocab;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::expr::ClassExpression;
use crate::iri::Iri;
use crate::owl::Ontology;

pub use structural::Rule;
pub use vocab::{extract_vocabulary, AbnormalityVocabulary, VocabularyEntry, VocabularyRoots};

use structural::{Proof, Structural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("undeclared entity {0}")]
    UndeclaredEntity(Iri),
    #[error("query contains a union: {0}")]
    UnionInQuery(String),
    #[error("unfolding the query yields more than {limit} disjunctive branches")]
    TooManyBranches { limit: usize },
}

impl From<structural::TooManyBranches> for ReasonerError {
    fn from(_: structural::TooManyBranches) -> Self {
        ReasonerError::TooManyBranches {
            limit: structural::MAX_BRANCHES,
        }
    }
}

/// One justification step. `definition_part` is the superclass-side goal;
/// `query_part` is what the query offered for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub depth: usize,
    pub rule: Rule,
    pub definition_part: ClassExpression,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query_part: Option<ClassExpression>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsumptionVerdict {
    pub holds: bool,
    pub trace: Vec<TraceStep>,
    /// Innermost failing goal along the first failing path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<TraceStep>,
}

impl SubsumptionVerdict {
    fn from_proof(proof: &Proof) -> Self {
        let mut trace = Vec::new();
        flatten(proof, 0, &mut trace);
        let first_failure = (!proof.holds).then(|| {
            let mut node = proof;
            let mut depth = 0;
            while let Some(child) = node.children.iter().find(|c| !c.holds) {
                node = child;
                depth += 1;
            }
            step(node, depth)
        });
        Self {
            holds: proof.holds,
            trace,
            first_failure,
        }
    }
}

fn step(p: &Proof, depth: usize) -> TraceStep {
    TraceStep {
        depth,
        rule: p.rule,
        definition_part: p.goal.clone(),
        query_part: p.witness.clone(),
        holds: p.holds,
    }
}

fn flatten(p: &Proof, depth: usize, out: &mut Vec<TraceStep>) {
    out.push(step(p, depth));
    for c in &p.children {
        flatten(c, depth + 1, out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    /// Subsumption-minimal matching classes, in IRI order.
    pub matched: Vec<Iri>,
    pub query: ClassExpression,
    pub verdicts: BTreeMap<Iri, SubsumptionVerdict>,
}

fn check_declared(onto: &Ontology, expr: &ClassExpression) -> Result<(), ReasonerError> {
    if let Some(c) = expr.classes().into_iter().find(|c| !onto.is_class(c)) {
        return Err(ReasonerError::UndeclaredEntity(c.clone()));
    }
    if let Some(p) = expr.properties().into_iter().find(|p| !onto.is_property(p)) {
        return Err(ReasonerError::UndeclaredEntity(p.clone()));
    }
    Ok(())
}

fn check_query(onto: &Ontology, query: &ClassExpression) -> Result<(), ReasonerError> {
    check_declared(onto, query)?;
    if query.contains_union() {
        return Err(ReasonerError::UnionInQuery(query.manchester().to_string()));
    }
    Ok(())
}

/// Decides `sub ⊑ sup`. `sub` must be union-free.
pub fn is_subsumed(onto: &Ontology, sub: &ClassExpression, sup: &ClassExpression) -> Result<SubsumptionVerdict, ReasonerError> {
    check_query(onto, sub)?;
    check_declared(onto, sup)?;
    let proof = Structural::new(onto).prove(sub, sup)?;
    Ok(SubsumptionVerdict::from_proof(&proof))
}

/// Tests `query` against every defined told descendant of `root` and keeps
/// the subsumption-minimal matches.
pub fn classify_expression(onto: &Ontology, query: &ClassExpression, root: &Iri) -> Result<Diagnosis, ReasonerError> {
    check_query(onto, query)?;
    let descendants = onto
        .descendants(root)
        .ok_or_else(|| ReasonerError::UndeclaredEntity(root.clone()))?;
    let engine = Structural::new(onto);
    let mut verdicts = BTreeMap::new();
    for candidate in descendants.iter().filter(|d| onto.definition(d).is_some()) {
        let proof = engine.prove(query, &ClassExpression::Named(candidate.clone()))?;
        verdicts.insert(candidate.clone(), SubsumptionVerdict::from_proof(&proof));
    }
    let holding: BTreeSet<&Iri> = verdicts.iter().filter(|(_, v)| v.holds).map(|(k, _)| k).collect();
    let matched = holding
        .iter()
        .filter(|d| {
            let below = onto.descendants(d).expect("declared");
            !holding.iter().any(|other| other != *d && below.contains(*other))
        })
        .map(|d| (*d).clone())
        .collect();
    Ok(Diagnosis {
        matched,
        query: query.clone(),
        verdicts,
    })
}

/// Reflexive-transitive closure over named SubClassOf targets and named
/// conjuncts of definitions.
pub fn told_ancestors(onto: &Ontology, class: &Iri) -> Result<BTreeSet<Iri>, ReasonerError> {
    onto.ancestors(class)
        .cloned()
        .ok_or_else(|| ReasonerError::UndeclaredEntity(class.clone()))
}
