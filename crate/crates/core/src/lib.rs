//! Ontology-grounded disease diagnosis from multimodal LLM observations.
//!
//! The pipeline: extract an abnormality vocabulary from an OWL ontology,
//! render a prompt, parse the model's JSON reply into an [`client::Observation`],
//! compile it into a class expression, and classify it by structural
//! subsumption against the ontology's disease definitions. The evaluator
//! scores model replies against ontology-derived ground truth.

pub mod client;
pub mod config;
pub mod eval;
pub mod expr;
pub mod iri;
pub mod owl;
pub mod prompt;
pub mod query;
pub mod reasoner;

pub use expr::ClassExpression;
pub use iri::Iri;
pub use owl::{parse_ontology, serialize_ontology, Axiom, EntityKind, Ontology, OntologyError};
pub use reasoner::{
    classify_expression, extract_vocabulary, is_subsumed, told_ancestors, AbnormalityVocabulary, Diagnosis, SubsumptionVerdict,
};
