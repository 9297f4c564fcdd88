//! OWL 2 functional-syntax subset: axioms, the indexed [`Ontology`], and
//! label resolution.

mod label;
mod lexer;
mod parser;
mod writer;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::ClassExpression;
use crate::iri::Iri;

pub use label::{display_label, normalize_label, LabelError};
pub use parser::{parse_class_expression, parse_ontology};
pub use writer::serialize_ontology;

/// Namespace bound to `:` when a document has no `Prefix(:=<...>)` header.
pub const FALLBACK_NAMESPACE: &str = "http://www.example.org/ontology#";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

pub(crate) const PREDEFINED_PREFIXES: [(&str, &str); 4] = [
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("syntax error at {line}:{column}: expected {expected}")]
    Syntax { line: usize, column: usize, expected: String },
    #[error("unsupported construct `{name}` at {line}:{column}")]
    UnsupportedConstruct { name: String, line: usize, column: usize },
    #[error("unsupported axiom shape: {0}")]
    UnsupportedAxiom(String),
    #[error("cyclic definition: {}", .0.iter().map(|i| i.local()).collect::<Vec<_>>().join(" -> "))]
    CyclicDefinition(Vec<Iri>),
    #[error("undeclared entity {0}")]
    UndeclaredEntity(Iri),
    #[error("label `{label}` is shared by {first} and {second}")]
    DuplicateLabel { label: String, first: Iri, second: Iri },
    #[error("class {0} has more than one definition")]
    MultipleDefinitions(Iri),
    #[error("empty label on {0}")]
    EmptyLabel(Iri),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Class,
    ObjectProperty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Axiom {
    Declaration { kind: EntityKind, entity: Iri },
    SubClassOf { sub: ClassExpression, sup: ClassExpression },
    EquivalentClasses { lhs: Iri, rhs: ClassExpression },
    Label { entity: Iri, text: String },
}

impl Axiom {
    fn group(&self) -> u8 {
        match self {
            Axiom::Declaration { .. } => 0,
            Axiom::Label { .. } => 1,
            Axiom::SubClassOf { .. } => 2,
            Axiom::EquivalentClasses { .. } => 3,
        }
    }

    /// IRIs in order of appearance; the canonical sort key within a group.
    fn iris(&self) -> Vec<&Iri> {
        fn walk<'a>(e: &'a ClassExpression, out: &mut Vec<&'a Iri>) {
            match e {
                ClassExpression::Named(iri) => out.push(iri),
                ClassExpression::Intersection(ops) | ClassExpression::Union(ops) => ops.iter().for_each(|op| walk(op, out)),
                ClassExpression::Some { property, filler } => {
                    out.push(property);
                    walk(filler, out);
                }
            }
        }
        let mut out = Vec::new();
        match self {
            Axiom::Declaration { entity, .. } | Axiom::Label { entity, .. } => out.push(entity),
            Axiom::SubClassOf { sub, sup } => {
                walk(sub, &mut out);
                walk(sup, &mut out);
            }
            Axiom::EquivalentClasses { lhs, rhs } => {
                out.push(lhs);
                walk(rhs, &mut out);
            }
        }
        out
    }

    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.group()
            .cmp(&other.group())
            .then_with(|| self.iris().cmp(&other.iris()))
            .then_with(|| writer::render_axiom(self, &[]).cmp(&writer::render_axiom(other, &[])))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassInfo {
    /// Direct told supers: named SubClassOf targets plus named conjuncts of the definition.
    pub supers: BTreeSet<Iri>,
    /// Complex SubClassOf targets (necessary conditions that are not plain names).
    pub restrictions: Vec<ClassExpression>,
    pub definition: Option<ClassExpression>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefix {
    pub name: String,
    pub namespace: String,
}

/// A validated, indexed axiom set. Immutable once built.
#[derive(Debug, Clone)]
pub struct Ontology {
    prefixes: Vec<Prefix>,
    iri: Option<String>,
    axioms: Vec<Axiom>,
    classes: BTreeMap<Iri, ClassInfo>,
    properties: BTreeSet<Iri>,
    labels: BTreeMap<String, Iri>,
    ancestors: BTreeMap<Iri, BTreeSet<Iri>>,
    descendants: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl PartialEq for Ontology {
    fn eq(&self, other: &Self) -> bool {
        self.axioms == other.axioms
    }
}

impl Ontology {
    /// Validates `axioms` and builds all indexes. The stored axiom list is
    /// canonically ordered and duplicate-free.
    pub fn new(prefixes: Vec<Prefix>, iri: Option<String>, mut axioms: Vec<Axiom>) -> Result<Self, OntologyError> {
        axioms.sort_by(Axiom::canonical_cmp);
        axioms.dedup();

        let mut classes: BTreeMap<Iri, ClassInfo> = BTreeMap::new();
        let mut properties = BTreeSet::new();
        for axiom in &axioms {
            if let Axiom::Declaration { kind, entity } = axiom {
                match kind {
                    EntityKind::Class => {
                        classes.entry(entity.clone()).or_default();
                    }
                    EntityKind::ObjectProperty => {
                        properties.insert(entity.clone());
                    }
                }
            }
        }

        let check_expr = |e: &ClassExpression| -> Result<(), OntologyError> {
            if let Some(c) = e.classes().into_iter().find(|c| !classes.contains_key(*c)) {
                return Err(OntologyError::UndeclaredEntity(c.clone()));
            }
            if let Some(p) = e.properties().into_iter().find(|p| !properties.contains(*p)) {
                return Err(OntologyError::UndeclaredEntity(p.clone()));
            }
            Ok(())
        };

        let mut infos = classes.clone();
        for axiom in &axioms {
            match axiom {
                Axiom::Declaration { .. } => {}
                Axiom::SubClassOf { sub, sup } => {
                    check_expr(sub)?;
                    check_expr(sup)?;
                    let Some(sub) = sub.as_named() else {
                        return Err(OntologyError::UnsupportedAxiom(format!(
                            "SubClassOf with complex subclass `{}`",
                            sub.manchester()
                        )));
                    };
                    let info = infos.get_mut(sub).expect("declared");
                    match sup {
                        ClassExpression::Named(s) => {
                            info.supers.insert(s.clone());
                        }
                        other => info.restrictions.push(other.clone()),
                    }
                }
                Axiom::EquivalentClasses { lhs, rhs } => {
                    if !classes.contains_key(lhs) {
                        return Err(OntologyError::UndeclaredEntity(lhs.clone()));
                    }
                    check_expr(rhs)?;
                    let info = infos.get_mut(lhs).expect("declared");
                    if info.definition.is_some() {
                        return Err(OntologyError::MultipleDefinitions(lhs.clone()));
                    }
                    for conjunct in rhs.conjuncts() {
                        if let ClassExpression::Named(n) = conjunct {
                            info.supers.insert(n.clone());
                        }
                    }
                    info.definition = Some(rhs.clone());
                }
                Axiom::Label { entity, text } => {
                    if !classes.contains_key(entity) && !properties.contains(entity) {
                        return Err(OntologyError::UndeclaredEntity(entity.clone()));
                    }
                    if text.trim().is_empty() {
                        return Err(OntologyError::EmptyLabel(entity.clone()));
                    }
                    if let Some(info) = infos.get_mut(entity) {
                        info.labels.push(text.clone());
                    }
                }
            }
        }

        check_acyclic(&infos)?;

        let mut labels: BTreeMap<String, Iri> = BTreeMap::new();
        for (iri, info) in &infos {
            let names: Vec<&str> = if info.labels.is_empty() {
                vec![iri.local()]
            } else {
                info.labels.iter().map(String::as_str).collect()
            };
            for name in names {
                let key = normalize_label(name);
                match labels.get(&key) {
                    Some(existing) if existing != iri => {
                        return Err(OntologyError::DuplicateLabel {
                            label: name.to_owned(),
                            first: existing.clone(),
                            second: iri.clone(),
                        })
                    }
                    _ => {
                        labels.insert(key, iri.clone());
                    }
                }
            }
        }

        let mut ancestors = BTreeMap::new();
        let mut descendants: BTreeMap<Iri, BTreeSet<Iri>> = infos.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        for iri in infos.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = vec![iri];
            while let Some(c) = stack.pop() {
                if seen.insert(c.clone()) {
                    stack.extend(infos[c].supers.iter());
                }
            }
            for a in &seen {
                descendants.get_mut(a).expect("declared").insert(iri.clone());
            }
            ancestors.insert(iri.clone(), seen);
        }

        Ok(Self {
            prefixes,
            iri,
            axioms,
            classes: infos,
            properties,
            labels,
            ancestors,
            descendants,
        })
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn prefixes(&self) -> &[Prefix] {
        &self.prefixes
    }

    pub fn ontology_iri(&self) -> Option<&str> {
        self.iri.as_deref()
    }

    /// Namespace bound to the empty prefix, or the fallback.
    pub fn default_namespace(&self) -> &str {
        self.prefixes
            .iter()
            .find(|p| p.name.is_empty())
            .map(|p| p.namespace.as_str())
            .unwrap_or(FALLBACK_NAMESPACE)
    }

    /// IRI for `local` in the default namespace.
    pub fn iri(&self, local: &str) -> Result<Iri, crate::iri::IriError> {
        Iri::new(self.default_namespace(), local)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&Iri, &ClassInfo)> {
        self.classes.iter()
    }

    pub fn class(&self, iri: &Iri) -> Option<&ClassInfo> {
        self.classes.get(iri)
    }

    pub fn is_class(&self, iri: &Iri) -> bool {
        self.classes.contains_key(iri)
    }

    pub fn is_property(&self, iri: &Iri) -> bool {
        self.properties.contains(iri)
    }

    pub fn properties(&self) -> impl Iterator<Item = &Iri> {
        self.properties.iter()
    }

    pub fn definition(&self, iri: &Iri) -> Option<&ClassExpression> {
        self.classes.get(iri).and_then(|c| c.definition.as_ref())
    }

    /// Reflexive-transitive told supers; `None` when `iri` is not a declared class.
    pub fn ancestors(&self, iri: &Iri) -> Option<&BTreeSet<Iri>> {
        self.ancestors.get(iri)
    }

    /// Reflexive-transitive told subclasses.
    pub fn descendants(&self, iri: &Iri) -> Option<&BTreeSet<Iri>> {
        self.descendants.get(iri)
    }

    /// The label a class answers to: its first explicit label or its local name.
    pub fn label(&self, iri: &Iri) -> String {
        self.classes
            .get(iri)
            .and_then(|c| c.labels.iter().min().cloned())
            .unwrap_or_else(|| iri.local().to_owned())
    }

    /// Human-readable label: explicit labels verbatim, local names split on camel case.
    pub fn display(&self, iri: &Iri) -> String {
        match self.classes.get(iri).and_then(|c| c.labels.iter().min()) {
            Some(text) => text.clone(),
            None => display_label(iri.local()),
        }
    }

    pub(crate) fn label_index(&self) -> &BTreeMap<String, Iri> {
        &self.labels
    }

    /// Maps a free-text label to a class by exact normalized match.
    pub fn resolve_label(&self, label: &str) -> Result<Iri, LabelError> {
        label::resolve(self, label, None)
    }

    /// Like [`Ontology::resolve_label`] but only accepts, and suggests, classes in `candidates`.
    pub fn resolve_label_within(&self, label: &str, candidates: &BTreeSet<Iri>) -> Result<Iri, LabelError> {
        label::resolve(self, label, Some(candidates))
    }
}

fn check_acyclic(infos: &BTreeMap<Iri, ClassInfo>) -> Result<(), OntologyError> {
    // Edges: definition names and all SubClassOf targets. Unfolding terminates iff this graph is a DAG.
    let edges = |iri: &Iri| -> BTreeSet<Iri> {
        let info = &infos[iri];
        let mut out: BTreeSet<Iri> = info.supers.clone();
        for e in info.restrictions.iter().chain(info.definition.iter()) {
            out.extend(e.classes().into_iter().cloned());
        }
        out
    };

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<Iri, Mark> = BTreeMap::new();
    for root in infos.keys() {
        if marks.contains_key(root) {
            continue;
        }
        let mut path: Vec<Iri> = vec![root.clone()];
        let mut stack: Vec<std::vec::IntoIter<Iri>> = vec![edges(root).into_iter().collect::<Vec<_>>().into_iter()];
        marks.insert(root.clone(), Mark::Active);
        while let Some(iter) = stack.last_mut() {
            match iter.next() {
                Some(next) => match marks.get(&next) {
                    Some(Mark::Active) => {
                        let start = path.iter().position(|p| *p == next).expect("on path");
                        let mut chain = path[start..].to_vec();
                        chain.push(next);
                        return Err(OntologyError::CyclicDefinition(chain));
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next.clone(), Mark::Active);
                        stack.push(edges(&next).into_iter().collect::<Vec<_>>().into_iter());
                        path.push(next);
                    }
                },
                None => {
                    stack.pop();
                    let done = path.pop().expect("path tracks stack");
                    marks.insert(done, Mark::Done);
                }
            }
        }
    }
    Ok(())
}
