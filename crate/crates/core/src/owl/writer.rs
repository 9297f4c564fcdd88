use std::fmt::Write;

use super::{Axiom, EntityKind, Ontology, Prefix};
use crate::expr::ClassExpression;
use crate::iri::Iri;

fn is_plain_local(local: &str) -> bool {
    !local.is_empty() && local.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn write_iri(out: &mut String, iri: &Iri, prefixes: &[Prefix]) {
    if is_plain_local(iri.local()) {
        if let Some(p) = prefixes.iter().find(|p| p.namespace == iri.namespace()) {
            let _ = write!(out, "{}:{}", p.name, iri.local());
            return;
        }
    }
    let _ = write!(out, "<{iri}>");
}

fn write_expr(out: &mut String, e: &ClassExpression, prefixes: &[Prefix]) {
    match e {
        ClassExpression::Named(iri) => write_iri(out, iri, prefixes),
        ClassExpression::Intersection(ops) | ClassExpression::Union(ops) => {
            out.push_str(if matches!(e, ClassExpression::Intersection(_)) {
                "ObjectIntersectionOf("
            } else {
                "ObjectUnionOf("
            });
            for (i, op) in ops.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_expr(out, op, prefixes);
            }
            out.push(')');
        }
        ClassExpression::Some { property, filler } => {
            out.push_str("ObjectSomeValuesFrom(");
            write_iri(out, property, prefixes);
            out.push(' ');
            write_expr(out, filler, prefixes);
            out.push(')');
        }
    }
}

pub(super) fn render_axiom(axiom: &Axiom, prefixes: &[Prefix]) -> String {
    let mut out = String::new();
    match axiom {
        Axiom::Declaration { kind, entity } => {
            out.push_str(match kind {
                EntityKind::Class => "Declaration(Class(",
                EntityKind::ObjectProperty => "Declaration(ObjectProperty(",
            });
            write_iri(&mut out, entity, prefixes);
            out.push_str("))");
        }
        Axiom::SubClassOf { sub, sup } => {
            out.push_str("SubClassOf(");
            write_expr(&mut out, sub, prefixes);
            out.push(' ');
            write_expr(&mut out, sup, prefixes);
            out.push(')');
        }
        Axiom::EquivalentClasses { lhs, rhs } => {
            out.push_str("EquivalentClasses(");
            write_iri(&mut out, lhs, prefixes);
            out.push(' ');
            write_expr(&mut out, rhs, prefixes);
            out.push(')');
        }
        Axiom::Label { entity, text } => {
            out.push_str("AnnotationAssertion(rdfs:label ");
            write_iri(&mut out, entity, prefixes);
            out.push_str(" \"");
            for c in text.chars() {
                if matches!(c, '"' | '\\') {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push_str("\")");
        }
    }
    out
}

/// Renders `onto` as a canonical functional-syntax document: declarations,
/// labels, SubClassOf, then EquivalentClasses, each sorted by IRI.
pub fn serialize_ontology(onto: &Ontology) -> String {
    let mut prefixes = vec![Prefix {
        name: String::new(),
        namespace: onto.default_namespace().to_owned(),
    }];
    let mut named: Vec<&Prefix> = onto.prefixes().iter().filter(|p| !p.name.is_empty()).collect();
    named.sort_by(|a, b| a.name.cmp(&b.name));
    prefixes.extend(named.into_iter().cloned());

    let mut out = String::new();
    for p in &prefixes {
        let _ = writeln!(out, "Prefix({}:=<{}>)", p.name, p.namespace);
    }
    out.push('\n');
    match onto.ontology_iri() {
        Some(iri) => {
            let _ = writeln!(out, "Ontology(<{iri}>");
        }
        None => out.push_str("Ontology(\n"),
    }
    for axiom in onto.axioms() {
        out.push_str(&render_axiom(axiom, &prefixes));
        out.push('\n');
    }
    out.push_str(")\n");
    out
}
