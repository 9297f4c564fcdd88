use std::collections::BTreeMap;

use super::lexer::{Lexer, Pos, Token};
use super::{Axiom, EntityKind, Ontology, OntologyError, Prefix, FALLBACK_NAMESPACE, PREDEFINED_PREFIXES, RDFS_LABEL};
use crate::expr::ClassExpression;
use crate::iri::Iri;

const MAX_NESTING: usize = 64;

/// OWL 2 keywords that are recognised but outside the supported subset.
const UNSUPPORTED: &[&str] = &[
    "Import",
    "Annotation",
    "DisjointClasses",
    "DisjointUnion",
    "SubObjectPropertyOf",
    "ObjectPropertyChain",
    "EquivalentObjectProperties",
    "DisjointObjectProperties",
    "InverseObjectProperties",
    "ObjectPropertyDomain",
    "ObjectPropertyRange",
    "FunctionalObjectProperty",
    "InverseFunctionalObjectProperty",
    "ReflexiveObjectProperty",
    "IrreflexiveObjectProperty",
    "SymmetricObjectProperty",
    "AsymmetricObjectProperty",
    "TransitiveObjectProperty",
    "SubDataPropertyOf",
    "EquivalentDataProperties",
    "DisjointDataProperties",
    "DataPropertyDomain",
    "DataPropertyRange",
    "FunctionalDataProperty",
    "DatatypeDefinition",
    "HasKey",
    "SameIndividual",
    "DifferentIndividuals",
    "ClassAssertion",
    "ObjectPropertyAssertion",
    "NegativeObjectPropertyAssertion",
    "DataPropertyAssertion",
    "NegativeDataPropertyAssertion",
    "SubAnnotationPropertyOf",
    "AnnotationPropertyDomain",
    "AnnotationPropertyRange",
    "ObjectComplementOf",
    "ObjectOneOf",
    "ObjectAllValuesFrom",
    "ObjectHasValue",
    "ObjectHasSelf",
    "ObjectMinCardinality",
    "ObjectMaxCardinality",
    "ObjectExactCardinality",
    "ObjectInverseOf",
    "DataSomeValuesFrom",
    "DataAllValuesFrom",
    "DataHasValue",
    "DataMinCardinality",
    "DataMaxCardinality",
    "DataExactCardinality",
    "DataProperty",
    "NamedIndividual",
    "AnnotationProperty",
    "Datatype",
];

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Token, Pos)>,
    prefixes: BTreeMap<String, String>,
    declared: Vec<Prefix>,
}

fn syntax(pos: Pos, expected: impl Into<String>) -> OntologyError {
    OntologyError::Syntax {
        line: pos.line,
        column: pos.column,
        expected: expected.into(),
    }
}

fn unsupported(pos: Pos, name: impl Into<String>) -> OntologyError {
    OntologyError::UnsupportedConstruct {
        name: name.into(),
        line: pos.line,
        column: pos.column,
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let prefixes = PREDEFINED_PREFIXES
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .chain(std::iter::once((String::new(), FALLBACK_NAMESPACE.to_owned())))
            .collect();
        Self {
            lexer: Lexer::new(text),
            peeked: None,
            prefixes,
            declared: Vec::new(),
        }
    }

    fn peek(&mut self) -> Result<&(Token, Pos), OntologyError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next_token()?);
        }
        Ok(self.peeked.as_ref().expect("filled"))
    }

    fn next(&mut self) -> Result<(Token, Pos), OntologyError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn expect(&mut self, want: Token) -> Result<Pos, OntologyError> {
        let (tok, pos) = self.next()?;
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("{} but found {}", want.describe(), tok.describe())))
        }
    }

    fn peek_is_keyword(&mut self, kw: &str) -> Result<bool, OntologyError> {
        Ok(matches!(&self.peek()?.0, Token::Keyword(k) if k == kw))
    }

    fn resolve(&self, tok: Token, pos: Pos) -> Result<Iri, OntologyError> {
        let full = match tok {
            Token::FullIri(full) => full,
            Token::Prefixed { prefix, local } => {
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| syntax(pos, format!("declared prefix `{prefix}:`")))?;
                if local.is_empty() {
                    return Err(syntax(pos, "local name after prefix"));
                }
                format!("{ns}{local}")
            }
            other => return Err(syntax(pos, format!("IRI but found {}", other.describe()))),
        };
        Iri::parse(&full).map_err(|e| syntax(pos, format!("absolute IRI ({e})")))
    }

    fn iri(&mut self) -> Result<Iri, OntologyError> {
        let (tok, pos) = self.next()?;
        self.resolve(tok, pos)
    }

    fn prefix_declaration(&mut self) -> Result<(), OntologyError> {
        self.next()?;
        self.expect(Token::Open)?;
        let (tok, pos) = self.next()?;
        let name = match tok {
            Token::Prefixed { prefix, local } if local.is_empty() => prefix,
            other => return Err(syntax(pos, format!("prefix name but found {}", other.describe()))),
        };
        self.expect(Token::Equals)?;
        let (tok, pos) = self.next()?;
        let Token::FullIri(ns) = tok else {
            return Err(syntax(pos, format!("namespace IRI but found {}", tok.describe())));
        };
        if !ns.contains(':') {
            return Err(syntax(pos, "absolute namespace IRI"));
        }
        self.expect(Token::Close)?;
        self.prefixes.insert(name.clone(), ns.clone());
        self.declared.retain(|p| p.name != name);
        self.declared.push(Prefix { name, namespace: ns });
        Ok(())
    }

    fn document(&mut self) -> Result<(Option<String>, Vec<Axiom>), OntologyError> {
        while self.peek_is_keyword("Prefix")? {
            self.prefix_declaration()?;
        }
        let mut axioms = Vec::new();
        let mut ontology_iri = None;
        if self.peek_is_keyword("Ontology")? {
            self.next()?;
            self.expect(Token::Open)?;
            if matches!(self.peek()?.0, Token::FullIri(_) | Token::Prefixed { .. }) {
                ontology_iri = Some(self.iri()?.full());
                if matches!(self.peek()?.0, Token::FullIri(_) | Token::Prefixed { .. }) {
                    // version IRI
                    self.iri()?;
                }
            }
            while !matches!(self.peek()?.0, Token::Close) {
                axioms.push(self.axiom()?);
            }
            self.next()?;
        } else {
            while !matches!(self.peek()?.0, Token::Eof) {
                axioms.push(self.axiom()?);
            }
        }
        self.expect(Token::Eof)?;
        Ok((ontology_iri, axioms))
    }

    fn axiom(&mut self) -> Result<Axiom, OntologyError> {
        let (tok, pos) = self.next()?;
        let Token::Keyword(kw) = tok else {
            return Err(syntax(pos, format!("axiom but found {}", tok.describe())));
        };
        if UNSUPPORTED.contains(&kw.as_str()) {
            return Err(unsupported(pos, kw));
        }
        self.expect(Token::Open)?;
        if self.peek_is_keyword("Annotation")? {
            let pos = self.peek()?.1;
            return Err(unsupported(pos, "Annotation"));
        }
        let axiom = match kw.as_str() {
            "Declaration" => {
                let (tok, kpos) = self.next()?;
                let kind = match tok {
                    Token::Keyword(k) if k == "Class" => EntityKind::Class,
                    Token::Keyword(k) if k == "ObjectProperty" => EntityKind::ObjectProperty,
                    Token::Keyword(k) if UNSUPPORTED.contains(&k.as_str()) => return Err(unsupported(kpos, k)),
                    other => return Err(syntax(kpos, format!("entity kind but found {}", other.describe()))),
                };
                self.expect(Token::Open)?;
                let entity = self.entity_iri()?;
                self.expect(Token::Close)?;
                Axiom::Declaration { kind, entity }
            }
            "SubClassOf" => {
                let sub = self.class_expression(0)?;
                let sup = self.class_expression(0)?;
                Axiom::SubClassOf { sub, sup }
            }
            "EquivalentClasses" => {
                let first = self.class_expression(0)?;
                let second = self.class_expression(0)?;
                if !matches!(self.peek()?.0, Token::Close) {
                    let pos = self.peek()?.1;
                    return Err(unsupported(pos, "EquivalentClasses with more than two operands"));
                }
                match (first, second) {
                    (ClassExpression::Named(lhs), rhs) => Axiom::EquivalentClasses { lhs, rhs },
                    (rhs, ClassExpression::Named(lhs)) => Axiom::EquivalentClasses { lhs, rhs },
                    _ => return Err(unsupported(pos, "EquivalentClasses without a named class")),
                }
            }
            "AnnotationAssertion" => {
                let (tok, ppos) = self.next()?;
                let property = self.resolve(tok, ppos)?;
                if property.full() != RDFS_LABEL {
                    return Err(unsupported(ppos, format!("AnnotationAssertion({})", property.local())));
                }
                let entity = self.iri()?;
                let (tok, lpos) = self.next()?;
                let Token::Literal(text) = tok else {
                    return Err(syntax(lpos, format!("label literal but found {}", tok.describe())));
                };
                if text.trim().is_empty() {
                    return Err(syntax(lpos, "non-empty label"));
                }
                Axiom::Label { entity, text }
            }
            other => return Err(syntax(pos, format!("axiom keyword but found `{other}`"))),
        };
        self.expect(Token::Close)?;
        Ok(axiom)
    }

    fn entity_iri(&mut self) -> Result<Iri, OntologyError> {
        let (tok, pos) = self.next()?;
        let iri = self.resolve(tok, pos)?;
        if iri.namespace() == PREDEFINED_PREFIXES[0].1 {
            return Err(unsupported(pos, format!("owl:{}", iri.local())));
        }
        Ok(iri)
    }

    fn class_expression(&mut self, depth: usize) -> Result<ClassExpression, OntologyError> {
        let (tok, pos) = self.next()?;
        if depth > MAX_NESTING {
            return Err(syntax(pos, format!("nesting depth at most {MAX_NESTING}")));
        }
        let kw = match tok {
            Token::Keyword(kw) => kw,
            tok @ (Token::FullIri(_) | Token::Prefixed { .. }) => {
                self.peeked = Some((tok, pos));
                return Ok(ClassExpression::Named(self.entity_iri()?));
            }
            other => return Err(syntax(pos, format!("class expression but found {}", other.describe()))),
        };
        if UNSUPPORTED.contains(&kw.as_str()) {
            return Err(unsupported(pos, kw));
        }
        let expr = match kw.as_str() {
            "ObjectIntersectionOf" | "ObjectUnionOf" => {
                self.expect(Token::Open)?;
                let mut ops = vec![self.class_expression(depth + 1)?, self.class_expression(depth + 1)?];
                while !matches!(self.peek()?.0, Token::Close) {
                    ops.push(self.class_expression(depth + 1)?);
                }
                if kw == "ObjectIntersectionOf" {
                    ClassExpression::and(ops)
                } else {
                    ClassExpression::or(ops)
                }
            }
            "ObjectSomeValuesFrom" => {
                self.expect(Token::Open)?;
                let (ptok, ppos) = self.next()?;
                if let Token::Keyword(k) = &ptok {
                    if UNSUPPORTED.contains(&k.as_str()) {
                        return Err(unsupported(ppos, k.clone()));
                    }
                }
                let property = self.resolve(ptok, ppos)?;
                let filler = self.class_expression(depth + 1)?;
                ClassExpression::some(property, filler)
            }
            other => return Err(syntax(pos, format!("class expression but found `{other}`"))),
        };
        self.expect(Token::Close)?;
        Ok(expr)
    }
}

/// Parses a functional-syntax document into a validated [`Ontology`].
pub fn parse_ontology(text: &str) -> Result<Ontology, OntologyError> {
    let mut parser = Parser::new(text);
    let (iri, axioms) = parser.document()?;
    Ontology::new(parser.declared, iri, axioms)
}

/// Parses a single class expression using `onto`'s prefixes. Entities are
/// not checked against the ontology's declarations.
pub fn parse_class_expression(text: &str, onto: &Ontology) -> Result<ClassExpression, OntologyError> {
    let mut parser = Parser::new(text);
    for p in onto.prefixes() {
        parser.prefixes.insert(p.name.clone(), p.namespace.clone());
    }
    let expr = parser.class_expression(0)?;
    parser.expect(Token::Eof)?;
    Ok(expr)
}
