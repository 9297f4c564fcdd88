//! Random small ontologies and expressions for oracle comparison.
//!
//! TBoxes are acyclic (class `i` only mentions classes `j > i`) and
//! definitorial: every class is either defined by one equivalence, given
//! subclass axioms, or left bare.

use ontodx::owl::Prefix;
use ontodx::{Axiom, ClassExpression, EntityKind, Iri, Ontology};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const NS: &str = "http://example.org/gen#";

pub struct Instance {
    pub onto: Ontology,
    pub classes: Vec<Iri>,
    pub properties: Vec<Iri>,
    /// Classes whose unfolding through told ancestors never meets a union.
    pub union_free: Vec<Iri>,
}

fn iri(local: &str) -> Iri {
    Iri::new(NS, local).unwrap()
}

pub fn expression<R: Rng>(rng: &mut R, classes: &[Iri], properties: &[Iri], depth: usize, unions: bool) -> ClassExpression {
    let n = if rng.random_bool(0.6) { 1 } else { rng.random_range(2..=3) };
    ClassExpression::and((0..n).map(|_| atom(rng, classes, properties, depth, unions)))
}

/// A named class, an existential, or (when allowed) a binary union.
fn atom<R: Rng>(rng: &mut R, classes: &[Iri], properties: &[Iri], depth: usize, unions: bool) -> ClassExpression {
    let roll: f64 = rng.random();
    if depth == 0 || roll < 0.4 {
        ClassExpression::Named(classes.choose(rng).unwrap().clone())
    } else if roll < 0.8 || !unions {
        let p = properties.choose(rng).unwrap().clone();
        ClassExpression::some(p, expression(rng, classes, properties, depth - 1, unions))
    } else {
        ClassExpression::or((0..2).map(|_| atom(rng, classes, properties, depth - 1, unions)))
    }
}

pub fn instance<R: Rng>(rng: &mut R) -> Instance {
    let n_classes = rng.random_range(2..=6);
    let n_props = rng.random_range(1..=2);
    let classes: Vec<Iri> = (0..n_classes).map(|i| iri(&format!("C{i}"))).collect();
    let properties: Vec<Iri> = (0..n_props).map(|i| iri(&format!("r{i}"))).collect();
    let mut axioms: Vec<Axiom> = classes
        .iter()
        .map(|c| Axiom::Declaration {
            kind: EntityKind::Class,
            entity: c.clone(),
        })
        .chain(properties.iter().map(|p| Axiom::Declaration {
            kind: EntityKind::ObjectProperty,
            entity: p.clone(),
        }))
        .collect();
    for i in 0..n_classes {
        let later = &classes[i + 1..];
        if later.is_empty() {
            break;
        }
        let roll: f64 = rng.random();
        if roll < 0.4 {
            let depth = rng.random_range(1..=2);
            axioms.push(Axiom::EquivalentClasses {
                lhs: classes[i].clone(),
                rhs: expression(rng, later, &properties, depth, true),
            });
        } else if roll < 0.75 {
            for _ in 0..rng.random_range(1..=2) {
                let sup = if rng.random_bool(0.5) {
                    ClassExpression::Named(later.choose(rng).unwrap().clone())
                } else {
                    let depth = rng.random_range(1..=2);
                    expression(rng, later, &properties, depth, true)
                };
                axioms.push(Axiom::SubClassOf {
                    sub: ClassExpression::Named(classes[i].clone()),
                    sup,
                });
            }
        }
    }
    let prefixes = vec![Prefix {
        name: String::new(),
        namespace: NS.into(),
    }];
    let onto = Ontology::new(prefixes, None, axioms).expect("generated ontologies are valid");
    let mut union_free: Vec<Iri> = Vec::new();
    for c in classes.iter().rev() {
        let clean = onto.ancestors(c).unwrap().iter().all(|a| {
            let info = onto.class(a).unwrap();
            info.definition
                .iter()
                .chain(info.restrictions.iter())
                .all(|e| !e.contains_union() && e.classes().iter().all(|n| union_free.contains(n)))
        });
        if clean {
            union_free.push(c.clone());
        }
    }
    union_free.reverse();
    Instance {
        onto,
        classes,
        properties,
        union_free,
    }
}

/// A superclass candidate: usually a weakening of `sub`, sometimes unrelated.
pub fn superclass<R: Rng>(rng: &mut R, inst: &Instance, sub: &ClassExpression) -> ClassExpression {
    let roll: f64 = rng.random();
    if roll < 0.35 {
        weaken(rng, inst, sub, 2)
    } else if roll < 0.55 {
        ClassExpression::Named(inst.classes.choose(rng).unwrap().clone())
    } else {
        let depth = rng.random_range(1..=2);
        expression(rng, &inst.classes, &inst.properties, depth, true)
    }
}

fn told_supers(inst: &Instance, c: &Iri) -> Vec<ClassExpression> {
    inst.onto
        .axioms()
        .iter()
        .filter_map(|a| match a {
            Axiom::SubClassOf {
                sub: ClassExpression::Named(s),
                sup,
            } if s == c => Some(sup.clone()),
            Axiom::EquivalentClasses { lhs, rhs } if lhs == c => Some(rhs.clone()),
            _ => None,
        })
        .collect()
}

/// Keeps the existential depth within `budget`.
fn weaken<R: Rng>(rng: &mut R, inst: &Instance, e: &ClassExpression, budget: usize) -> ClassExpression {
    match e {
        ClassExpression::Named(c) => {
            let mut supers = told_supers(inst, c);
            supers.retain(|s| s.depth() <= budget);
            if !supers.is_empty() && rng.random_bool(0.5) {
                supers.choose(rng).unwrap().clone()
            } else if rng.random_bool(0.2) {
                ClassExpression::or([e.clone(), ClassExpression::Named(inst.classes.choose(rng).unwrap().clone())])
            } else {
                e.clone()
            }
        }
        ClassExpression::Intersection(ops) => {
            let mut kept = Vec::new();
            for op in ops {
                if rng.random_bool(0.7) {
                    kept.push(weaken(rng, inst, op, budget));
                }
            }
            if kept.is_empty() {
                weaken(rng, inst, &ops[0], budget)
            } else {
                ClassExpression::and(kept)
            }
        }
        ClassExpression::Union(ops) => ClassExpression::or(ops.iter().map(|op| weaken(rng, inst, op, budget))),
        ClassExpression::Some { property, filler } => {
            ClassExpression::some(property.clone(), weaken(rng, inst, filler, budget.saturating_sub(1)))
        }
    }
}

const LABEL_PIECES: &[&str] = &[
    "Spot",
    "dark brown",
    "Zonate",
    "say \"hi\"",
    "back\\slash",
    "Grün",
    "eye-shaped",
    "N A",
    "x_y",
    " ",
];

/// An instance with random `rdfs:label`s (quotes, backslashes and non-ASCII
/// included), unique after normalization, plus an optional ontology IRI.
pub fn labelled<R: Rng>(rng: &mut R) -> Ontology {
    let inst = instance(rng);
    let mut axioms = inst.onto.axioms().to_vec();
    for (i, c) in inst.classes.iter().enumerate() {
        if rng.random_bool(0.6) {
            let piece = LABEL_PIECES.choose(rng).unwrap();
            axioms.push(Axiom::Label {
                entity: c.clone(),
                text: format!("{piece} {i}"),
            });
        }
    }
    let prefixes = vec![Prefix {
        name: String::new(),
        namespace: NS.into(),
    }];
    let iri = rng.random_bool(0.5).then(|| "http://example.org/gen".to_owned());
    Ontology::new(prefixes, iri, axioms).expect("labels are unique after normalization")
}

const TOKENS: &[&str] = &[
    "(",
    ")",
    "((((",
    "))",
    "\"",
    "\\",
    "<",
    ">",
    ":",
    "#",
    "\n",
    " ",
    "<http://example.org/x#Q>",
    ":Spot",
    ":nope",
    "Prefix(",
    "Ontology(",
    "ObjectUnionOf(",
    "ObjectIntersectionOf(",
    "ObjectSomeValuesFrom(",
    "ObjectAllValuesFrom(",
    "SubClassOf(",
    "EquivalentClasses(",
    "Declaration(Class(",
    "AnnotationAssertion(rdfs:label ",
    "\u{feff}",
    "é",
    "\u{0}",
];

/// One to four random edits of `text`: deletions, duplications, token
/// insertions and span swaps, all on char boundaries.
pub fn mutate<R: Rng>(rng: &mut R, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.random_range(1..=4) {
        let n = chars.len();
        let at = rng.random_range(0..=n);
        let len = rng.random_range(0..=(n - at).min(40));
        match rng.random_range(0..5) {
            0 => {
                chars.drain(at..at + len);
            }
            1 => {
                let span: Vec<char> = chars[at..at + len].to_vec();
                chars.splice(at..at, span);
            }
            2 => {
                let token = TOKENS.choose(rng).unwrap();
                chars.splice(at..at, token.chars());
            }
            3 => {
                if len > 0 {
                    let other = rng.random_range(0..n);
                    let b = chars[other];
                    chars[at] = b;
                }
            }
            _ => chars.truncate(at),
        }
    }
    chars.into_iter().collect()
}
