//! Brute-force subsumption oracle: builds every canonical model of the
//! subclass expression under the TBox by a disjunctive restricted chase,
//! then model-checks the superclass at the root.
//!
//! Works from the raw axiom list only, so it shares nothing with the
//! structural reasoner beyond the expression type.

use std::collections::BTreeSet;

use ontodx::{Axiom, ClassExpression, Iri, Ontology};

const MAX_NODES: usize = 20_000;

#[derive(Clone, Debug, Default)]
struct Node {
    labels: BTreeSet<Iri>,
    edges: Vec<(Iri, usize)>,
}

#[derive(Clone, Debug, Default)]
struct Model {
    nodes: Vec<Node>,
}

impl Model {
    fn sat(&self, node: usize, e: &ClassExpression) -> bool {
        match e {
            ClassExpression::Named(c) => self.nodes[node].labels.contains(c),
            ClassExpression::Intersection(ops) => ops.iter().all(|op| self.sat(node, op)),
            ClassExpression::Union(ops) => ops.iter().any(|op| self.sat(node, op)),
            ClassExpression::Some { property, filler } => self.nodes[node]
                .edges
                .iter()
                .any(|(p, n)| p == property && self.sat(*n, filler)),
        }
    }

    /// Makes `e` true at `node`, branching on unions.
    fn assert(self, node: usize, e: &ClassExpression) -> Vec<Model> {
        if self.sat(node, e) {
            return vec![self];
        }
        match e {
            ClassExpression::Named(c) => {
                let mut m = self;
                m.nodes[node].labels.insert(c.clone());
                vec![m]
            }
            ClassExpression::Intersection(ops) => {
                let mut models = vec![self];
                for op in ops {
                    models = models.into_iter().flat_map(|m| m.assert(node, op)).collect();
                }
                models
            }
            ClassExpression::Union(ops) => ops.iter().flat_map(|op| self.clone().assert(node, op)).collect(),
            ClassExpression::Some { property, filler } => {
                let mut m = self;
                let fresh = m.nodes.len();
                assert!(fresh < MAX_NODES, "chase did not terminate");
                m.nodes.push(Node::default());
                m.nodes[node].edges.push((property.clone(), fresh));
                m.assert(fresh, filler)
            }
        }
    }
}

fn rules(onto: &Ontology) -> Vec<(ClassExpression, ClassExpression)> {
    let mut out = Vec::new();
    for axiom in onto.axioms() {
        match axiom {
            Axiom::SubClassOf { sub, sup } => out.push((sub.clone(), sup.clone())),
            Axiom::EquivalentClasses { lhs, rhs } => {
                let named = ClassExpression::Named(lhs.clone());
                out.push((named.clone(), rhs.clone()));
                out.push((rhs.clone(), named));
            }
            _ => {}
        }
    }
    out
}

fn chase(model: Model, rules: &[(ClassExpression, ClassExpression)], done: &mut Vec<Model>) {
    let mut pending = vec![model];
    while let Some(m) = pending.pop() {
        let violation = (0..m.nodes.len()).find_map(|n| {
            rules
                .iter()
                .find(|(lhs, rhs)| m.sat(n, lhs) && !m.sat(n, rhs))
                .map(|(_, rhs)| (n, rhs))
        });
        match violation {
            None => done.push(m),
            Some((n, rhs)) => {
                let rhs = rhs.clone();
                pending.extend(m.assert(n, &rhs));
            }
        }
    }
}

/// Whether `sub ⊑ sup` holds in every model of the ontology.
pub fn oracle_subsumed(onto: &Ontology, sub: &ClassExpression, sup: &ClassExpression) -> bool {
    let rules = rules(onto);
    let root = Model {
        nodes: vec![Node::default()],
    };
    let mut models = Vec::new();
    for start in root.assert(0, sub) {
        chase(start, &rules, &mut models);
    }
    models.iter().all(|m| m.sat(0, sup))
}
