//! Structural subsumption over unfolded descriptions.
//!
//! The subclass side is unfolded into disjunctive normal form: each branch
//! is a tree of named classes and existential edges, with every told
//! ancestor's definition and restrictions merged in. The superclass side is
//! matched against each branch by the structural rules, unfolding defined
//! names on demand.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::expr::ClassExpression;
use crate::iri::Iri;
use crate::owl::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Desc {
    names: BTreeSet<Iri>,
    edges: BTreeSet<(Iri, Desc)>,
}

impl Desc {
    fn merge(&self, other: &Desc) -> Desc {
        Desc {
            names: self.names.union(&other.names).cloned().collect(),
            edges: self.edges.union(&other.edges).cloned().collect(),
        }
    }

    fn to_expression(&self) -> Option<ClassExpression> {
        let mut parts: Vec<ClassExpression> = self.names.iter().cloned().map(ClassExpression::Named).collect();
        for (property, child) in &self.edges {
            // An empty filler would be owl:Thing, which is outside the subset.
            if let Some(filler) = child.to_expression() {
                parts.push(ClassExpression::some(property.clone(), filler));
            }
        }
        (!parts.is_empty()).then(|| ClassExpression::and(parts))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Every conjunct of the superclass must hold.
    Conjunction,
    /// A named superclass is a told ancestor of a named class in the query.
    Named,
    /// An existential is matched by a query existential on the same property.
    Existential,
    /// Some disjunct of the superclass holds.
    Union,
    /// A defined superclass is replaced by its definition.
    Unfold,
    /// A named superclass holds because a defined told subclass of it does.
    Descendant,
    /// The unfolded query has several disjunctive branches; each must hold.
    CaseSplit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Proof {
    pub rule: Rule,
    pub goal: ClassExpression,
    pub witness: Option<ClassExpression>,
    pub holds: bool,
    pub children: Vec<Proof>,
}

pub(crate) struct Structural<'a> {
    onto: &'a Ontology,
    expansions: RefCell<BTreeMap<Iri, Vec<Desc>>>,
}

/// Upper bound on disjunctive branches of an unfolded query.
pub(crate) const MAX_BRANCHES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct TooManyBranches;

fn product(left: Vec<Desc>, right: &[Desc]) -> Result<Vec<Desc>, TooManyBranches> {
    if left.len() * right.len() > MAX_BRANCHES {
        return Err(TooManyBranches);
    }
    let mut out: Vec<Desc> = Vec::with_capacity(left.len() * right.len());
    for l in &left {
        for r in right {
            let merged = l.merge(r);
            if !out.contains(&merged) {
                out.push(merged);
            }
        }
    }
    Ok(out)
}

impl<'a> Structural<'a> {
    pub fn new(onto: &'a Ontology) -> Self {
        Self {
            onto,
            expansions: RefCell::new(BTreeMap::new()),
        }
    }

    /// DNF branches of the fully unfolded expression. Terminates because
    /// the ontology's definition graph is acyclic.
    pub fn unfold(&self, expr: &ClassExpression) -> Result<Vec<Desc>, TooManyBranches> {
        Ok(match expr {
            ClassExpression::Named(iri) => self.expand_name(iri)?,
            ClassExpression::Intersection(ops) => {
                let mut acc = vec![Desc {
                    names: BTreeSet::new(),
                    edges: BTreeSet::new(),
                }];
                for op in ops {
                    acc = product(acc, &self.unfold(op)?)?;
                }
                acc
            }
            ClassExpression::Union(ops) => {
                let mut out = Vec::new();
                for op in ops {
                    for branch in self.unfold(op)? {
                        if !out.contains(&branch) {
                            out.push(branch);
                        }
                    }
                }
                if out.len() > MAX_BRANCHES {
                    return Err(TooManyBranches);
                }
                out
            }
            ClassExpression::Some { property, filler } => self
                .unfold(filler)?
                .into_iter()
                .map(|child| Desc {
                    names: BTreeSet::new(),
                    edges: BTreeSet::from([(property.clone(), child)]),
                })
                .collect(),
        })
    }

    fn expand_name(&self, iri: &Iri) -> Result<Vec<Desc>, TooManyBranches> {
        if let Some(cached) = self.expansions.borrow().get(iri) {
            return Ok(cached.clone());
        }
        let mut acc = vec![Desc {
            names: BTreeSet::from([iri.clone()]),
            edges: BTreeSet::new(),
        }];
        if let Some(ancestors) = self.onto.ancestors(iri) {
            for ancestor in ancestors {
                let info = self.onto.class(ancestor).expect("ancestors are declared");
                for expr in info.definition.iter().chain(info.restrictions.iter()) {
                    acc = product(acc, &self.unfold(expr)?)?;
                }
            }
        }
        self.expansions.borrow_mut().insert(iri.clone(), acc.clone());
        Ok(acc)
    }

    pub fn prove(&self, sub: &ClassExpression, sup: &ClassExpression) -> Result<Proof, TooManyBranches> {
        let branches = self.unfold(sub)?;
        let mut active = Vec::new();
        if let [single] = branches.as_slice() {
            return Ok(self.check(single, sup, &mut active));
        }
        let children: Vec<Proof> = branches.iter().map(|b| self.check(b, sup, &mut active)).collect();
        Ok(Proof {
            rule: Rule::CaseSplit,
            goal: sup.clone(),
            witness: Some(sub.clone()),
            holds: children.iter().all(|c| c.holds),
            children,
        })
    }

    fn has_told<'d>(&self, desc: &'d Desc, target: &Iri) -> Option<&'d Iri> {
        desc.names
            .iter()
            .find(|n| self.onto.ancestors(n).is_some_and(|a| a.contains(target)))
    }

    fn check(&self, desc: &Desc, goal: &ClassExpression, active: &mut Vec<(*const Desc, Iri)>) -> Proof {
        match goal {
            ClassExpression::Named(target) => {
                if let Some(n) = self.has_told(desc, target) {
                    return Proof {
                        rule: Rule::Named,
                        goal: goal.clone(),
                        witness: Some(ClassExpression::Named(n.clone())),
                        holds: true,
                        children: Vec::new(),
                    };
                }
                let key = (desc as *const Desc, target.clone());
                if active.contains(&key) {
                    return Proof {
                        rule: Rule::Named,
                        goal: goal.clone(),
                        witness: desc.to_expression(),
                        holds: false,
                        children: Vec::new(),
                    };
                }
                active.push(key);
                let result = self.check_named(desc, goal, target, active);
                active.pop();
                result
            }
            ClassExpression::Intersection(ops) => {
                let children: Vec<Proof> = ops.iter().map(|op| self.check(desc, op, active)).collect();
                Proof {
                    rule: Rule::Conjunction,
                    goal: goal.clone(),
                    witness: None,
                    holds: children.iter().all(|c| c.holds),
                    children,
                }
            }
            ClassExpression::Union(ops) => {
                let mut failures = Vec::new();
                for op in ops {
                    let p = self.check(desc, op, active);
                    if p.holds {
                        return Proof {
                            rule: Rule::Union,
                            goal: goal.clone(),
                            witness: p.witness.clone(),
                            holds: true,
                            children: vec![p],
                        };
                    }
                    failures.push(p);
                }
                Proof {
                    rule: Rule::Union,
                    goal: goal.clone(),
                    witness: desc.to_expression(),
                    holds: false,
                    children: failures,
                }
            }
            ClassExpression::Some { property, filler } => {
                let mut failures = Vec::new();
                for (p, child) in desc.edges.iter().filter(|(p, _)| p == property) {
                    let proof = self.check(child, filler, active);
                    let witness = child.to_expression().map(|f| ClassExpression::some(p.clone(), f));
                    if proof.holds {
                        return Proof {
                            rule: Rule::Existential,
                            goal: goal.clone(),
                            witness,
                            holds: true,
                            children: vec![proof],
                        };
                    }
                    failures.push(proof);
                }
                Proof {
                    rule: Rule::Existential,
                    goal: goal.clone(),
                    witness: None,
                    holds: false,
                    children: failures,
                }
            }
        }
    }

    fn check_named(&self, desc: &Desc, goal: &ClassExpression, target: &Iri, active: &mut Vec<(*const Desc, Iri)>) -> Proof {
        let mut children = Vec::new();
        if let Some(def) = self.onto.definition(target) {
            let p = self.check(desc, def, active);
            if p.holds {
                return Proof {
                    rule: Rule::Unfold,
                    goal: goal.clone(),
                    witness: p.witness.clone(),
                    holds: true,
                    children: vec![p],
                };
            }
            children.push(p);
        }
        if let Some(descendants) = self.onto.descendants(target) {
            for d in descendants.iter().filter(|d| *d != target) {
                if let Some(def) = self.onto.definition(d) {
                    let p = self.check(desc, def, active);
                    if p.holds {
                        return Proof {
                            rule: Rule::Descendant,
                            goal: goal.clone(),
                            witness: Some(ClassExpression::Named(d.clone())),
                            holds: true,
                            children: vec![p],
                        };
                    }
                }
            }
        }
        Proof {
            rule: if children.is_empty() { Rule::Named } else { Rule::Unfold },
            goal: goal.clone(),
            witness: desc.to_expression(),
            holds: false,
            children,
        }
    }
}
