use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::iri::Iri;

/// A description-logic concept built from named classes, conjunction,
/// disjunction and existential restriction.
///
/// Values built through [`ClassExpression::and`] and [`ClassExpression::or`]
/// are flattened: no operand of an intersection is itself an intersection,
/// and likewise for unions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassExpression {
    Named(Iri),
    Intersection(Vec<ClassExpression>),
    Union(Vec<ClassExpression>),
    Some { property: Iri, filler: Box<ClassExpression> },
}

impl ClassExpression {
    pub fn named(iri: Iri) -> Self {
        Self::Named(iri)
    }

    pub fn some(property: Iri, filler: ClassExpression) -> Self {
        Self::Some {
            property,
            filler: Box::new(filler),
        }
    }

    /// Conjunction of `operands`, flattening nested intersections.
    ///
    /// A single operand is returned bare. Panics on an empty operand list.
    pub fn and(operands: impl IntoIterator<Item = ClassExpression>) -> Self {
        let mut flat = Vec::new();
        for op in operands {
            match op {
                Self::Intersection(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => panic!("intersection needs at least one operand"),
            1 => flat.pop().unwrap(),
            _ => Self::Intersection(flat),
        }
    }

    /// Disjunction of `operands`, flattening nested unions.
    pub fn or(operands: impl IntoIterator<Item = ClassExpression>) -> Self {
        let mut flat = Vec::new();
        for op in operands {
            match op {
                Self::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => panic!("union needs at least one operand"),
            1 => flat.pop().unwrap(),
            _ => Self::Union(flat),
        }
    }

    pub fn as_named(&self) -> Option<&Iri> {
        match self {
            Self::Named(iri) => Some(iri),
            _ => None,
        }
    }

    /// Top-level conjuncts; a non-intersection is its own single conjunct.
    pub fn conjuncts(&self) -> &[ClassExpression] {
        match self {
            Self::Intersection(ops) => ops,
            other => std::slice::from_ref(other),
        }
    }

    pub fn contains_union(&self) -> bool {
        match self {
            Self::Named(_) => false,
            Self::Union(_) => true,
            Self::Intersection(ops) => ops.iter().any(Self::contains_union),
            Self::Some { filler, .. } => filler.contains_union(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Named(_) => 0,
            Self::Intersection(ops) | Self::Union(ops) => ops.iter().map(Self::depth).max().unwrap_or(0),
            Self::Some { filler, .. } => 1 + filler.depth(),
        }
    }

    /// Every class IRI mentioned anywhere in the expression.
    pub fn classes(&self) -> BTreeSet<&Iri> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Self::Named(iri) = e {
                out.insert(iri);
            }
        });
        out
    }

    /// Every property IRI mentioned anywhere in the expression.
    pub fn properties(&self) -> BTreeSet<&Iri> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Self::Some { property, .. } = e {
                out.insert(property);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ClassExpression)) {
        f(self);
        match self {
            Self::Named(_) => {}
            Self::Intersection(ops) | Self::Union(ops) => ops.iter().for_each(|op| op.visit(f)),
            Self::Some { filler, .. } => filler.visit(f),
        }
    }

    /// Manchester-style rendering with local names, e.g.
    /// `abnormalityGroup some (hasSymptom some Spot and hasColor some Brown)`.
    pub fn manchester(&self) -> Manchester<'_> {
        Manchester(self)
    }
}

pub struct Manchester<'a>(&'a ClassExpression);

impl fmt::Display for Manchester<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn nested(e: &ClassExpression, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                ClassExpression::Intersection(_) | ClassExpression::Union(_) => write!(f, "({})", Manchester(e)),
                _ => write!(f, "{}", Manchester(e)),
            }
        }
        match self.0 {
            ClassExpression::Named(iri) => f.write_str(iri.local()),
            ClassExpression::Intersection(ops) | ClassExpression::Union(ops) => {
                let sep = if matches!(self.0, ClassExpression::Intersection(_)) {
                    " and "
                } else {
                    " or "
                };
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    nested(op, f)?;
                }
                Ok(())
            }
            ClassExpression::Some { property, filler } => {
                write!(f, "{} some ", property.local())?;
                nested(filler, f)
            }
        }
    }
}

impl Serialize for ClassExpression {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.manchester())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(local: &str) -> ClassExpression {
        ClassExpression::Named(Iri::new("http://ex.org/#", local).unwrap())
    }

    fn p(local: &str) -> Iri {
        Iri::new("http://ex.org/#", local).unwrap()
    }

    #[test]
    fn and_flattens_nested_intersections() {
        let inner = ClassExpression::and([c("A"), c("B")]);
        let outer = ClassExpression::and([inner, c("C")]);
        assert_eq!(outer, ClassExpression::Intersection(vec![c("A"), c("B"), c("C")]));
        assert_eq!(ClassExpression::and([c("A")]), c("A"));
    }

    #[test]
    fn manchester_rendering() {
        let e = ClassExpression::some(
            p("abnormalityGroup"),
            ClassExpression::and([
                ClassExpression::some(p("hasSymptom"), c("Spot")),
                ClassExpression::some(p("hasShape"), ClassExpression::or([c("Oval"), c("Circular")])),
            ]),
        );
        assert_eq!(
            e.manchester().to_string(),
            "abnormalityGroup some (hasSymptom some Spot and hasShape some (Oval or Circular))"
        );
        assert_eq!(e.depth(), 2);
        assert!(e.contains_union());
    }
}
