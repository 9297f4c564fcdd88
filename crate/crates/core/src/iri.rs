use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("IRI `{0}` has an empty local name")]
    EmptyLocal(String),
    #[error("IRI `{0}` is not absolute")]
    NotAbsolute(String),
    #[error("IRI `{0}` contains whitespace")]
    Whitespace(String),
}

/// An entity name: an absolute namespace plus a local identifier.
///
/// The split point is always the last `#` or `/` of the full form, so two
/// IRIs are equal exactly when their full forms are.
#[derive(Clone)]
pub struct Iri {
    namespace: String,
    local: String,
}

impl Iri {
    pub fn new(namespace: &str, local: &str) -> Result<Self, IriError> {
        Self::parse(&format!("{namespace}{local}"))
    }

    /// Splits a full IRI at its last `#` or `/`.
    pub fn parse(full: &str) -> Result<Self, IriError> {
        if full.chars().any(char::is_whitespace) {
            return Err(IriError::Whitespace(full.to_owned()));
        }
        let scheme_end = full.find(':').ok_or_else(|| IriError::NotAbsolute(full.to_owned()))?;
        if scheme_end == 0
            || !full[..scheme_end]
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
        {
            return Err(IriError::NotAbsolute(full.to_owned()));
        }
        let split = full.rfind(['#', '/']).map(|i| i + 1).unwrap_or(scheme_end + 1);
        let (namespace, local) = full.split_at(split);
        if local.is_empty() {
            return Err(IriError::EmptyLocal(full.to_owned()));
        }
        Ok(Self {
            namespace: namespace.to_owned(),
            local: local.to_owned(),
        })
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    pub fn local(&self) -> &str {
        &self.local
    }

    pub fn full(&self) -> String {
        format!("{}{}", self.namespace, self.local)
    }

    fn bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.namespace.bytes().chain(self.local.bytes())
    }
}

impl PartialEq for Iri {
    fn eq(&self, other: &Self) -> bool {
        // Canonical split makes field-wise comparison equivalent to full-form comparison.
        self.namespace == other.namespace && self.local == other.local
    }
}

impl Eq for Iri {}

impl Hash for Iri {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.namespace.hash(state);
        self.local.hash(state);
    }
}

impl Ord for Iri {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bytes().cmp(other.bytes())
    }
}

impl PartialOrd for Iri {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}{}>", self.namespace, self.local)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.namespace, self.local)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Iri::parse(&s).map_err(serde::de::Error::custom)
    }
}
