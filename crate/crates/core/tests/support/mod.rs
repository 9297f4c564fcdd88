#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

use ontodx::Ontology;

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(path)
}

pub fn rice() -> Ontology {
    let text = std::fs::read_to_string(fixture("rice_disease.ofn")).unwrap();
    ontodx::parse_ontology(&text).unwrap()
}
