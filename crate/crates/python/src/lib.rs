//! Python bindings for the ontodx library.
//!
//! Structured results cross the boundary as JSON and come back as plain
//! dicts and lists. Every library error surfaces as `ValueError`.

use std::fmt::Display;

use ontodx::client::parse_observation;
use ontodx::owl::parse_class_expression;
use ontodx::prompt::build_prompt;
use ontodx::query::{build_query, QueryOutcome};
use ontodx::reasoner::VocabularyRoots;
use ontodx::{classify_expression, extract_vocabulary, is_subsumed, parse_ontology, serialize_ontology};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_error(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A parsed OWL functional-syntax ontology.
#[pyclass(name = "Ontology", module = "ontodx", frozen)]
struct PyOntology {
    inner: ontodx::Ontology,
}

#[pymethods]
impl PyOntology {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_ontology(text).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| value_error(format!("{}: {e}", path.display())))?;
        Self::new(&text)
    }

    /// Class labels in IRI order.
    fn classes(&self) -> Vec<String> {
        self.inner.classes().map(|(iri, _)| self.inner.label(iri)).collect()
    }

    fn serialize(&self) -> String {
        serialize_ontology(&self.inner)
    }

    /// Colors, symptoms, shapes and plant parts under the conventional roots.
    fn vocabulary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let vocab = extract_vocabulary(&self.inner, &VocabularyRoots::conventional(&self.inner)).map_err(value_error)?;
        to_py(py, &vocab)
    }

    /// Whether `sub` is subsumed by `sup`; both in functional syntax.
    fn is_subsumed(&self, sub: &str, sup: &str) -> PyResult<bool> {
        let sub = parse_class_expression(sub, &self.inner).map_err(value_error)?;
        let sup = parse_class_expression(sup, &self.inner).map_err(value_error)?;
        Ok(is_subsumed(&self.inner, &sub, &sup).map_err(value_error)?.holds)
    }

    fn __repr__(&self) -> String {
        format!("Ontology({} classes)", self.inner.classes().count())
    }
}

/// The prompt text and fingerprint for `entity`.
#[pyfunction(name = "build_prompt")]
#[pyo3(signature = (onto, entity = "rice leaf"))]
fn py_build_prompt<'py>(py: Python<'py>, onto: &PyOntology, entity: &str) -> PyResult<Bound<'py, PyAny>> {
    let vocab = extract_vocabulary(&onto.inner, &VocabularyRoots::conventional(&onto.inner)).map_err(value_error)?;
    to_py(py, &build_prompt(entity, &vocab).map_err(value_error)?)
}

/// The symptom, color and shape fields of a model reply.
#[pyfunction(name = "parse_observation")]
fn py_parse_observation<'py>(py: Python<'py>, reply: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &parse_observation(reply).map_err(value_error)?)
}

/// Builds the query for an observation and classifies it under `disease_root`.
///
/// Returns `{"healthy": True}` when every field is N/A, otherwise the query
/// in Manchester syntax and the matched disease labels.
#[pyfunction]
#[pyo3(signature = (onto, symptom, color, shape, plant_part = "Leaf", disease_root = "RiceDisease"))]
fn diagnose<'py>(
    py: Python<'py>,
    onto: &PyOntology,
    symptom: &str,
    color: &str,
    shape: &str,
    plant_part: &str,
    disease_root: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let onto = &onto.inner;
    let plant_part = onto.iri(plant_part).map_err(value_error)?;
    let root = onto.iri(disease_root).map_err(value_error)?;
    let obs = ontodx::client::Observation::new(symptom, color, shape);
    let result = match build_query(&obs, onto, &plant_part).map_err(value_error)? {
        QueryOutcome::HealthyFinding => serde_json::json!({"healthy": true}),
        QueryOutcome::Expression(query) => {
            let diagnosis = classify_expression(onto, &query, &root).map_err(value_error)?;
            serde_json::json!({
                "healthy": false,
                "query": query.manchester().to_string(),
                "matched": diagnosis.matched.iter().map(|d| onto.label(d)).collect::<Vec<_>>(),
            })
        }
    };
    to_py(py, &result)
}

#[pymodule]
#[pyo3(name = "ontodx")]
fn ontodx_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOntology>()?;
    m.add_function(wrap_pyfunction!(py_build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(py_parse_observation, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    Ok(())
}
