//! Regenerates the scripted replay replies under `fixtures/replies/`.
//!
//! Usage: `cargo run --example build_replay_fixtures [fixtures-dir]`
//!
//! Replies are keyed by the fixture prompt's fingerprint, so they must be
//! rebuilt whenever the prompt template or the fixture vocabulary changes.

use std::path::PathBuf;

use ontodx::client::{ImageRef, ReplayStore};
use ontodx::eval::{Gold, Manifest};
use ontodx::prompt::build_prompt;
use ontodx::reasoner::VocabularyRoots;
use ontodx::{extract_vocabulary, parse_ontology};

const MODEL: &str = "gemini-1.0-pro-vision-001";

type Reply = (&'static str, &'static str, &'static str);

/// 19 of 20 correct; entry 7 reads the spot as a narrow lesion.
fn brown_spot(i: usize) -> Option<Reply> {
    const COLORS: [&str; 4] = ["Brown", "Dark Brown", "Reddish Brown", "brown"];
    const SHAPES: [&str; 2] = ["Oval", "Circular"];
    Some(if i == 7 {
        ("Lesion", "Brown", "Linear")
    } else {
        ("Spot", COLORS[i % 4], SHAPES[i % 2])
    })
}

/// 6 of 20 correct; entry 10 is prose without JSON.
fn narrow_brown_spot(i: usize) -> Option<Reply> {
    if i.is_multiple_of(3) && i < 18 {
        return Some(("Lesion", if i.is_multiple_of(2) { "Brown" } else { "Dark Brown" }, "Linear"));
    }
    if i == 10 {
        return None;
    }
    const WRONG: [Reply; 4] = [
        ("Spot", "Brown", "Linear"),
        ("Lesion", "YellowishBrown", "Linear"),
        ("Lesion", "Brown", "N/A"),
        ("Spot", "Brown", "Oval"),
    ];
    Some(WRONG[i % 4])
}

fn leaf_blast(i: usize) -> Option<Reply> {
    const WRONG: [Reply; 5] = [
        ("Spot", "Brown", "Oval"),
        ("Lesion", "Gray", "Eye"),
        ("Spot", "White", "Eye"),
        ("Spot", "Gray", "N/A"),
        ("Spot", "Gray", "Diamond"),
    ];
    Some(WRONG[i % 5])
}

fn leaf_scald(i: usize) -> Option<Reply> {
    const WRONG: [Reply; 5] = [
        ("Lesion", "Brown", "Linear"),
        ("Lesion", "YellowishBrown", "Zonate"),
        ("Lesion", "Brownish Yellow", "Oval"),
        ("Spot", "Brownish Yellow", "Zonate"),
        ("N/A", "Brownish Yellow", "N/A"),
    ];
    Some(WRONG[i % 5])
}

/// Every third healthy leaf is reported as green, the rest as all N/A.
fn healthy(i: usize) -> Option<Reply> {
    Some(if i.is_multiple_of(3) {
        ("N/A", "Green", "N/A")
    } else {
        ("N/A", "N/A", "N/A")
    })
}

fn render(i: usize, reply: Option<Reply>) -> String {
    let Some((symptom, color, shape)) = reply else {
        return "The image shows narrow brown streaks running along the leaf blade.\n".into();
    };
    let json = serde_json::json!({
        "SymptomAbnormality": symptom,
        "ColorAbnormality": color,
        "ShapeOfSymptomAbnormality": shape,
    });
    match i % 3 {
        0 => format!("{json}\n"),
        1 => format!(
            "Here is my analysis of the image:\n```json\n{}\n```\n",
            serde_json::to_string_pretty(&json).unwrap()
        ),
        _ => format!(
            "{}\nLet me know if you need anything else.\n",
            serde_json::to_string_pretty(&json).unwrap()
        ),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let onto = parse_ontology(&std::fs::read_to_string(dir.join("rice_disease.ofn"))?)?;
    let vocab = extract_vocabulary(&onto, &VocabularyRoots::conventional(&onto))?;
    let prompt = build_prompt("rice leaf", &vocab)?;
    let root = onto.iri("RiceDisease")?;
    let manifest = Manifest::load(&dir.join("manifest.jsonl"), &onto, &root)?;

    let replies = dir.join("replies");
    let model_dir = replies.join(MODEL);
    if model_dir.exists() {
        std::fs::remove_dir_all(&model_dir)?;
    }
    let store = ReplayStore::new(&replies);
    let mut seen = std::collections::BTreeMap::<String, usize>::new();
    for entry in &manifest.entries {
        let key = match &entry.gold_class {
            Gold::Healthy => "healthy".to_owned(),
            Gold::Disease(iri) => iri.local().to_owned(),
        };
        let counter = seen.entry(key.clone()).or_default();
        let i = *counter;
        *counter += 1;
        let reply = match key.as_str() {
            "BrownSpot" => brown_spot(i),
            "NarrowBrownSpot" => narrow_brown_spot(i),
            "LeafBlast" => leaf_blast(i),
            "LeafScald" => leaf_scald(i),
            "healthy" => healthy(i),
            other => return Err(format!("no script for {other}").into()),
        };
        let image = ImageRef::from_path(&entry.resolved_path)?;
        store.put(MODEL, &prompt.fingerprint, &image.content_hash, 0, &render(i, reply))?;
    }
    println!("wrote {} replies under {}", manifest.entries.len(), model_dir.display());
    Ok(())
}
