//! Browser bindings for the consistency, scoring and overlap demos. Every
//! export takes plain strings and returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use termkit::consistency::{apply_both, apply_corpus_consistency, apply_dc, ConsistencyConfig};
use termkit::corpus::{Corpus, Document, GoldAnnotation, MatchConfig, PredictionSet};
use termkit::metrics::corpus_level_scores;
use termkit::overlap::{directional_overlap, symmetrized_overlap, EmbeddedPoint};

fn split_terms(line: &str) -> Vec<String> {
    line.split([',', ';'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Serialize)]
struct Span {
    start: usize,
    end: usize,
    surface: String,
}

#[derive(Serialize)]
struct DocView {
    id: String,
    text: String,
    terms: Vec<String>,
    spans: Vec<Span>,
}

#[derive(Serialize)]
struct ConsistencyView {
    documents: Vec<DocView>,
    promoted: Vec<String>,
    dc_added: usize,
}

/// `docs` holds one document per line; `terms` the predicted terms of the
/// matching line, comma separated.
pub fn consistency_json(
    docs: &str,
    terms: &str,
    dc: bool,
    cc: bool,
    threshold: f64,
) -> Result<String, String> {
    let texts: Vec<&str> = docs.lines().filter(|l| !l.trim().is_empty()).collect();
    let term_lines: Vec<&str> = terms.lines().collect();
    let documents = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("d{}", i + 1), *t))
        .collect();
    let corpus = Corpus::new("demo", documents).map_err(|e| e.to_string())?;
    let cfg =
        ConsistencyConfig::new(threshold, MatchConfig::default()).map_err(|e| e.to_string())?;
    let mut preds = PredictionSet::new();
    for (i, id) in corpus.ids().enumerate() {
        let list = term_lines
            .get(i)
            .map(|l| split_terms(l))
            .unwrap_or_default();
        preds.add_terms(id, list, &cfg.matching);
    }

    let (out, report) = match (dc, cc) {
        (true, true) => apply_both(&corpus, &preds, &cfg),
        (false, true) => apply_corpus_consistency(&corpus, &preds, &cfg),
        _ => apply_dc(&corpus, &preds, &cfg),
    }
    .map_err(|e| e.to_string())?;

    let view = ConsistencyView {
        documents: corpus
            .documents()
            .iter()
            .map(|d| DocView {
                id: d.id.clone(),
                text: d.text.clone(),
                terms: out.terms(&d.id).to_vec(),
                spans: out
                    .occurrences(&d.id)
                    .unwrap_or(&[])
                    .iter()
                    .map(|o| Span {
                        start: o.start,
                        end: o.end,
                        surface: o.surface.clone(),
                    })
                    .collect(),
            })
            .collect(),
        promoted: report.cc_promoted.iter().map(|p| p.term.clone()).collect(),
        dc_added: report.dc_added,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Corpus-level precision, recall and F1 of two term lists (one term per
/// line or comma separated).
pub fn score_json(gold: &str, predicted: &str) -> Result<String, String> {
    let cfg = MatchConfig::default();
    let terms = |s: &str| -> Vec<String> { s.lines().flat_map(split_terms).collect() };
    let gold = GoldAnnotation::with_term_list(terms(gold), Default::default(), &cfg)
        .map_err(|e| e.to_string())?;
    let mut preds = PredictionSet::new();
    preds.add_terms("demo", terms(predicted), &cfg);
    serde_json::to_string(&corpus_level_scores(&gold, &preds, &cfg)).map_err(|e| e.to_string())
}

/// Directional and symmetrized k-NN overlap of `points`, a JSON array of
/// `{dataset, id, vector}` objects.
pub fn overlap_json(points: &str, k: usize) -> Result<String, String> {
    let points: Vec<EmbeddedPoint> = serde_json::from_str(points).map_err(|e| e.to_string())?;
    let m = directional_overlap(&points, k).map_err(|e| e.to_string())?;
    let s = symmetrized_overlap(&m).map_err(|e| e.to_string())?;
    serde_json::to_string(&serde_json::json!({
        "datasets": m.datasets,
        "sizes": m.sizes,
        "k": m.k,
        "directional": m.values,
        "symmetrized": s,
    }))
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn consistency(
    docs: &str,
    terms: &str,
    dc: bool,
    cc: bool,
    threshold: f64,
) -> Result<String, JsError> {
    consistency_json(docs, terms, dc, cc, threshold).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn score(gold: &str, predicted: &str) -> Result<String, JsError> {
    score_json(gold, predicted).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn overlap(points: &str, k: usize) -> Result<String, JsError> {
    overlap_json(points, k).map_err(|e| JsError::new(&e))
}
