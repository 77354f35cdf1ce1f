//! Precision, recall and F1 at corpus and document granularity, term
//! statistics, and Cohen's kappa.

mod kappa;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{GoldAnnotation, MatchConfig, PredictionSet, TermOccurrence};
use crate::error::{Error, Result};

pub use kappa::{cohens_kappa, KappaInput, KappaResult};
pub use stats::{median, term_statistics, TermStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    CorpusType,
    DocType,
    DocOccurrence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocMode {
    Type,
    #[default]
    Occurrence,
}

/// Matched / predicted / gold counts for one scoring unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Counts {
    /// `(P, R, F1)`. Both sides empty scores `(1, 1, 1)`; exactly one side
    /// empty scores `(0, 0, 0)`. F1 is computed as `2m / (p + g)`, which
    /// equals the harmonic mean of P and R.
    pub fn scores(&self) -> (f64, f64, f64) {
        match (self.predicted, self.gold) {
            (0, 0) => (1.0, 1.0, 1.0),
            (0, _) | (_, 0) => (0.0, 0.0, 0.0),
            (p, g) => {
                let m = self.matched as f64;
                (m / p as f64, m / g as f64, 2.0 * m / (p + g) as f64)
            }
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocScores {
    pub doc_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrfReport {
    pub granularity: Granularity,
    pub precision: f64,
    pub recall: f64,
    /// Harmonic mean of `precision` and `recall`.
    pub f1: f64,
    /// `|recall - precision|`.
    pub gap: f64,
    /// Document level only: arithmetic mean of the per-document F1 values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    /// Corpus level only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_doc: Option<Vec<DocScores>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Pooled scoring: the union of predicted terms against the corpus gold list.
pub fn corpus_level_scores(
    gold: &GoldAnnotation,
    preds: &PredictionSet,
    cfg: &MatchConfig,
) -> PrfReport {
    let gold_set: BTreeSet<String> = gold.corpus_terms.iter().map(|t| cfg.normalize(t)).collect();
    let pred_set: BTreeSet<String> = preds
        .per_doc_terms
        .values()
        .flatten()
        .map(|t| cfg.normalize(t))
        .filter(|t| !t.is_empty())
        .collect();
    let counts = Counts {
        matched: pred_set.intersection(&gold_set).count(),
        predicted: pred_set.len(),
        gold: gold_set.len(),
    };
    let (precision, recall, f1) = counts.scores();
    let mut flags = Vec::new();
    if counts.gold == 0 && counts.predicted > 0 {
        flags.push("empty gold term set with nonempty predictions".to_string());
    }
    PrfReport {
        granularity: Granularity::CorpusType,
        precision,
        recall,
        f1,
        gap: (recall - precision).abs(),
        macro_f1: None,
        counts: Some(counts),
        per_doc: None,
        flags,
    }
}

/// Matches predicted spans to gold spans by exact `[start, end)` equality,
/// each gold span consumed at most once.
pub fn match_occurrences(gold: &[TermOccurrence], predicted: &[TermOccurrence]) -> Counts {
    let mut available: HashMap<(usize, usize), usize> = HashMap::new();
    for g in gold {
        *available.entry(g.span()).or_default() += 1;
    }
    let mut ordered: Vec<&TermOccurrence> = predicted.iter().collect();
    ordered.sort_by_key(|o| o.span());
    let matched = ordered
        .into_iter()
        .filter(|p| match available.get_mut(&p.span()) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count();
    Counts {
        matched,
        predicted: predicted.len(),
        gold: gold.len(),
    }
}

fn type_counts(
    gold: &[TermOccurrence],
    predicted: &[String],
    cfg: &MatchConfig,
) -> Counts {
    let gold_set: BTreeSet<String> = gold.iter().map(|o| cfg.normalize(&o.surface)).collect();
    let pred_set: BTreeSet<String> = predicted
        .iter()
        .map(|t| cfg.normalize(t))
        .filter(|t| !t.is_empty())
        .collect();
    Counts {
        matched: pred_set.intersection(&gold_set).count(),
        predicted: pred_set.len(),
        gold: gold_set.len(),
    }
}

/// Per-document scoring followed by an unweighted macro average.
///
/// `docs` fixes the set and order of documents; when `None`, the union of
/// documents named by gold and predictions is used, in id order.
pub fn document_level_scores(
    gold: &BTreeMap<String, Vec<TermOccurrence>>,
    preds: &PredictionSet,
    mode: DocMode,
    cfg: &MatchConfig,
    docs: Option<&[String]>,
) -> Result<PrfReport> {
    if mode == DocMode::Occurrence && preds.per_doc_occurrences.is_none() {
        return Err(Error::MissingSpans);
    }
    let universe: Vec<String> = match docs {
        Some(docs) => docs.to_vec(),
        None => {
            let mut ids: BTreeSet<&str> = gold.keys().map(String::as_str).collect();
            ids.extend(preds.doc_ids());
            ids.into_iter().map(str::to_string).collect()
        }
    };

    let per_doc: Vec<DocScores> = universe
        .into_iter()
        .map(|doc_id| {
            let gold_occ = gold.get(&doc_id).map(Vec::as_slice).unwrap_or(&[]);
            let counts = match mode {
                DocMode::Type => type_counts(gold_occ, preds.terms(&doc_id), cfg),
                DocMode::Occurrence => {
                    match_occurrences(gold_occ, preds.occurrences(&doc_id).unwrap_or(&[]))
                }
            };
            let (precision, recall, f1) = counts.scores();
            DocScores {
                doc_id,
                precision,
                recall,
                f1,
                counts,
            }
        })
        .collect();

    let n = per_doc.len();
    let mean = |f: fn(&DocScores) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_doc.iter().map(f).fold(0.0, |acc, v| acc + v) / n as f64
        }
    };
    let precision = mean(|d| d.precision);
    let recall = mean(|d| d.recall);
    let macro_f1 = mean(|d| d.f1);
    let mut flags = Vec::new();
    if n == 0 {
        flags.push("no documents to score".to_string());
    }
    Ok(PrfReport {
        granularity: match mode {
            DocMode::Type => Granularity::DocType,
            DocMode::Occurrence => Granularity::DocOccurrence,
        },
        precision,
        recall,
        f1: f1_score(precision, recall),
        gap: (recall - precision).abs(),
        macro_f1: Some(macro_f1),
        counts: None,
        per_doc: Some(per_doc),
        flags,
    })
}
