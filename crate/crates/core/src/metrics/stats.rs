use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

/// Median term length and median number of term instances per document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermStats {
    /// Median surface length in scalar values, internal spaces included.
    /// `None` when there are no instances at all.
    pub median_len_chars: Option<f64>,
    pub median_count_per_doc: f64,
    pub documents: usize,
    pub instances: usize,
}

/// Median with the mean-of-central-values convention for even sizes.
/// Returns `None` for an empty sample.
pub fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    })
}

/// `per_doc` holds the term instances (surfaces) of each document; documents
/// listed in `doc_ids` but absent from `per_doc` count as zero.
pub fn term_statistics(
    per_doc: &BTreeMap<String, Vec<String>>,
    doc_ids: &[String],
) -> Result<TermStats> {
    let mut universe: BTreeSet<&str> = doc_ids.iter().map(String::as_str).collect();
    universe.extend(per_doc.keys().map(String::as_str));
    if universe.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut counts: Vec<usize> = universe
        .iter()
        .map(|id| per_doc.get(*id).map_or(0, Vec::len))
        .collect();
    let mut lengths: Vec<usize> = per_doc
        .values()
        .flatten()
        .map(|t| t.chars().count())
        .collect();

    Ok(TermStats {
        instances: lengths.len(),
        documents: universe.len(),
        median_len_chars: median(&mut lengths),
        median_count_per_doc: median(&mut counts).unwrap_or(0.0),
    })
}
