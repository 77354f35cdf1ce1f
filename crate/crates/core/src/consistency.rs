//! Post-hoc consistency heuristics over extractor output.
//!
//! Document consistency (DC) expands every predicted term to all of its exact
//! matches in the document. Corpus consistency (CC) promotes a term to every
//! document containing it once it was predicted in at least `cc_threshold` of
//! those documents. Both heuristics only ever add predictions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::corpus::{
    find_occurrences, Corpus, Document, MatchConfig, OverlapPolicy, PredictionSet, TermOccurrence,
};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyConfig {
    pub cc_threshold: f64,
    pub matching: MatchConfig,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            cc_threshold: 0.5,
            matching: MatchConfig::default(),
        }
    }
}

impl ConsistencyConfig {
    pub fn new(cc_threshold: f64, matching: MatchConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&cc_threshold) {
            return Err(Error::InvalidArgument(format!(
                "cc threshold must lie in [0, 1], got {cc_threshold}"
            )));
        }
        Ok(ConsistencyConfig {
            cc_threshold,
            matching,
        })
    }
}

/// DC output for one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentConsistency {
    /// Sorted by `(start, end)`.
    pub occurrences: Vec<TermOccurrence>,
    /// Terms with no match in the text.
    pub absent_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Promotion {
    pub term: String,
    /// Documents whose text contains the term.
    pub matching_docs: usize,
    /// Matching documents in which the term was predicted.
    pub predicted_docs: usize,
    /// Documents the term was added to.
    pub added_to: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DocCounts {
    pub doc_id: String,
    pub terms_before: usize,
    pub terms_after: usize,
    pub occurrences_before: usize,
    pub occurrences_after: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub dc_added: usize,
    pub cc_promoted: Vec<Promotion>,
    pub absent_terms: BTreeMap<String, Vec<String>>,
    pub per_doc: Vec<DocCounts>,
}

/// Disjoint, merged character coverage of accepted spans.
#[derive(Default)]
struct Coverage {
    // start -> end, non-overlapping and non-adjacent-merged
    intervals: BTreeMap<usize, usize>,
}

impl Coverage {
    fn intersects(&self, start: usize, end: usize) -> bool {
        self.intervals
            .range(..end)
            .next_back()
            .is_some_and(|(_, &e)| e > start)
    }

    fn insert(&mut self, mut start: usize, mut end: usize) {
        while let Some((&s, &e)) = self.intervals.range(..=end).next_back() {
            if e < start {
                break;
            }
            start = start.min(s);
            end = end.max(e);
            self.intervals.remove(&s);
        }
        self.intervals.insert(start, end);
    }
}

/// DC with explicit precedence: `seeds` are kept unconditionally, then matches
/// of each tier of terms are added in tier order. Within a tier, longer
/// matches win, then earlier starts, then the lexicographically smaller
/// normalized term. Under [`OverlapPolicy::AllowOverlaps`] every match is kept.
pub fn expand_document(
    doc: &Document,
    seeds: &[TermOccurrence],
    tiers: &[&[String]],
    cfg: &MatchConfig,
) -> Result<DocumentConsistency> {
    let mut candidates: Vec<(usize, String, TermOccurrence)> = Vec::new();
    let mut absent_terms = Vec::new();
    for (tier, terms) in tiers.iter().enumerate() {
        for term in terms.iter() {
            let found = find_occurrences(&doc.text, term, cfg)?;
            if found.is_empty() {
                absent_terms.push(term.clone());
            }
            let key = cfg.normalize(term);
            candidates.extend(found.into_iter().map(|occ| (tier, key.clone(), occ)));
        }
    }

    let mut accepted: Vec<TermOccurrence> = seeds.to_vec();
    match cfg.overlap_policy {
        OverlapPolicy::AllowOverlaps => {
            accepted.extend(candidates.into_iter().map(|(_, _, occ)| occ));
        }
        OverlapPolicy::GreedyLongestFirst => {
            candidates.sort_by(|(ta, ka, a), (tb, kb, b)| {
                ta.cmp(tb)
                    .then(b.char_len().cmp(&a.char_len()))
                    .then(a.start.cmp(&b.start))
                    .then(ka.cmp(kb))
            });
            let mut coverage = Coverage::default();
            for seed in seeds {
                coverage.insert(seed.start, seed.end);
            }
            for (_, _, occ) in candidates {
                if !coverage.intersects(occ.start, occ.end) {
                    coverage.insert(occ.start, occ.end);
                    accepted.push(occ);
                }
            }
        }
    }
    accepted.sort_by_key(|o| (o.start, o.end));
    accepted.dedup_by(|a, b| a.span() == b.span());
    Ok(DocumentConsistency {
        occurrences: accepted,
        absent_terms,
    })
}

/// DC for a single document with no pre-existing spans.
pub fn apply_document_consistency(
    doc: &Document,
    terms: &[String],
    cfg: &ConsistencyConfig,
) -> Result<DocumentConsistency> {
    expand_document(doc, &[], &[terms], &cfg.matching)
}

struct TermStat {
    surface: String,
    matching: Vec<usize>,
    predicted: usize,
}

/// Corpus-wide aggregation: for each distinct normalized term (in order of
/// first prediction), the documents that contain it and how many of those
/// predicted it.
fn aggregate_terms(
    corpus: &Corpus,
    preds: &PredictionSet,
    cfg: &MatchConfig,
) -> Result<Vec<TermStat>> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    for doc in corpus.documents() {
        for term in preds.terms(&doc.id) {
            let key = cfg.normalize(term);
            if !key.is_empty() && seen.insert(key.clone()) {
                order.push((key, term.trim().to_string()));
            }
        }
    }

    let predicted_sets: Vec<BTreeSet<String>> = corpus
        .documents()
        .iter()
        .map(|d| preds.terms(&d.id).iter().map(|t| cfg.normalize(t)).collect())
        .collect();

    let docs = corpus.documents();
    par::map(&order, |(key, surface)| {
        let mut matching = Vec::new();
        let mut predicted = 0;
        for (i, doc) in docs.iter().enumerate() {
            if !find_occurrences(&doc.text, surface, cfg)?.is_empty() {
                matching.push(i);
                if predicted_sets[i].contains(key) {
                    predicted += 1;
                }
            }
        }
        Ok(TermStat {
            surface: surface.clone(),
            matching,
            predicted,
        })
    })
    .into_iter()
    .collect()
}

type Promoted = (PredictionSet, BTreeMap<String, Vec<String>>, Vec<Promotion>);

fn promote(corpus: &Corpus, preds: &PredictionSet, cfg: &ConsistencyConfig) -> Result<Promoted> {
    preds.validate_against(corpus)?;
    let stats = aggregate_terms(corpus, preds, &cfg.matching)?;
    let mut out = preds.clone();
    let mut promoted_terms: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut promotions = Vec::new();

    for stat in stats {
        let matching = stat.matching.len();
        if matching == 0 || (stat.predicted as f64 / matching as f64) < cfg.cc_threshold {
            continue;
        }
        let mut added_to = Vec::new();
        for &i in &stat.matching {
            let doc_id = &corpus.documents()[i].id;
            if out.add_terms(doc_id, [&stat.surface], &cfg.matching) > 0 {
                promoted_terms
                    .entry(doc_id.clone())
                    .or_default()
                    .push(stat.surface.clone());
                added_to.push(doc_id.clone());
            }
        }
        if !added_to.is_empty() {
            promotions.push(Promotion {
                term: stat.surface,
                matching_docs: matching,
                predicted_docs: stat.predicted,
                added_to,
            });
        }
    }
    Ok((out, promoted_terms, promotions))
}

fn doc_counts(corpus: &Corpus, before: &PredictionSet, after: &PredictionSet) -> Vec<DocCounts> {
    let mentioned = after.doc_ids();
    corpus
        .ids()
        .filter(|id| mentioned.contains(id))
        .map(|id| DocCounts {
            doc_id: id.to_string(),
            terms_before: before.terms(id).len(),
            terms_after: after.terms(id).len(),
            occurrences_before: before.occurrences(id).map_or(0, <[_]>::len),
            occurrences_after: after.occurrences(id).map_or(0, <[_]>::len),
        })
        .collect()
}

/// CC: returns the augmented predictions and a report of promotions.
pub fn apply_corpus_consistency(
    corpus: &Corpus,
    preds: &PredictionSet,
    cfg: &ConsistencyConfig,
) -> Result<(PredictionSet, ConsistencyReport)> {
    let (out, _, promotions) = promote(corpus, preds, cfg)?;
    let report = ConsistencyReport {
        dc_added: 0,
        per_doc: doc_counts(corpus, preds, &out),
        cc_promoted: promotions,
        absent_terms: BTreeMap::new(),
    };
    Ok((out, report))
}

/// Runs DC over every predicted document. Existing spans act as seeds;
/// `tiers_for` yields the term tiers per document.
fn run_dc<'a, F>(
    corpus: &Corpus,
    preds: &PredictionSet,
    cfg: &MatchConfig,
    tiers_for: F,
) -> Result<(PredictionSet, usize, BTreeMap<String, Vec<String>>)>
where
    F: Fn(&str) -> Vec<&'a [String]> + Sync + Send,
{
    let mentioned = preds.doc_ids();
    let docs: Vec<&Document> = corpus
        .documents()
        .iter()
        .filter(|d| mentioned.contains(d.id.as_str()))
        .collect();
    let results = par::map(&docs, |doc| {
        let seeds = preds.occurrences(&doc.id).unwrap_or(&[]);
        expand_document(doc, seeds, &tiers_for(&doc.id), cfg).map(|r| (seeds.len(), r))
    });

    let mut out = PredictionSet {
        per_doc_terms: preds.per_doc_terms.clone(),
        per_doc_occurrences: Some(BTreeMap::new()),
    };
    let mut added = 0;
    let mut absent = BTreeMap::new();
    for (doc, result) in docs.iter().zip(results) {
        let (seeded, expanded) = result?;
        added += expanded.occurrences.len().saturating_sub(seeded);
        if !expanded.absent_terms.is_empty() {
            absent.insert(doc.id.clone(), expanded.absent_terms);
        }
        out.per_doc_occurrences
            .as_mut()
            .expect("initialised above")
            .insert(doc.id.clone(), expanded.occurrences);
    }
    Ok((out, added, absent))
}

/// DC across a corpus; existing predicted spans are kept.
pub fn apply_dc(
    corpus: &Corpus,
    preds: &PredictionSet,
    cfg: &ConsistencyConfig,
) -> Result<(PredictionSet, ConsistencyReport)> {
    preds.validate_against(corpus)?;
    let (out, dc_added, absent_terms) =
        run_dc(corpus, preds, &cfg.matching, |id| vec![preds.terms(id)])?;
    let report = ConsistencyReport {
        dc_added,
        cc_promoted: Vec::new(),
        absent_terms,
        per_doc: doc_counts(corpus, preds, &out),
    };
    Ok((out, report))
}

/// CC followed by DC. Spans of originally predicted terms take precedence
/// over spans of promoted terms, so promotion never displaces a match DC
/// alone would have produced.
pub fn apply_both(
    corpus: &Corpus,
    preds: &PredictionSet,
    cfg: &ConsistencyConfig,
) -> Result<(PredictionSet, ConsistencyReport)> {
    let (promoted, promoted_terms, cc_promoted) = promote(corpus, preds, cfg)?;
    let empty: Vec<String> = Vec::new();
    let original_len: HashMap<&str, usize> = promoted
        .per_doc_terms
        .keys()
        .map(|id| (id.as_str(), preds.terms(id).len()))
        .collect();
    let (out, dc_added, absent_terms) = run_dc(corpus, &promoted, &cfg.matching, |id| {
        let all = promoted.terms(id);
        let split = original_len.get(id).copied().unwrap_or(0).min(all.len());
        debug_assert_eq!(
            all.len() - split,
            promoted_terms.get(id).unwrap_or(&empty).len()
        );
        vec![&all[..split], &all[split..]]
    })?;
    let report = ConsistencyReport {
        dc_added,
        cc_promoted,
        absent_terms,
        per_doc: doc_counts(corpus, preds, &out),
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(texts: &[&str]) -> Corpus {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("d{i}"), *t))
            .collect();
        Corpus::new("t", docs).unwrap()
    }

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dc_duplicates_mentions() {
        let doc = Document::new("d", "heart failure, then heart failure again");
        let out = apply_document_consistency(
            &doc,
            &strings(&["heart failure"]),
            &ConsistencyConfig::default(),
        )
        .unwrap();
        assert_eq!(out.occurrences.len(), 2);
    }

    #[test]
    fn dc_prefers_longest_match() {
        let doc = Document::new("d", "wind energy");
        let out = apply_document_consistency(
            &doc,
            &strings(&["wind energy", "energy"]),
            &ConsistencyConfig::default(),
        )
        .unwrap();
        assert_eq!(out.occurrences, [TermOccurrence::new("wind energy", 0, 11)]);
        assert!(out.absent_terms.is_empty());
    }

    #[test]
    fn dc_reports_absent_terms() {
        let doc = Document::new("d", "wind energy");
        let out = apply_document_consistency(
            &doc,
            &strings(&["tsunami"]),
            &ConsistencyConfig::default(),
        )
        .unwrap();
        assert!(out.occurrences.is_empty());
        assert_eq!(out.absent_terms, ["tsunami"]);
    }

    #[test]
    fn dc_allow_overlaps_keeps_nested_matches() {
        let doc = Document::new("d", "wind energy");
        let cfg = ConsistencyConfig {
            matching: MatchConfig {
                overlap_policy: OverlapPolicy::AllowOverlaps,
                ..MatchConfig::default()
            },
            ..ConsistencyConfig::default()
        };
        let out =
            apply_document_consistency(&doc, &strings(&["wind energy", "energy"]), &cfg).unwrap();
        assert_eq!(out.occurrences.len(), 2);
    }

    #[test]
    fn seeds_are_never_displaced() {
        let doc = Document::new("d", "wind energy");
        let seeds = [TermOccurrence::new("energy", 5, 11)];
        let terms = strings(&["wind energy"]);
        let out = expand_document(&doc, &seeds, &[&terms], &MatchConfig::default()).unwrap();
        assert_eq!(out.occurrences, seeds);
    }

    #[test]
    fn coverage_merges_intervals() {
        let mut c = Coverage::default();
        c.insert(0, 3);
        c.insert(5, 8);
        c.insert(2, 6);
        assert_eq!(c.intervals.len(), 1);
        assert!(c.intersects(7, 9));
        assert!(!c.intersects(8, 9));
    }

    #[test]
    fn cc_promotes_at_the_boundary() {
        let corpus = corpus(&["a tsunami", "tsunami b", "c tsunami d", "tsunami", "reef"]);
        let mut preds = PredictionSet::new();
        let cfg = ConsistencyConfig::default();
        preds.add_terms("d0", ["tsunami"], &cfg.matching);
        preds.add_terms("d1", ["tsunami"], &cfg.matching);
        let (out, report) = apply_corpus_consistency(&corpus, &preds, &cfg).unwrap();
        for id in ["d0", "d1", "d2", "d3"] {
            assert_eq!(out.terms(id), ["tsunami"], "{id}");
        }
        assert!(out.terms("d4").is_empty());
        assert_eq!(report.cc_promoted.len(), 1);
        assert_eq!(report.cc_promoted[0].added_to, ["d2", "d3"]);
        assert_eq!((report.cc_promoted[0].matching_docs, report.cc_promoted[0].predicted_docs), (4, 2));
    }

    #[test]
    fn cc_below_threshold_is_a_no_op() {
        let corpus = corpus(&["a tsunami", "tsunami b", "c tsunami d"]);
        let cfg = ConsistencyConfig::default();
        let mut preds = PredictionSet::new();
        preds.add_terms("d0", ["tsunami"], &cfg.matching);
        let (out, report) = apply_corpus_consistency(&corpus, &preds, &cfg).unwrap();
        assert_eq!(out, preds);
        assert!(report.cc_promoted.is_empty());
    }

    #[test]
    fn cc_ignores_unmatched_predictions_in_the_ratio() {
        // Predicted in d0 where it never occurs; 1 of 2 matching docs remains.
        let corpus = corpus(&["nothing here", "a reef", "the reef"]);
        let cfg = ConsistencyConfig::default();
        let mut preds = PredictionSet::new();
        preds.add_terms("d0", ["reef"], &cfg.matching);
        let (out, _) = apply_corpus_consistency(&corpus, &preds, &cfg).unwrap();
        assert_eq!(out, preds);
        preds.add_terms("d1", ["reef"], &cfg.matching);
        let (out, _) = apply_corpus_consistency(&corpus, &preds, &cfg).unwrap();
        assert_eq!(out.terms("d2"), ["reef"]);
        assert_eq!(out.terms("d0"), ["reef"]);
    }

    #[test]
    fn cc_rejects_unknown_documents() {
        let corpus = corpus(&["x"]);
        let mut preds = PredictionSet::new();
        preds.add_terms("nope", ["x"], &MatchConfig::default());
        assert!(matches!(
            apply_corpus_consistency(&corpus, &preds, &ConsistencyConfig::default()),
            Err(Error::UnknownDocument(id)) if id == "nope"
        ));
    }

    #[test]
    fn both_materializes_promoted_terms() {
        let corpus = corpus(&["tsunami and tsunami", "a tsunami"]);
        let cfg = ConsistencyConfig::default();
        let mut preds = PredictionSet::new();
        preds.add_terms("d1", ["tsunami"], &cfg.matching);
        let (out, report) = apply_both(&corpus, &preds, &cfg).unwrap();
        assert_eq!(out.occurrences("d0").unwrap().len(), 2);
        assert_eq!(out.occurrences("d1").unwrap().len(), 1);
        assert_eq!(report.dc_added, 3);
    }

    #[test]
    fn promoted_terms_never_displace_predicted_ones() {
        let corpus = corpus(&["wind energy", "wind energy", "wind energy", "wind energy"]);
        let cfg = ConsistencyConfig::default();
        let mut preds = PredictionSet::new();
        preds.add_terms("d0", ["energy"], &cfg.matching);
        preds.add_terms("d1", ["wind energy"], &cfg.matching);
        preds.add_terms("d2", ["wind energy"], &cfg.matching);
        let (out, _) = apply_both(&corpus, &preds, &cfg).unwrap();
        assert_eq!(out.occurrences("d0").unwrap(), [TermOccurrence::new("energy", 5, 11)]);
        assert_eq!(out.occurrences("d3").unwrap(), [TermOccurrence::new("wind energy", 0, 11)]);
    }

    #[test]
    fn empty_predictions_give_empty_output() {
        let corpus = corpus(&["a", "b"]);
        let (out, report) =
            apply_both(&corpus, &PredictionSet::new(), &ConsistencyConfig::default()).unwrap();
        assert!(out.per_doc_terms.is_empty());
        assert_eq!(report.dc_added, 0);
        assert!(report.cc_promoted.is_empty());
        assert!(report.per_doc.is_empty());
    }

    #[test]
    fn threshold_is_validated() {
        assert!(ConsistencyConfig::new(1.5, MatchConfig::default()).is_err());
        assert!(ConsistencyConfig::new(0.0, MatchConfig::default()).is_ok());
    }
}
