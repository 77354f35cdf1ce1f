//! Document and annotation data model, corpus file formats and the
//! exact-match primitive used by the consistency heuristics and the scorers.
//!
//! All offsets are counted in Unicode scalar values (`char`s), never bytes.
//! Text is NFC-normalized when it enters through one of the loaders.

mod io;
mod iob;
mod matching;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_documents, load_predictions, load_spans, load_term_list, parse_documents_jsonl,
    parse_predictions_jsonl, parse_spans_jsonl, parse_term_list_tsv, write_documents_jsonl,
    write_predictions_jsonl, DocumentFormat, SpanRecord, TermsRecord,
};
pub use iob::{
    decode_iob, encode_iob, load_iob, parse_iob_rows, write_iob, IobDecoded, IobDiagnostic,
    IobDocument, IobRow, IobTag,
};
pub use matching::{fold_char, find_occurrences, is_word_boundary};

/// Domain label used when a document carries none.
pub const GENERAL_DOMAIN: &str = "General";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = Some(domain.into());
        self
    }

    /// Length of the text in scalar values.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// The domain label, falling back to [`GENERAL_DOMAIN`].
    pub fn domain_or_general(&self) -> &str {
        match self.domain.as_deref() {
            Some(d) if !d.trim().is_empty() => d,
            _ => GENERAL_DOMAIN,
        }
    }

    pub fn slice(&self, start: usize, end: usize) -> Option<&str> {
        char_slice(&self.text, start, end)
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    documents: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut index = HashMap::with_capacity(documents.len());
        for (pos, doc) in documents.iter().enumerate() {
            if doc.id.is_empty() {
                return Err(Error::record(pos + 1, "id", "must be a nonempty string"));
            }
            if let Some(first) = index.insert(doc.id.clone(), pos) {
                return Err(Error::DuplicateId {
                    id: doc.id.clone(),
                    first: first + 1,
                    second: pos + 1,
                });
            }
        }
        Ok(Corpus {
            name: name.into(),
            documents,
            index,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// A surface string anchored at `[start, end)` in one document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermOccurrence {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl TermOccurrence {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Self {
        TermOccurrence {
            surface: surface.into(),
            start,
            end,
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn char_len(&self) -> usize {
        self.end - self.start
    }

    pub fn overlaps(&self, other: &TermOccurrence) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Checks the occurrence against the text it claims to be anchored in.
    pub fn validate_in(&self, doc: &Document) -> Result<()> {
        let invalid = |message: String| Error::InvalidOccurrence {
            doc_id: doc.id.clone(),
            message,
        };
        if self.start >= self.end {
            return Err(invalid(format!(
                "empty or inverted span [{}, {})",
                self.start, self.end
            )));
        }
        match doc.slice(self.start, self.end) {
            None => Err(invalid(format!(
                "span [{}, {}) exceeds text length {}",
                self.start,
                self.end,
                doc.char_len()
            ))),
            Some(slice) if slice != self.surface => Err(invalid(format!(
                "span [{}, {}) reads {slice:?}, not {:?}",
                self.start, self.end, self.surface
            ))),
            Some(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapPolicy {
    #[default]
    GreedyLongestFirst,
    AllowOverlaps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub case_fold: bool,
    pub require_word_boundary: bool,
    pub overlap_policy: OverlapPolicy,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            case_fold: true,
            require_word_boundary: true,
            overlap_policy: OverlapPolicy::GreedyLongestFirst,
        }
    }
}

impl MatchConfig {
    /// The comparison key of a term under this configuration.
    pub fn normalize(&self, term: &str) -> String {
        let trimmed = term.trim();
        if self.case_fold {
            trimmed.chars().map(fold_char).collect()
        } else {
            trimmed.to_string()
        }
    }
}

/// Gold annotations: a corpus-level term list plus span-level gold per document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub corpus_terms: BTreeSet<String>,
    pub per_doc: BTreeMap<String, Vec<TermOccurrence>>,
}

impl GoldAnnotation {
    /// Gold whose corpus-level list is the union of the annotated surfaces.
    pub fn from_spans(per_doc: BTreeMap<String, Vec<TermOccurrence>>, cfg: &MatchConfig) -> Self {
        let corpus_terms = per_doc
            .values()
            .flatten()
            .map(|o| cfg.normalize(&o.surface))
            .collect();
        GoldAnnotation {
            corpus_terms,
            per_doc,
        }
    }

    /// Gold with an explicit corpus-level list, which must cover every
    /// annotated surface.
    pub fn with_term_list<I, S>(
        terms: I,
        per_doc: BTreeMap<String, Vec<TermOccurrence>>,
        cfg: &MatchConfig,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let corpus_terms: BTreeSet<String> = terms
            .into_iter()
            .map(|t| cfg.normalize(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        let missing: BTreeSet<String> = per_doc
            .values()
            .flatten()
            .map(|o| cfg.normalize(&o.surface))
            .filter(|t| !corpus_terms.contains(t))
            .collect();
        if let Some(example) = missing.iter().next() {
            return Err(Error::GoldNotSuperset {
                count: missing.len(),
                example: example.clone(),
            });
        }
        Ok(GoldAnnotation {
            corpus_terms,
            per_doc,
        })
    }

    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        validate_occurrences(corpus, &self.per_doc)
    }
}

/// Per-document extractor output: type-level terms and, optionally, spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    pub per_doc_terms: BTreeMap<String, Vec<String>>,
    pub per_doc_occurrences: Option<BTreeMap<String, Vec<TermOccurrence>>>,
}

impl PredictionSet {
    pub fn new() -> Self {
        PredictionSet::default()
    }

    /// Appends terms to a document's list, skipping ones already present
    /// under `cfg` normalization. Returns how many were added.
    pub fn add_terms<I, S>(&mut self, doc_id: &str, terms: I, cfg: &MatchConfig) -> usize
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let list = self.per_doc_terms.entry(doc_id.to_string()).or_default();
        let mut seen: BTreeSet<String> = list.iter().map(|t| cfg.normalize(t)).collect();
        let mut added = 0;
        for term in terms {
            let term = term.as_ref().trim();
            if term.is_empty() {
                continue;
            }
            if seen.insert(cfg.normalize(term)) {
                list.push(term.to_string());
                added += 1;
            }
        }
        added
    }

    pub fn add_occurrences(&mut self, doc_id: &str, occurrences: Vec<TermOccurrence>) {
        self.per_doc_occurrences
            .get_or_insert_with(BTreeMap::new)
            .entry(doc_id.to_string())
            .or_default()
            .extend(occurrences);
    }

    pub fn terms(&self, doc_id: &str) -> &[String] {
        self.per_doc_terms
            .get(doc_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn occurrences(&self, doc_id: &str) -> Option<&[TermOccurrence]> {
        self.per_doc_occurrences
            .as_ref()
            .map(|m| m.get(doc_id).map(Vec::as_slice).unwrap_or(&[]))
    }

    /// All document ids mentioned by either the term lists or the spans.
    pub fn doc_ids(&self) -> BTreeSet<&str> {
        let mut ids: BTreeSet<&str> = self.per_doc_terms.keys().map(String::as_str).collect();
        if let Some(occ) = &self.per_doc_occurrences {
            ids.extend(occ.keys().map(String::as_str));
        }
        ids
    }

    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        if let Some(unknown) = self.doc_ids().into_iter().find(|id| !corpus.contains(id)) {
            return Err(Error::UnknownDocument(unknown.to_string()));
        }
        if let Some(occ) = &self.per_doc_occurrences {
            validate_occurrences(corpus, occ)?;
        }
        Ok(())
    }
}

pub fn validate_occurrences(
    corpus: &Corpus,
    per_doc: &BTreeMap<String, Vec<TermOccurrence>>,
) -> Result<()> {
    for (doc_id, occurrences) in per_doc {
        let doc = corpus
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.clone()))?;
        for occ in occurrences {
            occ.validate_in(doc)?;
        }
    }
    Ok(())
}

/// Slices `text` by scalar-value offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(Some(text.len()));
    let begin = indices.nth(start)?;
    let finish = if end == start {
        begin
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[begin..finish])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_slice_counts_scalar_values() {
        let text = "Zürich café";
        assert_eq!(char_slice(text, 0, 6), Some("Zürich"));
        assert_eq!(char_slice(text, 7, 11), Some("café"));
        assert_eq!(char_slice(text, 11, 11), Some(""));
        assert_eq!(char_slice(text, 7, 12), None);
    }

    #[test]
    fn duplicate_ids_are_rejected_with_positions() {
        let docs = vec![Document::new("d1", "a"), Document::new("d1", "b")];
        match Corpus::new("c", docs) {
            Err(Error::DuplicateId { id, first, second }) => {
                assert_eq!((id.as_str(), first, second), ("d1", 1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gold_term_list_must_cover_spans() {
        let mut per_doc = BTreeMap::new();
        per_doc.insert(
            "d1".to_string(),
            vec![TermOccurrence::new("Wind turbine", 0, 12)],
        );
        let cfg = MatchConfig::default();
        assert!(GoldAnnotation::with_term_list(["wind turbine", "rotor"], per_doc.clone(), &cfg)
            .is_ok());
        assert!(matches!(
            GoldAnnotation::with_term_list(["rotor"], per_doc, &cfg),
            Err(Error::GoldNotSuperset { count: 1, .. })
        ));
    }

    #[test]
    fn add_terms_deduplicates_under_normalization() {
        let cfg = MatchConfig::default();
        let mut preds = PredictionSet::new();
        assert_eq!(preds.add_terms("d", ["Tsunami", " tsunami ", "reef", ""], &cfg), 2);
        assert_eq!(preds.terms("d"), ["Tsunami", "reef"]);

        let strict = MatchConfig {
            case_fold: false,
            ..cfg
        };
        assert_eq!(preds.add_terms("d", ["tsunami"], &strict), 1);
    }

    #[test]
    fn occurrence_validation() {
        let doc = Document::new("d", "heart failure risk");
        assert!(TermOccurrence::new("heart failure", 0, 13).validate_in(&doc).is_ok());
        assert!(TermOccurrence::new("heart", 0, 13).validate_in(&doc).is_err());
        assert!(TermOccurrence::new("risk", 14, 19).validate_in(&doc).is_err());
        assert!(TermOccurrence::new("", 3, 3).validate_in(&doc).is_err());
    }

    #[test]
    fn missing_domain_falls_back_to_general() {
        assert_eq!(Document::new("a", "x").domain_or_general(), "General");
        assert_eq!(
            Document::new("a", "x").with_domain("Probability").domain_or_general(),
            "Probability"
        );
    }
}
