#![allow(dead_code)]

use std::collections::BTreeMap;

use termkit::corpus::{Corpus, Document, MatchConfig, PredictionSet, TermOccurrence};
use termkit_oracle::fixtures::MiniCorpus;
use termkit_oracle::{slice, Span};

pub fn corpus(mc: &MiniCorpus) -> Corpus {
    let docs = mc
        .docs
        .iter()
        .map(|(id, text)| Document::new(id.clone(), text.clone()))
        .collect();
    Corpus::new("fixture", docs).unwrap()
}

pub fn occurrences(text: &str, spans: &[Span]) -> Vec<TermOccurrence> {
    spans
        .iter()
        .map(|&s| TermOccurrence::new(slice(text, s), s.0, s.1))
        .collect()
}

pub fn predictions(mc: &MiniCorpus, with_seeds: bool) -> PredictionSet {
    let cfg = MatchConfig::default();
    let mut preds = PredictionSet::new();
    for (i, (id, text)) in mc.docs.iter().enumerate() {
        preds.add_terms(id, &mc.preds[i], &cfg);
        if with_seeds {
            preds.add_occurrences(id, occurrences(text, &mc.seeds[i]));
        }
    }
    preds
}

pub fn gold(mc: &MiniCorpus) -> BTreeMap<String, Vec<TermOccurrence>> {
    mc.docs
        .iter()
        .zip(&mc.gold)
        .map(|((id, text), spans)| (id.clone(), occurrences(text, spans)))
        .collect()
}

pub fn spans(occ: &[TermOccurrence]) -> Vec<Span> {
    let mut out: Vec<Span> = occ.iter().map(|o| (o.start, o.end)).collect();
    out.sort();
    out
}

pub fn texts(mc: &MiniCorpus) -> Vec<String> {
    mc.docs.iter().map(|(_, t)| t.clone()).collect()
}
