use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use unicode_normalization::UnicodeNormalization;

use super::{Corpus, Document, MatchConfig, PredictionSet, TermOccurrence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentFormat {
    /// One JSON object per line with `id`, `text` and optional `domain`.
    Jsonl,
    /// A directory of `.txt` files; the file stem is the document id.
    PlainDir,
}

/// Span record: `{"doc_id", "surface", "start", "end"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub doc_id: String,
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

/// Type-level prediction record: `{"doc_id", "terms"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermsRecord {
    pub doc_id: String,
    pub terms: Vec<String>,
}

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn load_documents(path: impl AsRef<Path>, format: DocumentFormat) -> Result<Corpus> {
    let path = path.as_ref();
    match format {
        DocumentFormat::Jsonl => parse_documents_jsonl(&stem(path), &read(path)?),
        DocumentFormat::PlainDir => {
            let mut files: Vec<_> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
                .collect();
            files.sort();
            let mut docs = Vec::with_capacity(files.len());
            for file in files {
                docs.push(Document::new(stem(&file), nfc(&read(&file)?)));
            }
            Corpus::new(stem(path), docs)
        }
    }
}

/// Iterates over non-blank lines as `(line_number, parsed_object)`.
fn json_objects(input: &str) -> impl Iterator<Item = Result<(usize, Map<String, Value>)>> + '_ {
    input
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let line_no = i + 1;
            match serde_json::from_str::<Value>(line) {
                Ok(Value::Object(map)) => Ok((line_no, map)),
                Ok(_) => Err(Error::record(line_no, "<record>", "expected a JSON object")),
                Err(e) => Err(Error::record(line_no, "<record>", e.to_string())),
            }
        })
}

fn string_field(map: &Map<String, Value>, line: usize, field: &str) -> Result<String> {
    match map.get(field) {
        Some(Value::String(s)) => Ok(nfc(s)),
        Some(_) => Err(Error::record(line, field, "expected a string")),
        None => Err(Error::record(line, field, "missing required field")),
    }
}

fn optional_string_field(
    map: &Map<String, Value>,
    line: usize,
    field: &str,
) -> Result<Option<String>> {
    match map.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(nfc(s))),
        Some(_) => Err(Error::record(line, field, "expected a string")),
    }
}

fn offset_field(map: &Map<String, Value>, line: usize, field: &str) -> Result<usize> {
    map.get(field)
        .ok_or_else(|| Error::record(line, field, "missing required field"))?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::record(line, field, "expected a non-negative integer"))
}

pub fn parse_documents_jsonl(name: &str, input: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    let mut first_seen: BTreeMap<String, usize> = BTreeMap::new();
    for record in json_objects(input) {
        let (line, map) = record?;
        let id = string_field(&map, line, "id")?;
        if id.is_empty() {
            return Err(Error::record(line, "id", "must be nonempty"));
        }
        let text = string_field(&map, line, "text")?;
        let domain = optional_string_field(&map, line, "domain")?;
        let position = docs.len() + 1;
        if let Some(&first) = first_seen.get(&id) {
            return Err(Error::DuplicateId {
                id,
                first,
                second: position,
            });
        }
        first_seen.insert(id.clone(), position);
        docs.push(Document { id, text, domain });
    }
    Corpus::new(name, docs)
}

pub fn write_documents_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for doc in corpus.documents() {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// First column of an ACTER-style term list; further columns are ignored.
pub fn parse_term_list_tsv(input: &str) -> Vec<String> {
    input
        .lines()
        .filter_map(|line| line.split('\t').next())
        .map(|term| nfc(term.trim()))
        .filter(|term| !term.is_empty())
        .collect()
}

pub fn load_term_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(parse_term_list_tsv(&read(path.as_ref())?))
}

fn parse_span(map: &Map<String, Value>, line: usize) -> Result<(String, TermOccurrence)> {
    let doc_id = string_field(map, line, "doc_id")?;
    let surface = string_field(map, line, "surface")?;
    let start = offset_field(map, line, "start")?;
    let end = offset_field(map, line, "end")?;
    if start >= end {
        return Err(Error::record(line, "end", "must be greater than `start`"));
    }
    if surface.chars().count() != end - start {
        return Err(Error::record(
            line,
            "surface",
            format!("length differs from span [{start}, {end})"),
        ));
    }
    Ok((doc_id, TermOccurrence::new(surface, start, end)))
}

pub fn parse_spans_jsonl(input: &str) -> Result<BTreeMap<String, Vec<TermOccurrence>>> {
    let mut per_doc: BTreeMap<String, Vec<TermOccurrence>> = BTreeMap::new();
    for record in json_objects(input) {
        let (line, map) = record?;
        let (doc_id, occ) = parse_span(&map, line)?;
        per_doc.entry(doc_id).or_default().push(occ);
    }
    for occurrences in per_doc.values_mut() {
        occurrences.sort_by_key(|o| (o.start, o.end));
    }
    Ok(per_doc)
}

pub fn load_spans(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<TermOccurrence>>> {
    parse_spans_jsonl(&read(path.as_ref())?)
}

/// Reads predictions where each line is either a type-level record
/// (`doc_id`, `terms`) or a span record (`doc_id`, `surface`, `start`, `end`).
///
/// Span surfaces are also added to the document's type-level list, after any
/// explicitly listed terms.
pub fn parse_predictions_jsonl(input: &str, cfg: &MatchConfig) -> Result<PredictionSet> {
    let mut preds = PredictionSet::new();
    let mut spans: BTreeMap<String, Vec<TermOccurrence>> = BTreeMap::new();
    for record in json_objects(input) {
        let (line, map) = record?;
        if map.contains_key("terms") {
            let doc_id = string_field(&map, line, "doc_id")?;
            let terms = match map.get("terms") {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .map(nfc)
                            .ok_or_else(|| Error::record(line, "terms", "expected strings"))
                    })
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::record(line, "terms", "expected an array of strings")),
            };
            preds.add_terms(&doc_id, terms, cfg);
        } else {
            let (doc_id, occ) = parse_span(&map, line)?;
            spans.entry(doc_id).or_default().push(occ);
        }
    }
    for (doc_id, mut occurrences) in spans {
        occurrences.sort_by_key(|o| (o.start, o.end));
        let surfaces: Vec<String> = occurrences.iter().map(|o| o.surface.clone()).collect();
        preds.add_terms(&doc_id, surfaces, cfg);
        preds.add_occurrences(&doc_id, occurrences);
    }
    Ok(preds)
}

pub fn load_predictions(path: impl AsRef<Path>, cfg: &MatchConfig) -> Result<PredictionSet> {
    parse_predictions_jsonl(&read(path.as_ref())?, cfg)
}

/// Writes one type-level record per document followed by its span records.
/// Documents are emitted in `order`, then any remaining ids in sorted order.
pub fn write_predictions_jsonl<W: Write>(
    preds: &PredictionSet,
    order: &[&str],
    mut out: W,
) -> std::io::Result<()> {
    let all = preds.doc_ids();
    let ordered = order
        .iter()
        .copied()
        .filter(|id| all.contains(id))
        .chain(all.iter().copied().filter(|id| !order.contains(id)));
    for doc_id in ordered {
        let record = TermsRecord {
            doc_id: doc_id.to_string(),
            terms: preds.terms(doc_id).to_vec(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
        for occ in preds.occurrences(doc_id).unwrap_or(&[]) {
            let record = SpanRecord {
                doc_id: doc_id.to_string(),
                surface: occ.surface.clone(),
                start: occ.start,
                end: occ.end,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
