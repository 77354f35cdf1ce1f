//! Entity-type labels, NER records and type-based filtering.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classify::classify_entity_type;
use super::client::{map_bounded, CompletionClient};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Term,
    NonTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Human,
    Llm,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Term => "term",
            Label::NonTerm => "non-term",
        })
    }
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSource::Human => "human",
            LabelSource::Llm => "llm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityTypeLabel {
    pub type_name: String,
    pub label: Label,
    pub source: LabelSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabelTable {
    entries: BTreeMap<String, EntityTypeLabel>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: EntityTypeLabel) -> Result<()> {
        if self.entries.contains_key(&entry.type_name) {
            return Err(Error::InvalidArgument(format!(
                "type `{}` is labeled twice",
                entry.type_name
            )));
        }
        self.entries.insert(entry.type_name.clone(), entry);
        Ok(())
    }

    pub fn get(&self, type_name: &str) -> Option<&EntityTypeLabel> {
        self.entries.get(type_name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityTypeLabel> {
        self.entries.values()
    }

    /// Reads `type_name<TAB>label<TAB>source` rows. A header row naming
    /// those columns is skipped; a missing source column means `human`.
    pub fn parse_tsv(input: &str) -> Result<Self> {
        let mut table = LabelTable::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if line_no == 1 && cols.first() == Some(&"type_name") {
                continue;
            }
            if cols.len() < 2 || cols[0].is_empty() {
                return Err(Error::record(line_no, "type_name", "expected type_name<TAB>label<TAB>source"));
            }
            let label = match cols[1] {
                "term" => Label::Term,
                "non-term" | "nonterm" | "non_term" => Label::NonTerm,
                other => return Err(Error::record(line_no, "label", format!("unknown label `{other}`"))),
            };
            let source = match cols.get(2).copied().unwrap_or("human") {
                "human" | "" => LabelSource::Human,
                "llm" => LabelSource::Llm,
                other => return Err(Error::record(line_no, "source", format!("unknown source `{other}`"))),
            };
            table
                .insert(EntityTypeLabel {
                    type_name: cols[0].to_string(),
                    label,
                    source,
                })
                .map_err(|e| Error::record(line_no, "type_name", e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("type_name\tlabel\tsource\n");
        for e in self.entries.values() {
            out.push_str(&format!("{}\t{}\t{}\n", e.type_name, e.label, e.source));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub surface: String,
    #[serde(rename = "type", alias = "type_name")]
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    #[serde(default)]
    pub entities: Vec<Entity>,
}

pub fn parse_ner_jsonl(input: &str) -> Result<Vec<NerRecord>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str::<NerRecord>(line)
                .map_err(|e| Error::record(i + 1, "<record>", e.to_string()))
        })
        .collect()
}

pub fn load_ner(path: impl AsRef<Path>) -> Result<Vec<NerRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ner_jsonl(&text)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverageReport {
    pub records: usize,
    pub instances: usize,
    pub kept: usize,
    pub dropped_non_term: usize,
    pub human_covered: usize,
    pub llm_covered: usize,
    pub unresolved: usize,
    pub human_fraction: f64,
    pub llm_fraction: f64,
    pub unresolved_fraction: f64,
    pub types_classified: usize,
    pub classification_failures: Vec<String>,
    /// Entities whose surface does not occur in the record text. They are
    /// kept.
    pub surfaces_not_in_text: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub records: Vec<NerRecord>,
    pub report: CoverageReport,
}

/// Keeps entities whose type is labeled `term`.
///
/// Types missing from the table are classified through `client` in order of
/// first appearance and cached in the table; without a client they are
/// dropped and counted as unresolved. A response that cannot be parsed is
/// recorded in the report. Transport failures are returned as errors.
pub fn filter_entities(
    records: &[NerRecord],
    table: &mut LabelTable,
    client: Option<&dyn CompletionClient>,
    max_inflight: usize,
) -> Result<FilterOutcome> {
    if table.is_empty() {
        return Err(Error::InvalidArgument("label table is empty".into()));
    }
    let mut report = CoverageReport {
        records: records.len(),
        ..CoverageReport::default()
    };

    // Unknown types, in order of first appearance.
    let mut unknown = Vec::new();
    let mut seen = HashSet::new();
    for e in records.iter().flat_map(|r| &r.entities) {
        if table.get(&e.type_name).is_none() && seen.insert(e.type_name.as_str()) {
            unknown.push(e.type_name.clone());
        }
    }
    if let Some(client) = client {
        let results = map_bounded(&unknown, max_inflight, |t| classify_entity_type(t, client));
        for (type_name, result) in unknown.iter().zip(results) {
            match result {
                Ok(label) => {
                    table.insert(label)?;
                    report.types_classified += 1;
                }
                Err(Error::Classification { .. }) => {
                    report.classification_failures.push(type_name.clone())
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut kept_records = Vec::with_capacity(records.len());
    let mut cache: HashMap<&str, Option<(Label, LabelSource)>> = HashMap::new();
    for record in records {
        let mut kept = Vec::new();
        for e in &record.entities {
            report.instances += 1;
            let resolved = *cache
                .entry(e.type_name.as_str())
                .or_insert_with(|| table.get(&e.type_name).map(|l| (l.label, l.source)));
            match resolved {
                None => report.unresolved += 1,
                Some((label, source)) => {
                    match source {
                        LabelSource::Human => report.human_covered += 1,
                        LabelSource::Llm => report.llm_covered += 1,
                    }
                    if label == Label::Term {
                        if !record.text.contains(e.surface.as_str()) {
                            report.surfaces_not_in_text += 1;
                            log::warn!("entity `{}` does not occur in its record text", e.surface);
                        }
                        kept.push(e.clone());
                    } else {
                        report.dropped_non_term += 1;
                    }
                }
            }
        }
        report.kept += kept.len();
        kept_records.push(NerRecord {
            id: record.id.clone(),
            text: record.text.clone(),
            entities: kept,
        });
    }
    if report.instances > 0 {
        let total = report.instances as f64;
        report.human_fraction = report.human_covered as f64 / total;
        report.llm_fraction = report.llm_covered as f64 / total;
        report.unresolved_fraction = report.unresolved as f64 / total;
    }
    Ok(FilterOutcome {
        records: kept_records,
        report,
    })
}
