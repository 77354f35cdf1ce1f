//! Conversation dataset assembly from NER records and abstracts.

use std::collections::HashSet;

use serde::Serialize;

use super::client::{complete_all, CompletionClient, LlmRequest};
use super::conversation::{to_conversation, ConversationExample};
use super::labels::{filter_entities, CoverageReport, LabelTable, NerRecord};
use super::prompts::render_extraction_prompt;
use super::text::{parse_term_list, snippet_abstracts};
use crate::corpus::Document;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetReport {
    pub coverage: Option<CoverageReport>,
    pub ner_examples: usize,
    pub abstracts: usize,
    pub snippets: usize,
    pub empty_extractions: usize,
    pub requests: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub conversations: Vec<ConversationExample>,
    pub report: DatasetReport,
}

fn dedup_surfaces(record: &NerRecord) -> Vec<String> {
    let mut seen = HashSet::new();
    record
        .entities
        .iter()
        .map(|e| e.surface.trim().to_string())
        .filter(|s| !s.is_empty() && seen.insert(s.to_lowercase()))
        .collect()
}

/// NER-derived conversations come first, in record order, with the
/// "General" domain. Abstract snippets follow in document order, labeled by
/// the endpoint's extraction response.
pub fn build_dataset(
    ner: &[NerRecord],
    table: Option<&mut LabelTable>,
    abstracts: &[Document],
    client: &dyn CompletionClient,
    max_inflight: usize,
) -> Result<Dataset> {
    let mut conversations = Vec::new();
    let mut requests = 0;
    let mut coverage = None;
    let mut ner_examples = 0;

    if !ner.is_empty() {
        let table = table.ok_or_else(|| {
            crate::error::Error::InvalidArgument("NER records need a label table".into())
        })?;
        let before = table.len();
        let outcome = filter_entities(ner, table, Some(client), max_inflight)?;
        requests += table.len() - before + outcome.report.classification_failures.len();
        for record in &outcome.records {
            conversations.push(to_conversation(&record.text, None, &dedup_surfaces(record)));
        }
        ner_examples = outcome.records.len();
        coverage = Some(outcome.report);
    }

    let snippets: Vec<(String, Option<&str>)> = abstracts
        .iter()
        .flat_map(|doc| {
            snippet_abstracts(&doc.text)
                .into_iter()
                .map(move |s| (s, doc.domain.as_deref()))
        })
        .collect();
    let prompts: Vec<LlmRequest> = snippets
        .iter()
        .map(|(snippet, domain)| {
            let (system, user) = render_extraction_prompt(snippet, domain.unwrap_or(""));
            LlmRequest::new(system, user)
        })
        .collect();
    requests += prompts.len();
    let mut empty_extractions = 0;
    for ((snippet, domain), response) in snippets.iter().zip(complete_all(client, &prompts, max_inflight)) {
        let terms = parse_term_list(&response?.text);
        if terms.is_empty() {
            empty_extractions += 1;
        }
        conversations.push(to_conversation(snippet, *domain, &terms));
    }

    Ok(Dataset {
        conversations,
        report: DatasetReport {
            coverage,
            ner_examples,
            abstracts: abstracts.len(),
            snippets: snippets.len(),
            empty_extractions,
            requests,
        },
    })
}
