//! Distant-supervision dataset construction and few-shot prompting.

mod classify;
mod client;
mod conversation;
mod dataset;
mod fewshot;
mod labels;
pub mod prompts;
mod text;

#[cfg(feature = "http")]
pub use client::HttpClient;
pub use classify::{classify_entity_type, parse_answer};
pub use client::{
    complete_all, map_bounded, CompletionClient, EndpointConfig, LlmRequest, LlmResponse,
    MockClient, DEFAULT_MODEL, KEY_VAR, MODEL_VAR, URL_VAR,
};
pub use conversation::{
    parse_conversations_jsonl, to_conversation, write_conversations_jsonl, ConversationExample,
    Speaker, Turn, ACKNOWLEDGMENT,
};
pub use dataset::{build_dataset, Dataset, DatasetReport};
pub use fewshot::{
    render_fewshot_prompt, select_fewshot_examples, ChatTurn, FewshotExample, PromptTranscript,
    Role, DEFAULT_SHOTS,
};
pub use labels::{
    filter_entities, load_ner, parse_ner_jsonl, CoverageReport, Entity, EntityTypeLabel,
    FilterOutcome, Label, LabelSource, LabelTable, NerRecord,
};
pub use prompts::{render_extraction_prompt, render_type_prompt};
pub use text::{format_term_list, parse_term_list, snippet_abstracts, split_sentences};
