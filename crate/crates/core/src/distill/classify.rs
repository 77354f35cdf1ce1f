//! Entity-type classification through the completion endpoint.

use std::sync::LazyLock;

use regex::Regex;

use super::client::{CompletionClient, LlmRequest};
use super::labels::{EntityTypeLabel, Label, LabelSource};
use super::prompts::render_type_prompt;
use crate::error::{Error, Result};

static ANSWER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"\{\s*"answer"\s*:\s*\[?\s*(\d+)\s*\]?\s*\}"#).expect("valid regex")
});

/// The option number of the last `{"answer": N}` object in `response`.
pub fn parse_answer(response: &str) -> Option<u64> {
    ANSWER
        .captures_iter(response)
        .last()
        .and_then(|c| c[1].parse().ok())
}

fn label_of(response: &str) -> Option<Label> {
    match parse_answer(response)? {
        0 => Some(Label::NonTerm),
        1 => Some(Label::Term),
        _ => None,
    }
}

/// Asks the endpoint whether expressions of `type_name` are terms. An
/// unusable answer is retried once.
pub fn classify_entity_type(type_name: &str, client: &dyn CompletionClient) -> Result<EntityTypeLabel> {
    if type_name.trim().is_empty() {
        return Err(Error::InvalidArgument("entity type name is empty".into()));
    }
    let (system, user) = render_type_prompt(type_name);
    let request = LlmRequest::new(system, user);
    let mut raw = String::new();
    for _ in 0..2 {
        raw = client.complete(&request)?.text;
        if let Some(label) = label_of(&raw) {
            return Ok(EntityTypeLabel {
                type_name: type_name.to_string(),
                label,
                source: LabelSource::Llm,
            });
        }
    }
    Err(Error::Classification {
        type_name: type_name.to_string(),
        raw_response: raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::client::LlmResponse;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Canned {
        text: &'static str,
        calls: AtomicUsize,
    }

    impl Canned {
        fn new(text: &'static str) -> Self {
            Canned {
                text,
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl CompletionClient for Canned {
        fn complete(&self, _: &LlmRequest) -> Result<LlmResponse> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(LlmResponse {
                text: self.text.to_string(),
                status: 200,
            })
        }
    }

    #[test]
    fn direct_answer() {
        let c = Canned::new("Diseases are domain concepts. {\"answer\": 1}");
        assert_eq!(classify_entity_type("disease", &c).unwrap().label, Label::Term);
        assert_eq!(c.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn last_match_wins() {
        let c = Canned::new("Format: { \"answer\": [1] }. My answer: {\"answer\": 0}");
        let label = classify_entity_type("person", &c).unwrap();
        assert_eq!(label.label, Label::NonTerm);
        assert_eq!(label.source, LabelSource::Llm);
    }

    #[test]
    fn no_answer_retries_once() {
        let c = Canned::new("I am not sure.");
        let err = classify_entity_type("thing", &c).unwrap_err();
        assert!(matches!(err, Error::Classification { ref raw_response, .. } if raw_response == "I am not sure."));
        assert_eq!(c.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn option_two_is_rejected() {
        let c = Canned::new("{\"answer\": 2}");
        assert!(classify_entity_type("thing", &c).is_err());
        assert_eq!(c.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn answer_variants() {
        assert_eq!(parse_answer("{\"answer\":[1]}"), Some(1));
        assert_eq!(parse_answer("{ \"answer\" : 0 }"), Some(0));
        assert_eq!(parse_answer("{\"answer\": \"1\"}"), None);
        assert_eq!(parse_answer(""), None);
    }
}
