//! Four-turn conversation records used as fine-tuning examples.

use serde::{Deserialize, Serialize};

use super::text::{format_term_list, parse_term_list};
use crate::corpus::GENERAL_DOMAIN;
use crate::error::{Error, Result};

pub const ACKNOWLEDGMENT: &str = "I've read this text.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Human,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub content: String,
}

impl Turn {
    fn new(speaker: Speaker, content: impl Into<String>) -> Self {
        Turn {
            speaker,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationExample {
    pub turns: Vec<Turn>,
    pub domain: String,
}

fn request_text(domain: &str) -> String {
    format!("Please extract the terms from the text that are relevant to the domain: {domain}.")
}

/// Builds the canonical conversation. A missing or blank domain becomes
/// "General".
pub fn to_conversation(snippet: &str, domain: Option<&str>, terms: &[String]) -> ConversationExample {
    let domain = domain
        .map(str::trim)
        .filter(|d| !d.is_empty())
        .unwrap_or(GENERAL_DOMAIN)
        .to_string();
    ConversationExample {
        turns: vec![
            Turn::new(Speaker::Human, format!("Text: {snippet}")),
            Turn::new(Speaker::Assistant, ACKNOWLEDGMENT),
            Turn::new(Speaker::Human, request_text(&domain)),
            Turn::new(Speaker::Assistant, format_term_list(terms)),
        ],
        domain,
    }
}

impl ConversationExample {
    /// Checks the canonical four-turn shape.
    pub fn validate(&self) -> Result<()> {
        let speakers: Vec<Speaker> = self.turns.iter().map(|t| t.speaker).collect();
        let expected = [Speaker::Human, Speaker::Assistant, Speaker::Human, Speaker::Assistant];
        if speakers != expected {
            return Err(Error::InvalidArgument(format!(
                "conversation must alternate human/assistant over 4 turns, got {speakers:?}"
            )));
        }
        if !self.turns[0].content.starts_with("Text: ") {
            return Err(Error::InvalidArgument("first turn must start with `Text: `".into()));
        }
        if self.turns[1].content != ACKNOWLEDGMENT {
            return Err(Error::InvalidArgument("second turn must be the acknowledgment".into()));
        }
        if self.turns[2].content != request_text(&self.domain) {
            return Err(Error::InvalidArgument("third turn does not name the domain".into()));
        }
        Ok(())
    }

    pub fn text(&self) -> &str {
        self.turns[0].content.strip_prefix("Text: ").unwrap_or(&self.turns[0].content)
    }

    pub fn terms(&self) -> Vec<String> {
        parse_term_list(&self.turns[3].content)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("conversation serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let conv: ConversationExample = serde_json::from_str(line)?;
        conv.validate()?;
        Ok(conv)
    }
}

pub fn write_conversations_jsonl(convs: &[ConversationExample]) -> String {
    let mut out = String::new();
    for c in convs {
        out.push_str(&c.to_json_line());
        out.push('\n');
    }
    out
}

pub fn parse_conversations_jsonl(input: &str) -> Result<Vec<ConversationExample>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            ConversationExample::from_json_line(line)
                .map_err(|e| Error::record(i + 1, "<conversation>", e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_turns() {
        let conv = to_conversation("Some text.", None, &["a".into(), "b c".into()]);
        assert_eq!(conv.domain, "General");
        assert_eq!(conv.turns[1].content, "I've read this text.");
        assert_eq!(
            conv.turns[2].content,
            "Please extract the terms from the text that are relevant to the domain: General."
        );
        assert_eq!(conv.turns[3].content, r#"["a", "b c"]"#);
        assert_eq!(conv.text(), "Some text.");
        assert_eq!(conv.terms(), vec!["a", "b c"]);
    }

    #[test]
    fn json_round_trip() {
        let conv = to_conversation("x \"quoted\" y", Some("Physics"), &["quoted".into()]);
        let line = conv.to_json_line();
        assert!(line.starts_with(r#"{"turns":[{"speaker":"human","content":"Text: x"#));
        assert!(line.ends_with(r#""domain":"Physics"}"#));
        assert_eq!(ConversationExample::from_json_line(&line).unwrap(), conv);
    }

    #[test]
    fn rejects_malformed() {
        let mut conv = to_conversation("t", None, &[]);
        conv.turns.pop();
        assert!(ConversationExample::from_json_line(&conv.to_json_line()).is_err());
        assert!(matches!(parse_conversations_jsonl("\nnot json"), Err(Error::Record { line: 2, .. })));
    }
}
