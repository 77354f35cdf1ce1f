//! Few-shot example selection and prompt assembly.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::prompts::{ARG_STEM, CE_BLOCK, FEWSHOT_INSTRUCTION};
use super::text::format_term_list;
use crate::error::{Error, Result};

pub const DEFAULT_SHOTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewshotExample {
    pub id: String,
    pub text: String,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTranscript {
    pub turns: Vec<ChatTurn>,
}

impl PromptTranscript {
    /// Plain-text rendering, one `[role]` header per turn.
    pub fn to_text(&self) -> String {
        let blocks: Vec<String> = self
            .turns
            .iter()
            .map(|t| {
                let role = match t.role {
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                format!("[{role}]\n{}\n", t.content)
            })
            .collect();
        blocks.join("\n")
    }
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
}

/// The `n` candidates most similar to `target`, most similar first. Ties go
/// to the smaller id.
pub fn select_fewshot_examples<'a>(
    target: &[f64],
    candidates: &'a [(FewshotExample, Vec<f64>)],
    n: usize,
) -> Result<Vec<&'a FewshotExample>> {
    if n > candidates.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n} examples from {} candidates",
            candidates.len()
        )));
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for (example, vector) in candidates {
        if vector.len() != target.len() {
            return Err(Error::DimensionMismatch {
                id: example.id.clone(),
                expected: target.len(),
                found: vector.len(),
            });
        }
        let sim = cosine(target, vector).ok_or_else(|| {
            Error::InvalidArgument(format!("zero vector for target or candidate `{}`", example.id))
        })?;
        scored.push((sim, example));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.1.id.cmp(&b.1.id))
    });
    Ok(scored.into_iter().take(n).map(|(_, e)| e).collect())
}

/// Builds the chat transcript. Context enrichment prepends the term
/// definition to the first user turn. Response guidance prefixes each
/// demonstration answer with the fixed stem and ends the transcript on an
/// assistant turn holding only the stem.
pub fn render_fewshot_prompt(
    examples: &[&FewshotExample],
    target_text: &str,
    enable_ce: bool,
    enable_arg: bool,
) -> Result<PromptTranscript> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("few-shot prompt needs at least one example".into()));
    }
    let mut turns = Vec::with_capacity(examples.len() * 2 + 2);
    for (i, example) in examples.iter().enumerate() {
        let mut user = String::new();
        if i == 0 {
            if enable_ce {
                user.push_str(CE_BLOCK);
                user.push_str("\n\n");
            }
            user.push_str(FEWSHOT_INSTRUCTION);
            user.push_str("\n\n");
        }
        user.push_str("Sentence: ");
        user.push_str(&example.text);
        turns.push(ChatTurn {
            role: Role::User,
            content: user,
        });
        let list = format_term_list(&example.terms);
        let answer = if enable_arg {
            format!("{ARG_STEM} {list}")
        } else {
            list
        };
        turns.push(ChatTurn {
            role: Role::Assistant,
            content: answer,
        });
    }
    turns.push(ChatTurn {
        role: Role::User,
        content: format!("Sentence: {target_text}"),
    });
    if enable_arg {
        turns.push(ChatTurn {
            role: Role::Assistant,
            content: ARG_STEM.to_string(),
        });
    }
    Ok(PromptTranscript { turns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: &str) -> FewshotExample {
        FewshotExample {
            id: id.into(),
            text: format!("text {id}"),
            terms: vec![format!("term {id}")],
        }
    }

    #[test]
    fn planted_nearest_ranks_first() {
        let candidates = vec![
            (ex("a"), vec![0.0, 1.0]),
            (ex("b"), vec![1.0, 0.2]),
            (ex("c"), vec![2.0, 0.0]),
        ];
        let picked = select_fewshot_examples(&[1.0, 0.0], &candidates, 3).unwrap();
        let ids: Vec<&str> = picked.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["c", "b", "a"]);
    }

    #[test]
    fn ties_use_id() {
        let candidates = vec![(ex("z"), vec![1.0]), (ex("m"), vec![3.0])];
        let picked = select_fewshot_examples(&[1.0], &candidates, 1).unwrap();
        assert_eq!(picked[0].id, "m");
    }

    #[test]
    fn selection_errors() {
        let candidates = vec![(ex("a"), vec![1.0, 0.0])];
        assert!(matches!(
            select_fewshot_examples(&[1.0], &candidates, 1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(select_fewshot_examples(&[1.0, 0.0], &candidates, 2).is_err());
    }

    #[test]
    fn flags_control_blocks() {
        let examples = [ex("a"), ex("b")];
        let refs: Vec<&FewshotExample> = examples.iter().collect();
        let plain = render_fewshot_prompt(&refs, "target", false, false).unwrap();
        let text = plain.to_text();
        assert!(!text.contains("ISO 1087") && !text.contains(ARG_STEM));
        assert_eq!(plain.turns.last().unwrap().content, "Sentence: target");

        let full = render_fewshot_prompt(&refs, "target", true, true).unwrap();
        assert!(full.turns[0].content.starts_with(CE_BLOCK));
        assert_eq!(full.turns.last().unwrap().role, Role::Assistant);
        assert_eq!(full.turns.last().unwrap().content, ARG_STEM);
        assert!(render_fewshot_prompt(&[], "t", true, true).is_err());
    }
}
