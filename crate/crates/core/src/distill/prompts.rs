//! Prompt templates and placeholder substitution.

pub const ISO_DEFINITION: &str = "Terms are “the designation of a defined concept in a special language by a linguistic expression.” (ISO 1087).";

pub const TYPE_SYSTEM_PROMPT: &str = "You are a terminology research expert. Your task is to help the user by answering the following question.";

pub const TYPE_USER_TEMPLATE: &str = r#"### Context
- Terms are “the designation of a defined concept in a special language by a linguistic expression.” (ISO 1087).
- A term is a word or a phrase that has a specific meaning in a particular context, such as a scientific term or a technical concept.
- The goal is the identify domain-specific concepts not named entities.
- A numerical value or date is not considered a term.
- A organization, group or person is not considered a term.
- Any non-scientific content such as websites, URLs, email addresses, HTML tags, code snippets, etc, are not considered terms.
- A location (country, state, place, ...) is not considered a term.

### Instructions
- You will be given a question about a type of expressions in natural language.
- Your task is to determine whether the given expression is either:
    1) a term type, or
    0) no term in the sense of the definition above.
- Do not overthink the question. Answer based on your intuition and knowledge.
- If the context is not clear, use the most common interpretation of the expression type.
- After you explain your answer, produce a json object with the following format: { "answer": [Option Number] }, where [Option Number] is 0, 1, or 2.


### Question
Given expressions of the type {expression_type}, would you consider it
- a term (1), or
- no term (0)?

""""#;

pub const EXTRACTION_SYSTEM_PROMPT: &str = "You are a terminology research expert. Your task is to help the user extracting terms from scientific abstracts.";

pub const EXTRACTION_USER_TEMPLATE: &str = r#"### Context
- Terms are “the designation of a defined concept in a special language by a linguistic expression.” (ISO 1087).
- A term is a word or a phrase that has a specific meaning in a particular context/domain, such as a scientific term or a technical concept.
- Only extract terms that are relevant to the domain.
- The goal is to identify domain-specific concepts not named entities.
- A numerical value or date is not considered a term.
- An organization, group or person is not considered a term.
- A location (country, state, place, ...) is not considered a term.

### Instructions
- You will be given an excerpt from a scientific abstract.
- Your task is to extract all terms from the text.
- Please return only a comma separated list of correct extractions without any additional information.
- If there are no terms in the text, return an empty string.

### Question
The domain: {domain}
The abstract: {abstract}

## Return list of extracted terms:"#;

/// Context-enrichment block prepended to the first few-shot user turn.
pub const CE_BLOCK: &str = "Terms are “the designation of a defined concept in a special language by a linguistic expression.” (ISO 1087). A term is a word or a phrase that has a specific meaning in a particular context/domain, such as a scientific term or a technical concept.";

/// Fixed stem the assistant response starts with when response guidance is on.
pub const ARG_STEM: &str = "I have extracted the terms from the text. Here is the list of terms:";

pub const FEWSHOT_INSTRUCTION: &str = "Extract all terms from the following sentence and return them as a list.";

/// Substitutes `{name}` placeholders in one pass. Braces that do not form a
/// known placeholder are copied through, and substituted values are never
/// rescanned.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos + 1..];
        let hit = vars.iter().find(|(name, _)| {
            tail.strip_prefix(name).is_some_and(|t| t.starts_with('}'))
        });
        match hit {
            Some((name, value)) => {
                out.push_str(value);
                rest = &tail[name.len() + 1..];
            }
            None => {
                out.push('{');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn render_type_prompt(type_name: &str) -> (String, String) {
    (
        TYPE_SYSTEM_PROMPT.to_string(),
        render(TYPE_USER_TEMPLATE, &[("expression_type", type_name)]),
    )
}

/// An empty or blank domain renders as "General".
pub fn render_extraction_prompt(snippet: &str, domain: &str) -> (String, String) {
    let domain = if domain.trim().is_empty() {
        crate::corpus::GENERAL_DOMAIN
    } else {
        domain
    };
    (
        EXTRACTION_SYSTEM_PROMPT.to_string(),
        render(
            EXTRACTION_USER_TEMPLATE,
            &[("domain", domain), ("abstract", snippet)],
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_single_pass() {
        let out = render("{a} and {b} {c}", &[("a", "{b}"), ("b", "x")]);
        assert_eq!(out, "{b} and x {c}");
    }

    #[test]
    fn literal_braces_survive() {
        let (_, user) = render_type_prompt("disease");
        assert!(user.contains("{ \"answer\": [Option Number] }"));
        assert!(user.contains("Given expressions of the type disease, would"));
        assert!(user.ends_with("\"\"\""));
    }

    #[test]
    fn empty_domain_is_general() {
        let (_, user) = render_extraction_prompt("Some text.", "  ");
        assert!(user.contains("The domain: General\nThe abstract: Some text.\n"));
        assert!(!user.contains("{domain}"));
    }

    #[test]
    fn definition_is_shared() {
        assert!(TYPE_USER_TEMPLATE.contains(ISO_DEFINITION));
        assert!(EXTRACTION_USER_TEMPLATE.contains(ISO_DEFINITION));
        assert!(CE_BLOCK.starts_with(ISO_DEFINITION));
    }
}
