//! Sentence snippeting and term-list parsing.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "Fig.", "Figs.", "Eq.", "Eqs.", "Ref.", "cf.", "vs.", "Dr.", "Mr.", "Mrs.",
    "Ms.", "Prof.", "No.", "approx.", "resp.", "Sec.",
];

fn guarded(text: &str, end: usize) -> bool {
    // `end` is the byte index just past the terminal period.
    let head = &text[..end];
    let start = head
        .rfind(char::is_whitespace)
        .map(|i| i + head[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let token = head[start..].trim_start_matches(['(', '[', '"', '\'', '“']);
    if ABBREVIATIONS.contains(&token) {
        return true;
    }
    if token == "al." {
        let before = head[..start].trim_end();
        return before.ends_with("et") && {
            let prefix = &before[..before.len() - 2];
            prefix.chars().next_back().is_none_or(|c| !c.is_alphanumeric())
        };
    }
    false
}

/// Splits on `.`, `!` or `?` followed by whitespace and an uppercase letter
/// or digit, skipping known abbreviations.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            let end = pos + c.len_utf8();
            if j > i + 1
                && j < chars.len()
                && (chars[j].1.is_uppercase() || chars[j].1.is_ascii_digit())
                && !(c == '.' && guarded(text, end))
            {
                let sentence = text[start..end].trim();
                if !sentence.is_empty() {
                    sentences.push(sentence);
                }
                start = chars[j].0;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences
}

/// Consecutive non-overlapping sentence pairs; an odd final sentence stands
/// alone. Each snippet is the original text span, whitespace included.
pub fn snippet_abstracts(text: &str) -> Vec<String> {
    let sentences = split_sentences(text);
    sentences
        .chunks(2)
        .map(|pair| {
            let first = pair[0];
            let last = pair[pair.len() - 1];
            let from = first.as_ptr() as usize - text.as_ptr() as usize;
            let to = last.as_ptr() as usize - text.as_ptr() as usize + last.len();
            text[from..to].to_string()
        })
        .collect()
}

static QUOTED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#""((?:[^"\\]|\\.)*)""#).expect("valid regex"));

fn strip_quotes(item: &str) -> &str {
    let item = item.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”')] {
        if let Some(inner) = item.strip_prefix(open).and_then(|s| s.strip_suffix(close)) {
            return inner.trim();
        }
    }
    item
}

fn comma_split(text: &str) -> Vec<String> {
    text.split(',').map(|s| strip_quotes(s).to_string()).collect()
}

fn bracket_items(inner: &str) -> Vec<String> {
    if let Ok(items) = serde_json::from_str::<Vec<String>>(&format!("[{inner}]")) {
        return items;
    }
    let quoted: Vec<String> = QUOTED
        .captures_iter(inner)
        .map(|c| {
            let raw = &c[0];
            serde_json::from_str::<String>(raw).unwrap_or_else(|_| c[1].to_string())
        })
        .collect();
    if quoted.is_empty() {
        comma_split(inner)
    } else {
        quoted
    }
}

/// Parses a bracketed quoted list or a bare comma-separated list. Items are
/// trimmed, empties dropped and case-insensitive duplicates removed, keeping
/// the first casing.
pub fn parse_term_list(response: &str) -> Vec<String> {
    let text = response.trim();
    let items = match text.strip_prefix('[') {
        Some(body) => match body.rfind(']') {
            Some(close) => bracket_items(&body[..close]),
            None => comma_split(body),
        },
        None => comma_split(text),
    };
    let mut seen = HashSet::new();
    items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty() && seen.insert(s.to_lowercase()))
        .collect()
}

/// Renders `["a", "b"]` with JSON string escaping.
pub fn format_term_list(terms: &[String]) -> String {
    let items: Vec<String> = terms
        .iter()
        .map(|t| serde_json::to_string(t).expect("strings serialize"))
        .collect();
    format!("[{}]", items.join(", "))
}
