//! CoNLL-style IOB ingestion: `token<TAB>tag` rows, blank lines between
//! sentences, and either `-DOCSTART-` rows or `# doc_id = ...` comments
//! between documents.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::io::nfc;
use super::{Document, TermOccurrence};
use crate::error::{Error, Result};

const DOCSTART: &str = "-DOCSTART-";
const DOC_ID_PREFIX: &str = "doc_id =";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IobTag {
    B,
    I,
    O,
}

impl IobTag {
    /// Accepts `B`, `I`, `O` with an optional `-TYPE` or `_TYPE` suffix.
    pub fn parse(raw: &str) -> Option<IobTag> {
        let mut chars = raw.trim().chars();
        let head = chars.next()?;
        let rest = chars.as_str();
        if !(rest.is_empty() || rest.starts_with('-') || rest.starts_with('_')) {
            return None;
        }
        match head {
            'B' => Some(IobTag::B),
            'I' => Some(IobTag::I),
            'O' if rest.is_empty() => Some(IobTag::O),
            _ => None,
        }
    }
}

impl fmt::Display for IobTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IobTag::B => "B",
            IobTag::I => "I",
            IobTag::O => "O",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IobRow {
    pub token: String,
    pub tag: IobTag,
}

/// A decoded document: text rebuilt by single-space joining of its tokens and
/// the spans of its maximal `B I*` runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IobDocument {
    pub id: String,
    pub text: String,
    pub occurrences: Vec<TermOccurrence>,
}

impl IobDocument {
    pub fn to_document(&self) -> Document {
        Document::new(self.id.clone(), self.text.clone())
    }
}

/// A non-fatal repair made while decoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IobDiagnostic {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IobDecoded {
    pub documents: Vec<IobDocument>,
    pub diagnostics: Vec<IobDiagnostic>,
}

struct RawDocument {
    id: Option<String>,
    // (line number, row); `None` marks a sentence break.
    rows: Vec<Option<(usize, IobRow)>>,
}

impl RawDocument {
    fn new(id: Option<String>) -> Self {
        RawDocument { id, rows: Vec::new() }
    }

    fn has_tokens(&self) -> bool {
        self.rows.iter().any(Option::is_some)
    }
}

/// Parses the textual format into per-document rows (sentence breaks kept).
fn parse_raw(input: &str) -> Result<Vec<RawDocument>> {
    let mut docs = vec![RawDocument::new(None)];
    for (i, line) in input.lines().enumerate() {
        let row_no = i + 1;
        let trimmed = line.trim();
        let current = docs.last_mut().expect("at least one document");

        if trimmed.is_empty() {
            current.rows.push(None);
            continue;
        }
        if trimmed.starts_with('#') && !line.contains('\t') {
            let comment = trimmed.trim_start_matches('#').trim();
            if let Some(id) = comment.strip_prefix(DOC_ID_PREFIX) {
                let id = id.trim().to_string();
                if current.has_tokens() || current.id.is_some() {
                    docs.push(RawDocument::new(Some(id)));
                } else {
                    current.id = Some(id);
                }
            }
            continue;
        }

        let mut fields = line.split('\t');
        let token = fields.next().unwrap_or_default().trim();
        let tag = fields.next_back().map(str::trim);
        if token == DOCSTART {
            if current.has_tokens() || current.id.is_some() {
                docs.push(RawDocument::new(None));
            }
            continue;
        }
        let Some(tag) = tag else {
            return Err(Error::MalformedRow {
                row: row_no,
                message: "expected `token<TAB>tag`".into(),
            });
        };
        if token.is_empty() {
            return Err(Error::MalformedRow {
                row: row_no,
                message: "empty token".into(),
            });
        }
        let tag = IobTag::parse(tag).ok_or_else(|| Error::UnknownTag {
            row: row_no,
            tag: tag.to_string(),
        })?;
        current.rows.push(Some((
            row_no,
            IobRow {
                token: nfc(token),
                tag,
            },
        )));
    }
    docs.retain(|d| d.has_tokens() || d.id.is_some());
    Ok(docs)
}

/// Decodes IOB text. Documents without an explicit id are named
/// `default_id` (if the input holds a single document) or
/// `default_id-N` (1-based) otherwise.
///
/// An `I` after `O` or at a sentence start is repaired to `B` and reported
/// in the diagnostics.
pub fn decode_iob(input: &str, default_id: &str) -> Result<IobDecoded> {
    let raw = parse_raw(input)?;
    let single = raw.len() == 1;
    let mut decoded = IobDecoded::default();

    for (index, doc) in raw.into_iter().enumerate() {
        let id = doc.id.unwrap_or_else(|| {
            if single {
                default_id.to_string()
            } else {
                format!("{default_id}-{}", index + 1)
            }
        });
        let mut text = String::new();
        let mut offset = 0usize;
        let mut spans: Vec<(usize, usize)> = Vec::new();
        let mut open: Option<(usize, usize)> = None;

        for entry in doc.rows {
            let Some((row_no, row)) = entry else {
                spans.extend(open.take());
                continue;
            };
            if !text.is_empty() {
                text.push(' ');
                offset += 1;
            }
            let start = offset;
            offset += row.token.chars().count();
            text.push_str(&row.token);

            match row.tag {
                IobTag::O => spans.extend(open.take()),
                IobTag::B => {
                    spans.extend(open.take());
                    open = Some((start, offset));
                }
                IobTag::I => match open.as_mut() {
                    Some(span) => span.1 = offset,
                    None => {
                        decoded.diagnostics.push(IobDiagnostic {
                            row: row_no,
                            message: format!("orphan I tag on `{}` repaired to B", row.token),
                        });
                        open = Some((start, offset));
                    }
                },
            }
        }
        spans.extend(open.take());

        let chars: Vec<char> = text.chars().collect();
        let occurrences = spans
            .into_iter()
            .map(|(s, e)| TermOccurrence::new(chars[s..e].iter().collect::<String>(), s, e))
            .collect();
        decoded.documents.push(IobDocument {
            id,
            text,
            occurrences,
        });
    }
    Ok(decoded)
}

/// Reads an IOB file, or every regular file of a directory in name order.
pub fn load_iob(path: impl AsRef<Path>) -> Result<IobDecoded> {
    let path = path.as_ref();
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut all = IobDecoded::default();
        for file in files {
            let part = decode_iob(&read(&file)?, &stem(&file))?;
            all.documents.extend(part.documents);
            all.diagnostics.extend(part.diagnostics);
        }
        Ok(all)
    } else {
        decode_iob(&read(path)?, &stem(path))
    }
}

/// Parses rows of a single document, ignoring sentence and document markers.
pub fn parse_iob_rows(input: &str) -> Result<Vec<IobRow>> {
    Ok(parse_raw(input)?
        .into_iter()
        .flat_map(|d| d.rows.into_iter().flatten().map(|(_, row)| row))
        .collect())
}

/// Tags the whitespace tokens of `document` from a set of occurrences.
///
/// Occurrences must not overlap and must start and end on token boundaries.
pub fn encode_iob(document: &Document, occurrences: &[TermOccurrence]) -> Result<Vec<IobRow>> {
    let mut tokens: Vec<(usize, usize, String)> = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut pos = 0;
    for c in document.text.chars() {
        if c.is_whitespace() {
            if let Some((start, token)) = current.take() {
                tokens.push((start, pos, token));
            }
        } else {
            current.get_or_insert_with(|| (pos, String::new())).1.push(c);
        }
        pos += 1;
    }
    if let Some((start, token)) = current.take() {
        tokens.push((start, pos, token));
    }

    let mut sorted: Vec<&TermOccurrence> = occurrences.iter().collect();
    sorted.sort_by_key(|o| (o.start, o.end));
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(Error::OverlappingSpans {
                first: pair[0].span(),
                second: pair[1].span(),
            });
        }
    }
    for occ in &sorted {
        occ.validate_in(document)?;
    }

    let mut tags = vec![IobTag::O; tokens.len()];
    for occ in sorted {
        let first = tokens.iter().position(|t| t.0 == occ.start);
        let last = tokens.iter().position(|t| t.1 == occ.end);
        match (first, last) {
            (Some(first), Some(last)) if first <= last => {
                tags[first] = IobTag::B;
                for tag in &mut tags[first + 1..=last] {
                    *tag = IobTag::I;
                }
            }
            _ => {
                return Err(Error::MisalignedSpan {
                    start: occ.start,
                    end: occ.end,
                })
            }
        }
    }

    Ok(tokens
        .into_iter()
        .zip(tags)
        .map(|((_, _, token), tag)| IobRow { token, tag })
        .collect())
}

/// Writes documents in the comment-delimited form.
pub fn write_iob<'a, W, I>(docs: I, mut out: W) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a [IobRow])>,
{
    for (id, rows) in docs {
        writeln!(out, "# {DOC_ID_PREFIX} {id}")?;
        for row in rows {
            writeln!(out, "{}\t{}", row.token, row.tag)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
