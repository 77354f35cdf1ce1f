//! Slow, direct reference implementations of the termkit algorithms.
//!
//! Everything here works on plain strings, tuples and vectors so that tests
//! can compare the library against code that shares none of its internals.

pub mod fixtures;

use std::collections::{BTreeMap, BTreeSet};

/// Span as `(start, end)` in scalar values, half-open.
pub type Span = (usize, usize);

pub fn fold(s: &str, case_fold: bool) -> Vec<char> {
    s.chars()
        .map(|c| {
            if !case_fold {
                return c;
            }
            let lower: String = c.to_lowercase().collect();
            if lower.chars().count() == 1 {
                lower.chars().next().unwrap()
            } else {
                c
            }
        })
        .collect()
}

pub fn normalize(term: &str, case_fold: bool) -> String {
    fold(term.trim(), case_fold).into_iter().collect()
}

/// Every `(start, end)` whose text equals `term` after folding, checked by
/// comparing each window of the term's length in full.
pub fn find_matches(text: &str, term: &str, case_fold: bool, word_boundary: bool) -> Vec<Span> {
    let raw: Vec<char> = text.chars().collect();
    let hay = fold(text, case_fold);
    let needle = fold(term.trim(), case_fold);
    let mut out = Vec::new();
    if needle.is_empty() {
        return out;
    }
    for start in 0..hay.len() {
        let end = start + needle.len();
        if end > hay.len() || hay[start..end] != needle[..] {
            continue;
        }
        if word_boundary {
            let left_ok = start == 0 || !raw[start - 1].is_alphanumeric();
            let right_ok = end == raw.len() || !raw[end].is_alphanumeric();
            if !(left_ok && right_ok) {
                continue;
            }
        }
        out.push((start, end));
    }
    out
}

pub fn slice(text: &str, span: Span) -> String {
    text.chars().skip(span.0).take(span.1 - span.0).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct MatchFlags {
    pub case_fold: bool,
    pub word_boundary: bool,
    pub allow_overlaps: bool,
}

impl Default for MatchFlags {
    fn default() -> Self {
        MatchFlags {
            case_fold: true,
            word_boundary: true,
            allow_overlaps: false,
        }
    }
}

struct Candidate {
    tier: usize,
    key: String,
    span: Span,
}

fn candidates(text: &str, tiers: &[Vec<String>], flags: MatchFlags) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (tier, terms) in tiers.iter().enumerate() {
        for term in terms {
            for span in find_matches(text, term, flags.case_fold, flags.word_boundary) {
                out.push(Candidate {
                    tier,
                    key: normalize(term, flags.case_fold),
                    span,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (a.tier, usize::MAX - (a.span.1 - a.span.0), a.span.0, &a.key)
            .cmp(&(b.tier, usize::MAX - (b.span.1 - b.span.0), b.span.0, &b.key))
    });
    out
}

/// Document consistency with a per-character occupancy bitmap: seeds claim
/// their characters first, then candidates in priority order claim theirs
/// when all are free.
pub fn dc_bitmap(text: &str, seeds: &[Span], tiers: &[Vec<String>], flags: MatchFlags) -> Vec<Span> {
    let n = text.chars().count();
    let mut taken = vec![false; n];
    let mut out: Vec<Span> = seeds.to_vec();
    for &(s, e) in seeds {
        for t in taken.iter_mut().take(e).skip(s) {
            *t = true;
        }
    }
    for c in candidates(text, tiers, flags) {
        let (s, e) = c.span;
        if flags.allow_overlaps {
            out.push(c.span);
        } else if taken[s..e].iter().all(|t| !t) {
            taken[s..e].iter_mut().for_each(|t| *t = true);
            out.push(c.span);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Document consistency by exhaustive search: the unique candidate subset in
/// which every candidate is present exactly when it overlaps no seed and no
/// chosen candidate of higher priority. Only usable for small candidate
/// counts. Returns `None` when there are more than `limit` candidates.
pub fn dc_subsets(
    text: &str,
    seeds: &[Span],
    tiers: &[Vec<String>],
    flags: MatchFlags,
    limit: usize,
) -> Option<Vec<Span>> {
    let cands = candidates(text, tiers, flags);
    if cands.len() > limit {
        return None;
    }
    let overlaps = |a: Span, b: Span| a.0 < b.1 && b.0 < a.1;
    let mut found = None;
    for mask in 0u64..(1u64 << cands.len()) {
        let chosen = |i: usize| mask & (1 << i) != 0;
        let consistent = (0..cands.len()).all(|i| {
            let blocked = seeds.iter().any(|&s| overlaps(s, cands[i].span))
                || (0..i).any(|j| chosen(j) && overlaps(cands[j].span, cands[i].span));
            chosen(i) != blocked
        });
        if consistent {
            assert!(found.is_none(), "greedy characterization must be unique");
            let mut spans: Vec<Span> = seeds.to_vec();
            spans.extend((0..cands.len()).filter(|&i| chosen(i)).map(|i| cands[i].span));
            spans.sort();
            spans.dedup();
            found = Some(spans);
        }
    }
    found
}

/// Corpus consistency. `preds[i]` lists the terms predicted for `docs[i]`
/// (already free of normalized duplicates). Returns the augmented lists and
/// the terms promoted per document, in order.
pub fn cc(
    docs: &[String],
    preds: &[Vec<String>],
    threshold: f64,
    flags: MatchFlags,
) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut out: Vec<Vec<String>> = preds.to_vec();
    let mut added: Vec<Vec<String>> = vec![Vec::new(); docs.len()];
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for list in preds {
        for term in list {
            let key = normalize(term, flags.case_fold);
            if !key.is_empty() && seen.insert(key.clone()) {
                order.push((key, term.trim().to_string()));
            }
        }
    }
    for (key, surface) in order {
        let containing: Vec<usize> = (0..docs.len())
            .filter(|&i| !find_matches(&docs[i], &surface, flags.case_fold, flags.word_boundary).is_empty())
            .collect();
        let extracted = containing
            .iter()
            .filter(|&&i| preds[i].iter().any(|t| normalize(t, flags.case_fold) == key))
            .count();
        if containing.is_empty() || (extracted as f64 / containing.len() as f64) < threshold {
            continue;
        }
        for i in containing {
            if !out[i].iter().any(|t| normalize(t, flags.case_fold) == key) {
                out[i].push(surface.clone());
                added[i].push(surface.clone());
            }
        }
    }
    (out, added)
}

/// `(P, R, F1)` from raw counts with the empty-side conventions.
pub fn prf(matched: usize, predicted: usize, gold: usize) -> (f64, f64, f64) {
    if predicted == 0 && gold == 0 {
        return (1.0, 1.0, 1.0);
    }
    if predicted == 0 || gold == 0 {
        return (0.0, 0.0, 0.0);
    }
    let p = matched as f64 / predicted as f64;
    let r = matched as f64 / gold as f64;
    let f = if matched == 0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Pooled type-level counts over normalized term sets.
pub fn corpus_counts(gold: &[String], predicted: &[String], case_fold: bool) -> (usize, usize, usize) {
    let g: BTreeSet<String> = gold.iter().map(|t| normalize(t, case_fold)).filter(|t| !t.is_empty()).collect();
    let p: BTreeSet<String> = predicted.iter().map(|t| normalize(t, case_fold)).filter(|t| !t.is_empty()).collect();
    let matched = p.iter().filter(|t| g.contains(*t)).count();
    (matched, p.len(), g.len())
}

/// Maximum bipartite matching between predicted and gold spans, edges
/// joining identical spans, by augmenting paths.
pub fn max_span_matching(gold: &[Span], predicted: &[Span]) -> usize {
    fn augment(p: usize, gold: &[Span], predicted: &[Span], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for g in 0..gold.len() {
            if gold[g] != predicted[p] || seen[g] {
                continue;
            }
            seen[g] = true;
            if owner[g].is_none_or(|q| augment(q, gold, predicted, seen, owner)) {
                owner[g] = Some(p);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; gold.len()];
    (0..predicted.len())
        .filter(|&p| augment(p, gold, predicted, &mut vec![false; gold.len()], &mut owner))
        .count()
}

/// Macro-averaged document scores: `(P, R, harmonic F1 of P and R, mean F1)`.
pub fn macro_scores(per_doc: &[(usize, usize, usize)]) -> (f64, f64, f64, f64) {
    if per_doc.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let n = per_doc.len() as f64;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for &(m, pr, g) in per_doc {
        let s = prf(m, pr, g);
        p += s.0;
        r += s.1;
        f += s.2;
    }
    let (p, r) = (p / n, r / n);
    let h = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, h, f / n)
}

/// Cohen's kappa from the textbook definition.
pub fn kappa(a: &[String], b: &[String]) -> f64 {
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let labels: BTreeSet<&String> = a.iter().chain(b).collect();
    let expected: f64 = labels
        .iter()
        .map(|l| {
            let pa = a.iter().filter(|x| x == l).count() as f64 / n;
            let pb = b.iter().filter(|x| x == l).count() as f64 / n;
            pa * pb
        })
        .sum();
    if expected == 1.0 {
        return 1.0;
    }
    (observed - expected) / (1.0 - expected)
}

/// Median, averaging the two central values for even sizes.
pub fn median(values: &[usize]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort();
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[n / 2] as f64),
        n => Some((v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0),
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// Directional k-NN overlap by fully sorting every point's neighbours.
/// Points are `(dataset, id, vector)`; the result is keyed by
/// `(origin, target)` over the sorted dataset tags.
pub fn knn_overlap(points: &[(String, String, Vec<f64>)], k: usize) -> BTreeMap<(String, String), f64> {
    let tags: BTreeSet<&String> = points.iter().map(|p| &p.0).collect();
    let mut hits: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut sizes: BTreeMap<&String, usize> = BTreeMap::new();
    for (qi, q) in points.iter().enumerate() {
        *sizes.entry(&q.0).or_default() += 1;
        let mut others: Vec<(f64, &String, &String)> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != qi)
            .map(|(_, p)| (cosine_distance(&q.2, &p.2), &p.0, &p.1))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));
        for (_, ds, _) in others.into_iter().take(k) {
            *hits.entry((q.0.clone(), ds.clone())).or_default() += 1;
        }
    }
    let mut out = BTreeMap::new();
    for a in &tags {
        for b in &tags {
            let h = hits.get(&((*a).clone(), (*b).clone())).copied().unwrap_or(0);
            out.insert(((*a).clone(), (*b).clone()), h as f64 / (sizes[a] * k) as f64);
        }
    }
    out
}

/// Ids of the `n` candidates closest to `target` by cosine similarity,
/// ties by id, after sorting all of them.
pub fn top_similar(target: &[f64], candidates: &[(String, Vec<f64>)], n: usize) -> Vec<String> {
    let mut scored: Vec<(f64, &String)> = candidates
        .iter()
        .map(|(id, v)| (1.0 - cosine_distance(target, v), id))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(n).map(|(_, id)| id.clone()).collect()
}

/// Keeps entities whose type is labeled as a term in `table`
/// (`type -> is_term`); unknown types are dropped.
pub fn filter_by_table(
    records: &[Vec<(String, String)>],
    table: &BTreeMap<String, bool>,
) -> Vec<Vec<(String, String)>> {
    records
        .iter()
        .map(|entities| {
            entities
                .iter()
                .filter(|(_, t)| table.get(t) == Some(&true))
                .cloned()
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_respect_boundaries() {
        assert_eq!(find_matches("art party art", "art", true, true), vec![(0, 3), (10, 13)]);
        assert_eq!(find_matches("aaaa", "aa", false, false), vec![(0, 2), (1, 3), (2, 4)]);
    }

    #[test]
    fn subsets_agree_with_bitmap() {
        let text = "heart failure and failure of the heart failure";
        let tiers = vec![vec!["heart failure".to_string(), "failure".to_string()]];
        let flags = MatchFlags::default();
        assert_eq!(dc_subsets(text, &[], &tiers, flags, 16), Some(dc_bitmap(text, &[], &tiers, flags)));
    }

    #[test]
    fn worked_prf() {
        let (_, _, f) = prf(2, 3, 4);
        assert!((f - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(max_span_matching(&[(0, 1), (0, 1), (2, 3)], &[(0, 1), (2, 3), (2, 3)]), 2);
    }

    #[test]
    fn kappa_examples() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(kappa(&s(&["a", "b"]), &s(&["a", "b"])), 1.0);
        assert_eq!(kappa(&s(&["a", "a", "b", "b"]), &s(&["a", "b", "a", "b"])), 0.0);
    }
}
