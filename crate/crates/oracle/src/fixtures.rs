//! Seeded random fixtures shared by the test suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{find_matches, normalize, Span};

const WORDS: &[&str] = &[
    "heart", "failure", "Heart", "acute", "wind", "turbine", "blade", "rotor", "art", "party",
    "FAILURE", "gear", "box", "gearbox", "tower",
];
const GLUE: &[&str] = &[" ", " ", " ", " ", ", ", ". ", "-", " (", ") "];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct MiniCorpus {
    /// `(id, text)` in corpus order.
    pub docs: Vec<(String, String)>,
    pub terms: Vec<String>,
    /// Predicted terms per document, free of case-folded duplicates.
    pub preds: Vec<Vec<String>>,
    /// Predicted spans per document: matches of predicted terms.
    pub seeds: Vec<Vec<Span>>,
    /// Gold spans per document, pairwise disjoint.
    pub gold: Vec<Vec<Span>>,
}

pub fn text(rng: &mut ChaCha8Rng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    let mut out = String::new();
    for i in 0..n {
        if i > 0 {
            out.push_str(GLUE.choose(rng).unwrap());
        }
        out.push_str(WORDS.choose(rng).unwrap());
    }
    out
}

pub fn term(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Up to `max_docs` documents and a pool of up to `max_terms` terms.
pub fn mini_corpus(seed: u64, max_docs: usize, max_terms: usize) -> MiniCorpus {
    let mut rng = rng(seed);
    let n_docs = rng.gen_range(1..=max_docs);
    let docs: Vec<(String, String)> = (0..n_docs)
        .map(|i| (format!("d{i:02}"), text(&mut rng, 25)))
        .collect();
    let n_terms = rng.gen_range(1..=max_terms);
    let mut terms: Vec<String> = Vec::new();
    for _ in 0..n_terms {
        let t = term(&mut rng);
        if !terms.iter().any(|u| normalize(u, true) == normalize(&t, true)) {
            terms.push(t);
        }
    }

    let mut preds = Vec::new();
    let mut seeds = Vec::new();
    let mut gold = Vec::new();
    for (_, text) in &docs {
        let p = rng.gen_range(0.0..0.6);
        let list: Vec<String> = terms.iter().filter(|_| rng.gen_bool(p)).cloned().collect();
        let mut spans: Vec<Span> = list
            .iter()
            .flat_map(|t| find_matches(text, t, true, true))
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        spans.sort();
        spans.dedup();
        seeds.push(spans);
        preds.push(list);

        let mut all: Vec<Span> = terms.iter().flat_map(|t| find_matches(text, t, true, true)).collect();
        all.shuffle(&mut rng);
        let mut chosen: Vec<Span> = Vec::new();
        for s in all {
            if rng.gen_bool(0.7) && chosen.iter().all(|c| c.1 <= s.0 || s.1 <= c.0) {
                chosen.push(s);
            }
        }
        chosen.sort();
        gold.push(chosen);
    }
    MiniCorpus {
        docs,
        terms,
        preds,
        seeds,
        gold,
    }
}

/// Random points in `datasets` tagged groups, each vector nonzero.
pub fn points(seed: u64, n: usize, dim: usize, datasets: usize) -> Vec<(String, String, Vec<f64>)> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let ds = format!("ds{}", rng.gen_range(0..datasets));
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if v.iter().all(|x| *x == 0.0) {
                v[0] = 1.0;
            }
            (ds, format!("p{i:03}"), v)
        })
        .collect()
}

/// Two raters' labels over `n` items drawn from `labels` categories.
pub fn rater_pair(seed: u64, n: usize, labels: usize) -> (Vec<String>, Vec<String>) {
    let mut rng = rng(seed);
    let draw = |rng: &mut ChaCha8Rng| format!("c{}", rng.gen_range(0..labels));
    let a: Vec<String> = (0..n).map(|_| draw(&mut rng)).collect();
    let b: Vec<String> = a
        .iter()
        .map(|x| if rng.gen_bool(0.6) { x.clone() } else { draw(&mut rng) })
        .collect();
    (a, b)
}
