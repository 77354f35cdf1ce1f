//! Embedding-space dataset overlap.
//!
//! The directional overlap `O(A→B)` is the mean, over points `x` of `A`, of
//! the fraction of `x`'s `k` nearest neighbours (cosine distance, searched
//! over the pooled collection minus `x` itself) that belong to `B`. Search is
//! exact and quadratic in the number of points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPoint {
    pub dataset: String,
    pub id: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapMatrix {
    /// Dataset tags in lexicographic order; row and column index.
    pub datasets: Vec<String>,
    pub sizes: Vec<usize>,
    pub k: usize,
    /// `values[i][j]` is `O(datasets[i] → datasets[j])`.
    pub values: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.datasets.iter().position(|d| d == from)?;
        let j = self.datasets.iter().position(|d| d == to)?;
        Some(self.values[i][j])
    }
}

/// Checks a collection and returns its common dimension.
pub fn validate_points(points: &[EmbeddedPoint]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty point collection".into()))?;
    let dim = first.vector.len();
    if dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "point `{}/{}` has an empty vector",
            first.dataset, first.id
        )));
    }
    let mut keys = HashSet::with_capacity(points.len());
    for p in points {
        let name = || format!("{}/{}", p.dataset, p.id);
        if p.vector.len() != dim {
            return Err(Error::DimensionMismatch {
                id: name(),
                expected: dim,
                found: p.vector.len(),
            });
        }
        if p.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("point `{}` has non-finite entries", name())));
        }
        if p.vector.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument(format!("point `{}` is the zero vector", name())));
        }
        if !keys.insert((p.dataset.as_str(), p.id.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate point `{}`", name())));
        }
    }
    Ok(dim)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn directional_overlap(points: &[EmbeddedPoint], k: usize) -> Result<OverlapMatrix> {
    validate_points(points)?;
    if k == 0 || k > points.len() - 1 {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={} for {} points, got {k}",
            points.len().saturating_sub(1),
            points.len()
        )));
    }

    let datasets: Vec<String> = points
        .iter()
        .map(|p| p.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let tags: Vec<usize> = points.iter().map(|p| index[p.dataset.as_str()]).collect();
    let norms: Vec<f64> = points.iter().map(|p| norm(&p.vector)).collect();
    let order: Vec<usize> = (0..points.len()).collect();

    // Neighbour counts per target dataset for every query point.
    let per_query: Vec<Vec<usize>> = par::map(&order, |&q| {
        let mut neighbours: Vec<(f64, usize)> = (0..points.len())
            .filter(|&j| j != q)
            .map(|j| {
                let cos = dot(&points[q].vector, &points[j].vector) / (norms[q] * norms[j]);
                (1.0 - cos, j)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0)
                .then_with(|| points[a.1].dataset.cmp(&points[b.1].dataset))
                .then_with(|| points[a.1].id.cmp(&points[b.1].id))
        };
        if k < neighbours.len() {
            neighbours.select_nth_unstable_by(k - 1, cmp);
        }
        let mut counts = vec![0usize; datasets.len()];
        for &(_, j) in &neighbours[..k] {
            counts[tags[j]] += 1;
        }
        counts
    });

    let mut sizes = vec![0usize; datasets.len()];
    let mut totals = vec![vec![0usize; datasets.len()]; datasets.len()];
    for (q, counts) in per_query.iter().enumerate() {
        sizes[tags[q]] += 1;
        for (target, c) in counts.iter().enumerate() {
            totals[tags[q]][target] += c;
        }
    }
    let values = totals
        .iter()
        .zip(&sizes)
        .map(|(row, &size)| {
            row.iter()
                .map(|&c| c as f64 / (size * k) as f64)
                .collect()
        })
        .collect();
    Ok(OverlapMatrix {
        datasets,
        sizes,
        k,
        values,
    })
}

/// `S(A,B) = (O(A→B) + O(B→A)) / 2`.
pub fn symmetrized_overlap(m: &OverlapMatrix) -> Result<Vec<Vec<f64>>> {
    let n = m.values.len();
    if m.values.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("overlap matrix is not square".into()));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| (m.values[i][j] + m.values[j][i]) / 2.0)
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermOverlapCounts {
    pub datasets: Vec<String>,
    /// Diagonal: set sizes. Off-diagonal: intersection sizes.
    pub counts: Vec<Vec<usize>>,
}

/// Unique-term counts per dataset and pairwise shared-term counts, in the
/// order the sets are given.
pub fn unique_term_overlap(sets: &[(String, BTreeSet<String>)]) -> TermOverlapCounts {
    let counts = sets
        .iter()
        .map(|(_, a)| {
            sets.iter()
                .map(|(_, b)| a.intersection(b).count())
                .collect()
        })
        .collect();
    TermOverlapCounts {
        datasets: sets.iter().map(|(name, _)| name.clone()).collect(),
        counts,
    }
}

/// Rows are origins, columns targets, as tab-separated text. `percent`
/// scales values by 100 and prints one decimal.
pub fn matrix_tsv(labels: &[String], values: &[Vec<f64>], percent: bool) -> String {
    let mut out = String::from("origin");
    for label in labels {
        out.push('\t');
        out.push_str(label);
    }
    out.push('\n');
    for (label, row) in labels.iter().zip(values) {
        out.push_str(label);
        for v in row {
            if percent {
                let _ = write!(out, "\t{:.1}", v * 100.0);
            } else {
                let _ = write!(out, "\t{v}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_embeddings_jsonl(input: &str) -> Result<Vec<EmbeddedPoint>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str::<EmbeddedPoint>(line)
                .map_err(|e| Error::record(i + 1, "<record>", e.to_string()))
        })
        .collect()
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<EmbeddedPoint>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings_jsonl(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(dataset: &str, id: &str, vector: &[f64]) -> EmbeddedPoint {
        EmbeddedPoint {
            dataset: dataset.into(),
            id: id.into(),
            vector: vector.to_vec(),
        }
    }

    #[test]
    fn single_dataset_is_one() {
        let points = vec![pt("a", "1", &[1.0, 0.0]), pt("a", "2", &[0.0, 1.0]), pt("a", "3", &[1.0, 1.0])];
        for k in 1..=2 {
            let m = directional_overlap(&points, k).unwrap();
            assert_eq!(m.values, vec![vec![1.0]]);
        }
    }

    #[test]
    fn mirrored_datasets_are_symmetric() {
        let points = vec![
            pt("a", "1", &[1.0, 0.1]),
            pt("a", "2", &[0.1, 1.0]),
            pt("b", "1", &[1.0, 0.1]),
            pt("b", "2", &[0.1, 1.0]),
        ];
        let m = directional_overlap(&points, 1).unwrap();
        // Each point's nearest neighbour is its mirror in the other dataset.
        assert_eq!(m.values, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        for row in &m.values {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn ties_break_on_dataset_then_id() {
        let points = vec![
            pt("q", "x", &[1.0, 0.0]),
            pt("b", "2", &[2.0, 0.0]),
            pt("a", "9", &[3.0, 0.0]),
        ];
        let m = directional_overlap(&points, 1).unwrap();
        assert_eq!(m.get("q", "a"), Some(1.0));
    }

    #[test]
    fn invalid_inputs() {
        let points = vec![pt("a", "1", &[1.0, 0.0]), pt("b", "1", &[0.0, 1.0, 2.0])];
        assert!(matches!(
            directional_overlap(&points, 1),
            Err(Error::DimensionMismatch { id, .. }) if id == "b/1"
        ));
        let points = vec![pt("a", "1", &[1.0, 0.0]), pt("b", "1", &[0.0, 1.0])];
        assert!(directional_overlap(&points, 2).is_err());
        assert!(directional_overlap(&points, 0).is_err());
        assert!(directional_overlap(&[pt("a", "1", &[0.0, 0.0]), pt("a", "2", &[1.0, 0.0])], 1).is_err());
        assert!(directional_overlap(&[pt("a", "1", &[1.0]), pt("a", "1", &[2.0])], 1).is_err());
    }

    #[test]
    fn symmetrize_averages_directions() {
        let m = OverlapMatrix {
            datasets: vec!["a".into(), "b".into()],
            sizes: vec![1, 1],
            k: 1,
            values: vec![vec![0.8, 0.2], vec![0.4, 0.6]],
        };
        let s = symmetrized_overlap(&m).unwrap();
        assert!((s[0][1] - 0.3).abs() < 1e-15);
        assert_eq!(s[0][1], s[1][0]);
        let again = symmetrized_overlap(&OverlapMatrix { values: s.clone(), ..m }).unwrap();
        assert_eq!(again, s);
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn term_overlap_counts() {
        let sets = vec![
            ("a".to_string(), set(&["x", "y"])),
            ("b".to_string(), set(&["z"])),
            ("c".to_string(), set(&["x", "y"])),
        ];
        let c = unique_term_overlap(&sets);
        assert_eq!(c.counts, vec![vec![2, 0, 2], vec![0, 1, 0], vec![2, 0, 2]]);
    }

    #[test]
    fn tsv_layout() {
        let tsv = matrix_tsv(&["a".into(), "b".into()], &[vec![0.954, 0.046], vec![0.5, 0.5]], true);
        assert_eq!(tsv, "origin\ta\tb\na\t95.4\t4.6\nb\t50.0\t50.0\n");
    }

    #[test]
    fn embeddings_jsonl() {
        let points = parse_embeddings_jsonl("{\"dataset\":\"acl\",\"id\":\"1\",\"vector\":[0.5,1]}\n").unwrap();
        assert_eq!(points[0].vector, vec![0.5, 1.0]);
        assert!(matches!(
            parse_embeddings_jsonl("\n{\"dataset\":\"acl\"}"),
            Err(Error::Record { line: 2, .. })
        ));
    }
}
