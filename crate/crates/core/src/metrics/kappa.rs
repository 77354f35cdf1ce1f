use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Two raters' categorical labels over the same items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaInput {
    labels_a: Vec<String>,
    labels_b: Vec<String>,
}

impl KappaInput {
    pub fn new(labels_a: Vec<String>, labels_b: Vec<String>) -> Result<Self> {
        if labels_a.len() != labels_b.len() {
            return Err(Error::LengthMismatch {
                left: labels_a.len(),
                right: labels_b.len(),
            });
        }
        if labels_a.is_empty() {
            return Err(Error::InvalidArgument("kappa needs at least one item".into()));
        }
        Ok(KappaInput { labels_a, labels_b })
    }

    pub fn kappa(&self) -> KappaResult {
        cohens_kappa(&self.labels_a, &self.labels_b).expect("validated on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaResult {
    pub kappa: f64,
    /// Observed agreement `p_o`.
    pub observed: f64,
    /// Chance agreement `p_e` from the product of marginals.
    pub expected: f64,
    pub items: usize,
    /// Both raters used a single label each.
    pub degenerate: bool,
}

impl KappaResult {
    /// Landis & Koch band.
    pub fn interpretation(&self) -> &'static str {
        match self.kappa {
            k if k < 0.0 => "poor",
            k if k <= 0.20 => "slight",
            k if k <= 0.40 => "fair",
            k if k <= 0.60 => "moderate",
            k if k <= 0.80 => "substantial",
            _ => "almost perfect",
        }
    }
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)`.
///
/// Computed from integer counts as `(n*agree - S) / (n^2 - S)` with
/// `S = sum_c count_a(c) * count_b(c)`, so the result is symmetric in the
/// raters and invariant to item order bit for bit. When `p_e = 1` (both
/// raters constant and identical) kappa is 1.
pub fn cohens_kappa<T: Ord>(labels_a: &[T], labels_b: &[T]) -> Result<KappaResult> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    let n = labels_a.len();
    if n == 0 {
        return Err(Error::InvalidArgument("kappa needs at least one item".into()));
    }

    let mut marginals: BTreeMap<&T, (u128, u128)> = BTreeMap::new();
    let mut agree: u128 = 0;
    for (a, b) in labels_a.iter().zip(labels_b) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
        if a == b {
            agree += 1;
        }
    }
    let chance: u128 = marginals.values().map(|(ca, cb)| ca * cb).sum();
    let n2 = (n as u128) * (n as u128);

    let constant_a = marginals.values().filter(|(ca, _)| *ca > 0).count() == 1;
    let constant_b = marginals.values().filter(|(_, cb)| *cb > 0).count() == 1;
    let kappa = if chance == n2 {
        1.0
    } else {
        let numerator = (agree * n as u128) as i128 - chance as i128;
        numerator as f64 / (n2 - chance) as f64
    };
    Ok(KappaResult {
        kappa,
        observed: agree as f64 / n as f64,
        expected: chance as f64 / n2 as f64,
        items: n,
        degenerate: constant_a && constant_b,
    })
}
