//! Ranking metrics over top-15 hypernym lists: MRR, MAP and P@k.
//!
//! Every metric first truncates the prediction list to [`MAX_PREDICTIONS`]
//! and counts each gold term at most once, so repeated predictions cannot
//! push a score above 1.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::data::{parse_gold, parse_predictions};
use crate::error::{Error, Result};

/// Only the first 15 predictions per query are scored.
pub const MAX_PREDICTIONS: usize = 15;

/// Cutoffs reported for P@k.
pub const PRECISION_CUTOFFS: [usize; 4] = [1, 3, 5, 15];

/// Ranks (1-based) of predictions that hit a not-yet-seen gold term.
fn hit_ranks<'a, S: AsRef<str>>(predictions: &'a [S], gold: &'a HashSet<String>) -> impl Iterator<Item = usize> + 'a {
    let mut seen = HashSet::new();
    predictions
        .iter()
        .take(MAX_PREDICTIONS)
        .map(|p| p.as_ref())
        .enumerate()
        .filter(move |&(_, p)| gold.contains(p) && seen.insert(p))
        .map(|(i, _)| i + 1)
}

/// `1 / rank` of the first correct prediction, 0 without a hit.
pub fn reciprocal_rank<S: AsRef<str>>(predictions: &[S], gold: &HashSet<String>) -> f64 {
    hit_ranks(predictions, gold)
        .next()
        .map_or(0.0, |rank| 1.0 / rank as f64)
}

/// Sum of precision at each hit rank, divided by `min(|gold|, 15)`: the
/// most hits a 15-item list can hold, so a perfect list scores 1.
pub fn average_precision<S: AsRef<str>>(predictions: &[S], gold: &HashSet<String>) -> f64 {
    let denom = gold.len().min(MAX_PREDICTIONS);
    if denom == 0 {
        return 0.0;
    }
    let total: f64 = hit_ranks(predictions, gold)
        .enumerate()
        .map(|(hits_before, rank)| (hits_before + 1) as f64 / rank as f64)
        .sum();
    total / denom as f64
}

/// `|top-k ∩ gold| / k`.
pub fn precision_at_k<S: AsRef<str>>(predictions: &[S], gold: &HashSet<String>, k: usize) -> f64 {
    assert!(k >= 1, "precision cutoff must be at least 1");
    let hits = hit_ranks(predictions, gold).filter(|&r| r <= k).count();
    hits as f64 / k as f64
}

/// Metrics of one query, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryMetrics {
    pub reciprocal_rank: f64,
    pub average_precision: f64,
    pub precision: [f64; PRECISION_CUTOFFS.len()],
}

impl QueryMetrics {
    pub fn score<S: AsRef<str>>(predictions: &[S], gold: &HashSet<String>) -> Self {
        QueryMetrics {
            reciprocal_rank: reciprocal_rank(predictions, gold),
            average_precision: average_precision(predictions, gold),
            precision: PRECISION_CUTOFFS.map(|k| precision_at_k(predictions, gold, k)),
        }
    }
}

/// Averages over all queries with a non-empty gold list.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mrr: f64,
    pub map: f64,
    /// P@k for each entry of [`PRECISION_CUTOFFS`].
    pub precision: [f64; PRECISION_CUTOFFS.len()],
    /// Queries that contributed to the averages.
    pub num_queries: usize,
    /// Queries skipped because their gold list was empty.
    pub skipped_empty_gold: usize,
    /// Scored queries whose prediction line was empty.
    pub empty_predictions: usize,
}

impl EvalReport {
    pub fn precision_at(&self, k: usize) -> Option<f64> {
        PRECISION_CUTOFFS
            .iter()
            .position(|&c| c == k)
            .map(|i| self.precision[i])
    }

    pub fn header() -> &'static str {
        "MRR\tMAP\tP@1\tP@3\tP@5\tP@15"
    }
}

/// Tab-separated MRR, MAP, P@1, P@3, P@5, P@15, scaled by 100 with two decimals.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}\t{:.2}", self.mrr * 100.0, self.map * 100.0)?;
        for p in self.precision {
            write!(f, "\t{:.2}", p * 100.0)?;
        }
        Ok(())
    }
}

/// Scores line-aligned prediction and gold lists.
pub fn evaluate<P: AsRef<str>, G: AsRef<str>>(predictions: &[Vec<P>], gold: &[Vec<G>]) -> Result<EvalReport> {
    if predictions.len() != gold.len() {
        return Err(Error::LineCountMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    let mut report = EvalReport {
        mrr: 0.0,
        map: 0.0,
        precision: [0.0; PRECISION_CUTOFFS.len()],
        num_queries: 0,
        skipped_empty_gold: 0,
        empty_predictions: 0,
    };
    for (preds, gold) in predictions.iter().zip(gold) {
        let gold: HashSet<String> = gold.iter().map(|g| g.as_ref().to_string()).collect();
        if gold.is_empty() {
            report.skipped_empty_gold += 1;
            continue;
        }
        if preds.is_empty() {
            report.empty_predictions += 1;
        }
        let q = QueryMetrics::score(preds, &gold);
        report.num_queries += 1;
        report.mrr += q.reciprocal_rank;
        report.map += q.average_precision;
        for (acc, p) in report.precision.iter_mut().zip(q.precision) {
            *acc += p;
        }
    }
    if report.num_queries > 0 {
        let n = report.num_queries as f64;
        report.mrr /= n;
        report.map /= n;
        for p in &mut report.precision {
            *p /= n;
        }
    }
    Ok(report)
}

pub fn evaluate_files(predictions: impl AsRef<Path>, gold: impl AsRef<Path>) -> Result<EvalReport> {
    let predictions = parse_predictions(predictions)?;
    let gold = parse_gold(gold)?;
    evaluate(&predictions, &gold.hypernyms)
}
