//! Ranking candidate hypernyms for query terms.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::Result;
use crate::eval::MAX_PREDICTIONS;
use crate::lexicon::{Lexicon, TermId};
use crate::model::{score_pair, ModelParams, Projected, ScoringBoxes};

/// Default length of a prediction list.
pub const DEFAULT_TOP_K: usize = MAX_PREDICTIONS;

/// Best candidates for one query, lowest score first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPrediction {
    pub query: String,
    pub ranked: Vec<(String, f64)>,
}

impl RankedPrediction {
    pub fn empty(query: impl Into<String>) -> Self {
        RankedPrediction {
            query: query.into(),
            ranked: Vec::new(),
        }
    }

    pub fn terms(&self) -> Vec<&str> {
        self.ranked.iter().map(|(t, _)| t.as_str()).collect()
    }
}

/// Scores every candidate as a hypernym of `query`; the query itself is skipped.
pub fn score_candidates<S: AsRef<str>, V: AsRef<[f64]>>(
    query: &str,
    query_embedding: &[f64],
    candidates: &[(S, V)],
    params: &ModelParams,
) -> Result<Vec<(String, f64)>> {
    candidates
        .iter()
        .filter(|(term, _)| term.as_ref() != query)
        .map(|(term, e)| {
            let s = score_pair(query_embedding, e.as_ref(), params)?;
            Ok((term.as_ref().to_string(), s))
        })
        .collect()
}

/// Ascending score, ties broken by term; truncated to `k`.
pub fn top_k(query: &str, mut scored: Vec<(String, f64)>, k: usize) -> RankedPrediction {
    if scored.len() > k && k > 0 {
        scored.select_nth_unstable_by(k - 1, rank_order);
    }
    scored.truncate(k);
    scored.sort_by(rank_order);
    RankedPrediction {
        query: query.to_string(),
        ranked: scored,
    }
}

/// Candidate set with base positions and bumps cached for one parameter set.
pub struct CandidateIndex<'a> {
    lexicon: &'a Lexicon,
    params: &'a ModelParams,
    boxes: ScoringBoxes,
    ids: Vec<TermId>,
    projected: Vec<Projected>,
}

impl<'a> CandidateIndex<'a> {
    pub fn new(params: &'a ModelParams, lexicon: &'a Lexicon, candidates: &[TermId]) -> Self {
        let projected = candidates
            .par_iter()
            .map(|&id| Projected::new(params, lexicon.vector(id)))
            .collect();
        CandidateIndex {
            lexicon,
            params,
            boxes: ScoringBoxes::new(params),
            ids: candidates.to_vec(),
            projected,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ranks candidates for an interned query, keeping the best `k`.
    pub fn rank(&self, query: TermId, k: usize) -> RankedPrediction {
        let q = Projected::new(self.params, self.lexicon.vector(query));
        let scored = self
            .ids
            .iter()
            .zip(&self.projected)
            .filter(|(&id, _)| id != query)
            .map(|(&id, cand)| (self.lexicon.term(id).to_string(), q.score_with(cand, &self.boxes)))
            .collect();
        top_k(self.lexicon.term(query), scored, k)
    }

    /// Ranks a batch of queries in parallel, preserving order. `None`
    /// entries (queries without an embedding) yield empty predictions.
    pub fn rank_all(&self, queries: &[(String, Option<TermId>)], k: usize) -> Vec<RankedPrediction> {
        queries
            .par_iter()
            .map(|(term, id)| match id {
                Some(id) => self.rank(*id, k),
                None => RankedPrediction::empty(term.clone()),
            })
            .collect()
    }
}

/// Ordering used by [`top_k`], exposed for callers that sort their own lists.
pub fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}
