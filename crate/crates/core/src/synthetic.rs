//! Synthetic taxonomies with random embeddings, for end-to-end checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{EmbeddingTable, GoldStandard, Query, QuerySet};
use crate::eval::MAX_PREDICTIONS;
use crate::lexicon::{Lexicon, TermId};
use crate::training::{TrainingPair, TrainingSet};

/// A complete tree; node 0 is the root.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    pub names: Vec<String>,
    pub parent: Vec<Option<usize>>,
    pub embeddings: Vec<Vec<f64>>,
}

impl Taxonomy {
    /// Complete `branching`-ary tree with `depth` levels below the root and
    /// unit-Gaussian embeddings of length `m`. Node names are two words
    /// (`"concept 17"`) so multi-word handling gets exercised.
    pub fn generate<R: Rng + ?Sized>(depth: usize, branching: usize, m: usize, rng: &mut R) -> Self {
        let mut parent = vec![None];
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * branching);
            for &p in &frontier {
                for _ in 0..branching {
                    next.push(parent.len());
                    parent.push(Some(p));
                }
            }
            frontier = next;
        }
        let names = (0..parent.len()).map(|i| format!("concept {i}")).collect();
        let embeddings = (0..parent.len())
            .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        Taxonomy {
            names,
            parent,
            embeddings,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Parent first, root last.
    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    /// Every `(node, ancestor)` pair.
    pub fn num_pairs(&self) -> usize {
        (0..self.len()).map(|n| self.ancestors(n).len()).sum()
    }

    pub fn embedding_table(&self) -> EmbeddingTable {
        let dim = self.embeddings.first().map_or(0, Vec::len);
        let mut table = EmbeddingTable::new(dim);
        for (name, v) in self.names.iter().zip(&self.embeddings) {
            table.insert(name, v.clone()).expect("synthetic names are unique");
        }
        table
    }

    /// Lexicon whose ids coincide with node indices.
    pub fn lexicon(&self) -> Lexicon {
        let dim = self.embeddings.first().map_or(0, Vec::len);
        let mut lex = Lexicon::new(dim);
        for (name, v) in self.names.iter().zip(&self.embeddings) {
            lex.insert(name, v.clone());
        }
        lex
    }

    pub fn node_ids(&self) -> Vec<TermId> {
        (0..self.len() as u32).map(TermId).collect()
    }

    /// Positives are all `(node, ancestor)` pairs.
    pub fn training_set(&self) -> TrainingSet {
        let pairs = (0..self.len())
            .flat_map(|n| {
                self.ancestors(n).into_iter().map(move |a| TrainingPair {
                    hyponym: TermId(n as u32),
                    hypernym: TermId(a as u32),
                })
            })
            .collect();
        TrainingSet::from_pairs(pairs)
    }

    /// One query per non-root node, gold = its ancestors.
    pub fn queries_and_gold(&self) -> (QuerySet, GoldStandard) {
        let nodes = 1..self.len();
        let queries = nodes
            .clone()
            .map(|n| Query {
                term: self.names[n].clone(),
                kind: "Concept".into(),
            })
            .collect();
        let hypernyms = nodes
            .map(|n| self.ancestors(n).into_iter().map(|a| self.names[a].clone()).collect())
            .collect();
        (QuerySet { queries }, GoldStandard { hypernyms })
    }
}

/// Expected MRR of a uniformly random ranking of `candidates` items, scored
/// on the top 15, for queries with the given numbers of gold items.
pub fn random_ranking_mrr(candidates: usize, gold_sizes: &[usize]) -> f64 {
    if gold_sizes.is_empty() {
        return 0.0;
    }
    let expected_rr = |g: usize| {
        let mut none_before = 1.0;
        let mut rr = 0.0;
        for r in 1..=MAX_PREDICTIONS.min(candidates) {
            let remaining = (candidates - r + 1) as f64;
            let hit = (g as f64 / remaining).min(1.0);
            rr += none_before * hit / r as f64;
            none_before *= 1.0 - hit;
        }
        rr
    };
    gold_sizes.iter().map(|&g| expected_rr(g)).sum::<f64>() / gold_sizes.len() as f64
}
