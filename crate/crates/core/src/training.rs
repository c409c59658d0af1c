//! Negative-sampling training of the projections and boxes.
//!
//! Pretrained word vectors stay frozen; only `phi_base`, `phi_bump` and the
//! four box corners are optimized. Each mini-batch draws `k` corrupted
//! hypernyms per positive pair, sums the per-pair loss gradients in a fixed
//! order and applies one Adam update, so a seed fully determines the result.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::{debug, info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{EmbeddingTable, GoldStandard, QuerySet};
use crate::discovery::CandidateIndex;
use crate::error::{Error, Result};
use crate::eval::{reciprocal_rank, MAX_PREDICTIONS};
use crate::lexicon::{Lexicon, TermId};
use crate::model::{score_pair, BoxParams, Matrix, ModelParams, Projected, ScoringBoxes};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Box dimension `d`.
    pub dim: usize,
    pub learning_rate: f64,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Margin `γ` of the loss.
    pub margin: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            learning_rate: 0.001,
            negatives: 100,
            margin: 2.0,
            epochs: 50,
            batch_size: 128,
            seed: 42,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 {
            return fail("dimension must be positive".into());
        }
        if self.negatives == 0 {
            return fail("number of negatives must be positive".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be positive".into());
        }
        for (name, v) in [
            ("learning rate", self.learning_rate),
            ("margin", self.margin),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v > 0.0 && v < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

/// A supervised `(hyponym, hypernym)` example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrainingPair {
    pub hyponym: TermId,
    pub hypernym: TermId,
}

/// Training pairs plus, for each hyponym, every gold hypernym (negatives avoid all of them).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub pairs: Vec<TrainingPair>,
    pub gold: BTreeMap<TermId, BTreeSet<TermId>>,
}

impl TrainingSet {
    pub fn from_pairs(pairs: Vec<TrainingPair>) -> Self {
        let mut gold: BTreeMap<TermId, BTreeSet<TermId>> = BTreeMap::new();
        for p in &pairs {
            gold.entry(p.hyponym).or_default().insert(p.hypernym);
        }
        TrainingSet { pairs, gold }
    }
}

/// Result of [`expand_gold`] with out-of-vocabulary accounting.
#[derive(Debug, Clone, Default)]
pub struct Expansion {
    pub set: TrainingSet,
    /// `(query, hypernym)` combinations dropped for a missing embedding.
    pub dropped_pairs: usize,
    /// Queries whose own term has no embedding.
    pub dropped_queries: usize,
    /// Queries whose gold line was empty.
    pub empty_gold: usize,
}

/// One pair per `(query, gold hypernym)`; pairs with an unresolvable term are dropped and counted.
pub fn expand_gold(
    queries: &QuerySet,
    gold: &GoldStandard,
    table: &EmbeddingTable,
    lexicon: &mut Lexicon,
) -> Result<Expansion> {
    if queries.len() != gold.len() {
        return Err(Error::Misaligned {
            line: queries.len().min(gold.len()) + 1,
            queries: queries.len(),
            gold: gold.len(),
        });
    }
    let mut out = Expansion::default();
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, (query, hypernyms)) in queries.queries.iter().zip(&gold.hypernyms).enumerate() {
        if hypernyms.is_empty() {
            warn!("query {:?} (line {}) has no gold hypernyms", query.term, lineno + 1);
            out.empty_gold += 1;
            continue;
        }
        let Some(hyponym) = lexicon.resolve(&query.term, table) else {
            out.dropped_queries += 1;
            out.dropped_pairs += hypernyms.len();
            continue;
        };
        for h in hypernyms {
            match lexicon.resolve(h, table) {
                Some(hypernym) => {
                    let pair = TrainingPair { hyponym, hypernym };
                    if seen.insert(pair) {
                        pairs.push(pair);
                    }
                }
                None => out.dropped_pairs += 1,
            }
        }
    }
    if out.dropped_pairs > 0 {
        warn!(
            "dropped {} training pairs ({} queries) without embeddings",
            out.dropped_pairs, out.dropped_queries
        );
    }
    out.set = TrainingSet::from_pairs(pairs);
    Ok(out)
}

/// Draws `k` hypernym corruptions for `pair`, uniformly with replacement from
/// `candidates` minus `gold`. The hyponym is never corrupted.
pub fn sample_negatives<R: Rng + ?Sized>(
    pair: &TrainingPair,
    gold: &BTreeSet<TermId>,
    candidates: &[TermId],
    k: usize,
    rng: &mut R,
) -> Result<Vec<TermId>> {
    if !candidates.iter().any(|c| !gold.contains(c)) {
        return Err(Error::EmptyCandidatePool {
            query: format!("term #{}", pair.hyponym.0),
        });
    }
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let c = candidates[rng.random_range(0..candidates.len())];
        if !gold.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// `log σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    // log σ(x) = -softplus(-x) = min(x, 0) - ln(1 + e^{-|x|})
    x.min(0.0) - (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(γ - pos) - (1/k) Σ log σ(neg_i - γ)`.
pub fn nsa_loss(pos_score: f64, neg_scores: &[f64], gamma: f64) -> f64 {
    nsa_loss_grad(pos_score, neg_scores, gamma).0
}

/// Loss together with its derivatives with respect to the positive and each negative score.
pub fn nsa_loss_grad(pos_score: f64, neg_scores: &[f64], gamma: f64) -> (f64, f64, Vec<f64>) {
    assert!(
        !neg_scores.is_empty(),
        "negative-sampling loss needs at least one negative"
    );
    let k = neg_scores.len() as f64;
    let neg_loss: f64 = neg_scores.iter().map(|&s| log_sigmoid(s - gamma)).sum::<f64>() / k;
    let loss = -log_sigmoid(gamma - pos_score) - neg_loss;
    let d_pos = sigmoid(pos_score - gamma);
    let d_neg = neg_scores.iter().map(|&s| -sigmoid(gamma - s) / k).collect();
    (loss, d_pos, d_neg)
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: ModelParams,
    pub second_moment: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(like: &ModelParams) -> Self {
        let zeros = ModelParams::zeros(like.box_dim(), like.embedding_dim());
        AdamState {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut ModelParams, grads: &ModelParams, state: &mut AdamState, config: &TrainConfig) {
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - config.beta1.powi(t);
    let bias2 = 1.0 - config.beta2.powi(t);
    let (b1, b2, lr, eps) = (config.beta1, config.beta2, config.learning_rate, config.epsilon);
    let blocks = params.blocks_mut().into_iter().zip(grads.blocks()).zip(
        state
            .first_moment
            .blocks_mut()
            .into_iter()
            .zip(state.second_moment.blocks_mut()),
    );
    for ((theta, g), (m, v)) in blocks {
        for i in 0..theta.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Projection entries uniform in `±sqrt(6 / (d + m))`, box corners uniform in `[-0.5, 0.5]`.
pub fn init_params<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> ModelParams {
    let bound = (6.0 / (d + m) as f64).sqrt();
    let matrix = |rng: &mut R| {
        let data = (0..d * m).map(|_| rng.random_range(-bound..=bound)).collect();
        Matrix::from_vec(d, m, data).expect("shape")
    };
    let phi_base = matrix(rng);
    let phi_bump = matrix(rng);
    let corner = |rng: &mut R| (0..d).map(|_| rng.random_range(-0.5..=0.5)).collect::<Vec<f64>>();
    let head_box = BoxParams {
        corner_p: corner(rng),
        corner_q: corner(rng),
    };
    let tail_box = BoxParams {
        corner_p: corner(rng),
        corner_q: corner(rng),
    };
    ModelParams {
        phi_base,
        phi_bump,
        head_box,
        tail_box,
    }
}

/// Held-out queries for model selection.
#[derive(Debug, Clone, Default)]
pub struct ValidationSet {
    /// Query term and its id, `None` when it has no embedding.
    pub queries: Vec<(String, Option<TermId>)>,
    pub gold: Vec<HashSet<String>>,
}

impl ValidationSet {
    pub fn resolve(
        queries: &QuerySet,
        gold: &GoldStandard,
        table: &EmbeddingTable,
        lexicon: &mut Lexicon,
    ) -> Result<Self> {
        if queries.len() != gold.len() {
            return Err(Error::Misaligned {
                line: queries.len().min(gold.len()) + 1,
                queries: queries.len(),
                gold: gold.len(),
            });
        }
        Ok(ValidationSet {
            queries: queries
                .queries
                .iter()
                .map(|q| (q.term.clone(), lexicon.resolve(&q.term, table)))
                .collect(),
            gold: gold.hypernyms.iter().map(|g| g.iter().cloned().collect()).collect(),
        })
    }

    /// Uses a training set as its own validation set.
    pub fn from_training(set: &TrainingSet, lexicon: &Lexicon) -> Self {
        let (queries, gold) = set
            .gold
            .iter()
            .map(|(&q, hs)| {
                (
                    (lexicon.term(q).to_string(), Some(q)),
                    hs.iter().map(|&h| lexicon.term(h).to_string()).collect(),
                )
            })
            .unzip();
        ValidationSet { queries, gold }
    }

    /// MRR of top-15 rankings over queries with a non-empty gold list.
    pub fn mrr(&self, params: &ModelParams, lexicon: &Lexicon, candidates: &[TermId]) -> f64 {
        let index = CandidateIndex::new(params, lexicon, candidates);
        let ranked = index.rank_all(&self.queries, MAX_PREDICTIONS);
        let (sum, n) = ranked
            .iter()
            .zip(&self.gold)
            .filter(|(_, g)| !g.is_empty())
            .fold((0.0, 0usize), |(sum, n), (r, g)| {
                (sum + reciprocal_rank(&r.terms(), g), n + 1)
            });
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub validation_mrr: Option<f64>,
}

impl EpochLog {
    /// `epoch<TAB>mean loss<TAB>validation MRR` (MRR column `NA` without validation).
    pub fn to_tsv(&self) -> String {
        match self.validation_mrr {
            Some(mrr) => format!("{}\t{:.6}\t{:.6}", self.epoch, self.mean_loss, mrr),
            None => format!("{}\t{:.6}\tNA", self.epoch, self.mean_loss),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch (last epoch without validation).
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
    /// 0 when no epoch ran.
    pub best_epoch: usize,
}

/// Gradient contribution of a single positive pair and its negatives.
struct PairContribution {
    loss: f64,
    head_box: BoxParams,
    tail_box: BoxParams,
    /// `(term, coefficient for phi_base, coefficient for phi_bump)`; the
    /// projection gradient is `Σ coeff ⊗ embedding(term)`.
    coeffs: Vec<(TermId, Vec<f64>, Vec<f64>)>,
}

fn pair_contribution(
    pair: &TrainingPair,
    negatives: &[TermId],
    projected: &BTreeMap<TermId, Projected>,
    params: &ModelParams,
    gamma: f64,
    weight: f64,
) -> PairContribution {
    let d = params.box_dim();
    let query = &projected[&pair.hyponym];
    let boxes = ScoringBoxes::new(params);
    let pos_score = query.score_with(&projected[&pair.hypernym], &boxes);
    let neg_scores: Vec<f64> = negatives
        .iter()
        .map(|n| query.score_with(&projected[n], &boxes))
        .collect();
    let (loss, d_pos, d_neg) = nsa_loss_grad(pos_score, &neg_scores, gamma);

    let mut head_box = BoxParams::zeros(d);
    let mut tail_box = BoxParams::zeros(d);
    let mut q_base = vec![0.0; d];
    let mut q_bump = vec![0.0; d];
    let mut coeffs = Vec::with_capacity(negatives.len() + 2);
    let targets = std::iter::once((pair.hypernym, d_pos)).chain(negatives.iter().copied().zip(d_neg));
    for (term, d_score) in targets {
        let w = weight * d_score;
        if w == 0.0 {
            continue;
        }
        let pg = query.score_grad_with(&projected[&term], params, w, &mut head_box, &mut tail_box);
        // head point = base(query) + bump(term); tail point = base(term) + bump(query)
        for j in 0..d {
            q_base[j] += w * pg.d_head[j];
            q_bump[j] += w * pg.d_tail[j];
        }
        let t_base = pg.d_tail.iter().map(|g| w * g).collect();
        let t_bump = pg.d_head.iter().map(|g| w * g).collect();
        coeffs.push((term, t_base, t_bump));
    }
    coeffs.push((pair.hyponym, q_base, q_bump));
    PairContribution {
        loss,
        head_box,
        tail_box,
        coeffs,
    }
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x;
    }
}

/// `matrix += Σ coeff ⊗ embedding`, one row per task, terms in the given order.
fn add_outer_sum(matrix: &mut Matrix, terms: &[(&[f64], &[f64])]) {
    let cols = matrix.cols().max(1);
    matrix
        .as_mut_slice()
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(r, row)| {
            for (coeff, e) in terms {
                let c = coeff[r];
                if c != 0.0 {
                    for (x, v) in row.iter_mut().zip(*e) {
                        *x += c * v;
                    }
                }
            }
        });
}

/// Gradient of the mean loss over `batch` plus the summed (unweighted) loss.
fn batch_gradient(
    batch: &[(TrainingPair, Vec<TermId>)],
    params: &ModelParams,
    lexicon: &Lexicon,
    gamma: f64,
) -> (ModelParams, f64) {
    let terms: BTreeSet<TermId> = batch
        .iter()
        .flat_map(|(p, negs)| [p.hyponym, p.hypernym].into_iter().chain(negs.iter().copied()))
        .collect();
    let projected: BTreeMap<TermId, Projected> = terms
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|id| (id, Projected::new(params, lexicon.vector(id))))
        .collect();

    let weight = 1.0 / batch.len() as f64;
    let contributions: Vec<PairContribution> = batch
        .par_iter()
        .map(|(pair, negs)| pair_contribution(pair, negs, &projected, params, gamma, weight))
        .collect();

    let d = params.box_dim();
    let m = params.embedding_dim();
    let mut grad = ModelParams::zeros(d, m);
    let mut total_loss = 0.0;
    let mut coeffs: BTreeMap<TermId, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for c in &contributions {
        total_loss += c.loss;
        add_into(&mut grad.head_box.corner_p, &c.head_box.corner_p);
        add_into(&mut grad.head_box.corner_q, &c.head_box.corner_q);
        add_into(&mut grad.tail_box.corner_p, &c.tail_box.corner_p);
        add_into(&mut grad.tail_box.corner_q, &c.tail_box.corner_q);
        for (term, base, bump) in &c.coeffs {
            let entry = coeffs.entry(*term).or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            add_into(&mut entry.0, base);
            add_into(&mut entry.1, bump);
        }
    }

    let base: Vec<(&[f64], &[f64])> = coeffs
        .iter()
        .map(|(id, (c, _))| (c.as_slice(), lexicon.vector(*id)))
        .collect();
    let bump: Vec<(&[f64], &[f64])> = coeffs
        .iter()
        .map(|(id, (_, c))| (c.as_slice(), lexicon.vector(*id)))
        .collect();
    add_outer_sum(&mut grad.phi_base, &base);
    add_outer_sum(&mut grad.phi_bump, &bump);
    (grad, total_loss)
}

/// Trains from seeded initial parameters.
pub fn train(
    config: &TrainConfig,
    data: &TrainingSet,
    candidates: &[TermId],
    lexicon: &Lexicon,
    validation: Option<&ValidationSet>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.pairs.is_empty() {
        return Err(Error::InvalidConfig("no training pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = init_params(config.dim, lexicon.dim(), &mut rng);
    train_from(config, params, &mut rng, data, candidates, lexicon, validation)
}

/// Trains starting from `params`, drawing shuffles and negatives from `rng`.
pub fn train_from(
    config: &TrainConfig,
    mut params: ModelParams,
    rng: &mut ChaCha8Rng,
    data: &TrainingSet,
    candidates: &[TermId],
    lexicon: &Lexicon,
    validation: Option<&ValidationSet>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if params.embedding_dim() != lexicon.dim() {
        return Err(Error::DimensionMismatch {
            context: "model embedding dimension vs lexicon",
            expected: params.embedding_dim(),
            found: lexicon.dim(),
        });
    }
    let empty = BTreeSet::new();
    for (q, gold) in &data.gold {
        if !candidates.iter().any(|c| !gold.contains(c)) {
            return Err(Error::EmptyCandidatePool {
                query: lexicon.term(*q).to_string(),
            });
        }
    }

    let mut state = AdamState::new(&params);
    let mut order: Vec<usize> = (0..data.pairs.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        for (batch_no, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = chunk
                .iter()
                .map(|&i| {
                    let pair = data.pairs[i];
                    let gold = data.gold.get(&pair.hyponym).unwrap_or(&empty);
                    sample_negatives(&pair, gold, candidates, config.negatives, rng).map(|n| (pair, n))
                })
                .collect::<Result<Vec<_>>>()?;
            let (grad, loss) = batch_gradient(&batch, &params, lexicon, config.margin);
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss",
                    epoch,
                    batch: batch_no,
                    block: "-",
                });
            }
            if let Some(block) = grad.first_non_finite_block() {
                return Err(Error::NonFinite {
                    what: "gradient",
                    epoch,
                    batch: batch_no,
                    block,
                });
            }
            adam_step(&mut params, &grad, &mut state, config);
            if let Some(block) = params.first_non_finite_block() {
                return Err(Error::NonFinite {
                    what: "parameter",
                    epoch,
                    batch: batch_no,
                    block,
                });
            }
            epoch_loss += loss;
        }
        let mean_loss = epoch_loss / data.pairs.len() as f64;
        let validation_mrr = validation.map(|v| v.mrr(&params, lexicon, candidates));
        let entry = EpochLog {
            epoch,
            mean_loss,
            validation_mrr,
        };
        info!("{}", entry.to_tsv());
        log.push(entry);

        match validation_mrr {
            Some(mrr) if best.as_ref().is_none_or(|(b, _, _)| mrr > *b) => {
                debug!("epoch {epoch}: new best validation MRR {mrr:.4}");
                best = Some((mrr, epoch, params.clone()));
            }
            Some(_) => {}
            None => best = Some((f64::NAN, epoch, params.clone())),
        }
    }

    let (best_epoch, params) = match best {
        Some((_, epoch, p)) => (epoch, p),
        None => (0, params),
    };
    Ok(TrainOutcome {
        params,
        log,
        best_epoch,
    })
}

/// Total (summed) loss over `batch` and its gradient; exposed for gradient checks.
pub fn loss_and_gradient(
    batch: &[(TrainingPair, Vec<TermId>)],
    params: &ModelParams,
    lexicon: &Lexicon,
    gamma: f64,
) -> (f64, ModelParams) {
    let (mut grad, loss) = batch_gradient(batch, params, lexicon, gamma);
    let n = batch.len() as f64;
    for block in grad.blocks_mut() {
        for g in block {
            *g *= n;
        }
    }
    (loss, grad)
}

/// Summed loss over `batch`, computed through the public scoring path.
pub fn total_loss(batch: &[(TrainingPair, Vec<TermId>)], params: &ModelParams, lexicon: &Lexicon, gamma: f64) -> f64 {
    batch
        .iter()
        .map(|(pair, negs)| {
            let score = |a: TermId, b: TermId| {
                score_pair(lexicon.vector(a), lexicon.vector(b), params).expect("lexicon and model dimensions agree")
            };
            let pos = score(pair.hyponym, pair.hypernym);
            let neg: Vec<f64> = negs.iter().map(|&n| score(pair.hyponym, n)).collect();
            nsa_loss(pos, &neg, gamma)
        })
        .sum()
}
