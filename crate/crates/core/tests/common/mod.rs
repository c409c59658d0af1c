//! Independent oracles shared by the integration tests and the acceptance suite.
//!
//! Nothing here calls into the analytic gradient or the metric implementations
//! under test; the gradient oracle only uses forward evaluations and the
//! metric oracle recomputes every quantity from its definition.

#![allow(dead_code)]

use std::collections::HashSet;

use hyperbox_core::model::{BoxParams, Matrix, ModelParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_REL_TOL: f64 = 1e-4;
/// Only keeps `0 / 0` out of the relative error; the comparison is otherwise purely relative.
pub const GRAD_ABS_FLOOR: f64 = f64::MIN_POSITIVE;

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Generic parameters: Gaussian projections (scaled) and boxes in `[-1, 1]`.
pub fn random_params(rng: &mut ChaCha8Rng, d: usize, m: usize) -> ModelParams {
    let scale = 1.0 / (m as f64).sqrt();
    let matrix = |rng: &mut ChaCha8Rng| {
        Matrix::from_vec(d, m, gaussian_vec(rng, d * m).into_iter().map(|x| x * scale).collect()).unwrap()
    };
    let phi_base = matrix(rng);
    let phi_bump = matrix(rng);
    let head = BoxParams::new(uniform_vec(rng, d, -1.0, 1.0), uniform_vec(rng, d, -1.0, 1.0)).unwrap();
    let tail = BoxParams::new(uniform_vec(rng, d, -1.0, 1.0), uniform_vec(rng, d, -1.0, 1.0)).unwrap();
    ModelParams::new(phi_base, phi_bump, head, tail).unwrap()
}

/// Central-difference gradient of `f` with respect to every parameter.
pub fn fd_gradient(params: &ModelParams, f: impl Fn(&ModelParams) -> f64) -> ModelParams {
    let mut grad = ModelParams::zeros(params.box_dim(), params.embedding_dim());
    let mut work = params.clone();
    for b in 0..6 {
        let len = params.blocks()[b].len();
        for i in 0..len {
            let orig = params.blocks()[b][i];
            work.blocks_mut()[b][i] = orig + FD_STEP;
            let up = f(&work);
            work.blocks_mut()[b][i] = orig - FD_STEP;
            let down = f(&work);
            work.blocks_mut()[b][i] = orig;
            grad.blocks_mut()[b][i] = (up - down) / (2.0 * FD_STEP);
        }
    }
    grad
}

/// Largest `|a - n| / max(|a|, |n|, GRAD_ABS_FLOOR)` over all entries.
pub fn max_relative_error(analytic: &ModelParams, numeric: &ModelParams) -> f64 {
    analytic
        .blocks()
        .iter()
        .zip(numeric.blocks())
        .flat_map(|(a, n)| a.iter().zip(n.iter()))
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(GRAD_ABS_FLOOR))
        .fold(0.0, f64::max)
}

fn pair_points(e_i: &[f64], e_j: &[f64], p: &ModelParams) -> (Vec<f64>, Vec<f64>) {
    let mv = |m: &Matrix, v: &[f64]| -> Vec<f64> {
        (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| m.get(r, c) * v[c]).sum())
            .collect()
    };
    let (bi, ui) = (mv(&p.phi_base, e_i), mv(&p.phi_bump, e_i));
    let (bj, uj) = (mv(&p.phi_base, e_j), mv(&p.phi_bump, e_j));
    let head = bi.iter().zip(&uj).map(|(a, b)| a + b).collect();
    let tail = bj.iter().zip(&ui).map(|(a, b)| a + b).collect();
    (head, tail)
}

/// Distance from `(e_i, e_j)` to the nearest nonsmooth point of the score:
/// a box bound, a box center, a corner tie, or a zero distance vector.
pub fn kink_distance(e_i: &[f64], e_j: &[f64], p: &ModelParams) -> f64 {
    let (head, tail) = pair_points(e_i, e_j, p);
    let mut best = f64::INFINITY;
    for (x, bx) in [(&head, &p.head_box), (&tail, &p.tail_box)] {
        let mut all_centered = 0.0f64;
        for ((&xj, &a), &b) in x.iter().zip(&bx.corner_p).zip(&bx.corner_q) {
            let (l, u) = (a.min(b), a.max(b));
            let c = (l + u) / 2.0;
            best = best
                .min((xj - l).abs())
                .min((xj - u).abs())
                .min((xj - c).abs())
                .min((a - b).abs());
            all_centered = all_centered.max((xj - c).abs());
        }
        best = best.min(all_centered);
    }
    best
}

/// How far a single central-difference step can move a final point.
pub fn fd_reach(embeddings: &[&[f64]]) -> f64 {
    let widest = embeddings
        .iter()
        .map(|e| e.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    FD_STEP * (1.0 + 2.0 * widest)
}

/// Brute-force scorer: MRR, MAP, P@1, P@3, P@5, P@15 averaged over queries
/// with a non-empty gold set, top-15 truncation, AP normalized by
/// `min(|gold|, 15)`. Predictions are assumed free of duplicates.
pub fn brute_force_scores(predictions: &[Vec<String>], gold: &[Vec<String>]) -> [f64; 6] {
    let mut sums = [0.0; 6];
    let mut n = 0usize;
    for (preds, gold) in predictions.iter().zip(gold) {
        let gold: HashSet<&str> = gold.iter().map(String::as_str).collect();
        if gold.is_empty() {
            continue;
        }
        n += 1;
        let top: Vec<&str> = preds.iter().take(15).map(String::as_str).collect();
        let mut rr = 0.0;
        for (i, p) in top.iter().enumerate() {
            if gold.contains(p) {
                rr = 1.0 / (i + 1) as f64;
                break;
            }
        }
        let mut ap = 0.0;
        for k in 1..=top.len() {
            if gold.contains(top[k - 1]) {
                let hits = top[..k].iter().filter(|p| gold.contains(*p)).count();
                ap += hits as f64 / k as f64;
            }
        }
        ap /= gold.len().min(15) as f64;
        let p_at = |k: usize| top.iter().take(k).filter(|p| gold.contains(*p)).count() as f64 / k as f64;
        let q = [rr, ap, p_at(1), p_at(3), p_at(5), p_at(15)];
        for (s, v) in sums.iter_mut().zip(q) {
            *s += v;
        }
    }
    if n > 0 {
        for s in &mut sums {
            *s /= n as f64;
        }
    }
    sums
}

/// Random `(predictions, gold)` lists over a small vocabulary. Prediction
/// lists run past 15 entries so truncation is exercised; some gold lists are empty.
pub fn random_eval_set(rng: &mut ChaCha8Rng, queries: usize) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let vocab: Vec<String> = (0..40).map(|i| format!("t{i}")).collect();
    let draw = |rng: &mut ChaCha8Rng, n: usize| {
        let mut pool = vocab.clone();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n.min(pool.len()) {
            let i = rng.random_range(0..pool.len());
            out.push(pool.swap_remove(i));
        }
        out
    };
    let mut preds = Vec::with_capacity(queries);
    let mut gold = Vec::with_capacity(queries);
    for _ in 0..queries {
        let np = rng.random_range(0..25);
        let ng = if rng.random_bool(0.05) {
            0
        } else {
            rng.random_range(1..20)
        };
        preds.push(draw(rng, np));
        gold.push(draw(rng, ng));
    }
    (preds, gold)
}
