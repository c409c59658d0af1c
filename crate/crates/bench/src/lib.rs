//! Seeded fixtures shared by the benchmarks.

use hyperbox_core::synthetic::Taxonomy;
use hyperbox_core::training::init_params;
use hyperbox_core::{Lexicon, ModelParams, TermId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Freshly initialized parameters with box dimension `d` over `m`-dimensional embeddings.
pub fn model(d: usize, m: usize, seed: u64) -> ModelParams {
    init_params(d, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `n` random words with vectors uniform in `[-1, 1]^m`.
pub fn lexicon(n: usize, m: usize, seed: u64) -> (Lexicon, Vec<TermId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lex = Lexicon::new(m);
    let ids = (0..n)
        .map(|i| lex.insert(&format!("w{i}"), (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    (lex, ids)
}

/// The 85-node acceptance taxonomy.
pub fn taxonomy(seed: u64) -> Taxonomy {
    Taxonomy::generate(3, 4, 20, &mut ChaCha8Rng::seed_from_u64(seed))
}
