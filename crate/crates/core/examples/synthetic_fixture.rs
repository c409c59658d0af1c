//! Writes a synthetic taxonomy as CLI input files.
//!
//! ```text
//! cargo run -p hyperbox-core --example synthetic_fixture -- OUT_DIR [SEED]
//! ```
//!
//! Produces `embeddings.txt`, `queries.txt`, `gold.txt` and `candidates.txt`
//! for a depth-3, branching-4 tree with 20-dimensional Gaussian vectors.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use hyperbox_core::data::{write_embeddings, write_predictions};
use hyperbox_core::synthetic::Taxonomy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().expect("usage: synthetic_fixture OUT_DIR [SEED]"));
    let seed = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    fs::create_dir_all(&dir)?;

    let taxonomy = Taxonomy::generate(3, 4, 20, &mut ChaCha8Rng::seed_from_u64(seed));
    let (queries, gold) = taxonomy.queries_and_gold();

    write_embeddings(
        &taxonomy.embedding_table(),
        BufWriter::new(File::create(dir.join("embeddings.txt"))?),
    )?;
    let mut out = BufWriter::new(File::create(dir.join("queries.txt"))?);
    for q in &queries.queries {
        writeln!(out, "{}\t{}", q.term, q.kind)?;
    }
    out.flush()?;
    write_predictions(&gold.hypernyms, BufWriter::new(File::create(dir.join("gold.txt"))?))?;
    let mut out = BufWriter::new(File::create(dir.join("candidates.txt"))?);
    for name in &taxonomy.names {
        writeln!(out, "{name}")?;
    }
    out.flush()
}
