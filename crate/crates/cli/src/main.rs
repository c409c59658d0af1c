//! `hyperbox`: train, predict and evaluate hypernym discovery models.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hyperbox_core::data::{parse_candidates, parse_embeddings, parse_gold, parse_queries, write_predictions};
use hyperbox_core::eval::evaluate_files;
use hyperbox_core::training::{expand_gold, train};
use hyperbox_core::{
    load_model, save_model, CandidateIndex, EmbeddingTable, Lexicon, TermId, TrainConfig, ValidationSet,
};
use log::{info, warn};

#[derive(Parser)]
#[command(
    name = "hyperbox",
    version,
    about = "Hypernym discovery with point-plus-bump embeddings and relation boxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to --out.
    Train(TrainArgs),
    /// Rank candidate hypernyms for every query.
    Predict(PredictArgs),
    /// Score a prediction file against a gold file.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Word vectors in text format (optional "count dim" header).
    #[arg(long)]
    embeddings: PathBuf,
    /// Training queries, one "term<TAB>type" per line.
    #[arg(long)]
    queries: PathBuf,
    /// Gold hypernyms, tab-separated, aligned with --queries.
    #[arg(long)]
    gold: PathBuf,
    /// Candidate hypernym vocabulary, one term per line.
    #[arg(long)]
    candidates: PathBuf,
    /// Validation queries for model selection.
    #[arg(long, requires = "valid_gold")]
    valid_queries: Option<PathBuf>,
    #[arg(long, requires = "valid_queries")]
    valid_gold: Option<PathBuf>,
    /// Where to write the model file.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch log (epoch, mean loss, validation MRR). Without it epochs are logged to the error stream.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    hyper: Hyperparameters,
}

/// Training hyperparameters; the defaults are the standard configuration.
#[derive(Args)]
struct Hyperparameters {
    /// Box dimension d.
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = 100)]
    negatives: usize,
    /// Loss margin.
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
}

impl Hyperparameters {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            learning_rate: self.lr,
            negatives: self.negatives,
            margin: self.margin,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    /// Predictions per query.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u64).range(1..))]
    topk: u64,
    /// Prediction file, one line per query.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    gold: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Train(args) => cmd_train(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let table = parse_embeddings(path).with_context(|| format!("reading embeddings {}", path.display()))?;
    info!("{} embeddings of dimension {}", table.len(), table.dim());
    Ok(table)
}

/// Interns the candidate vocabulary first so its ids follow file order.
fn resolve_candidates(path: &Path, table: &EmbeddingTable, lexicon: &mut Lexicon) -> Result<Vec<TermId>> {
    let terms = parse_candidates(path).with_context(|| format!("reading candidates {}", path.display()))?;
    let (ids, missing) = lexicon.resolve_all(&terms, table);
    if missing > 0 {
        warn!(
            "{missing} of {} candidates have no embedding and are excluded",
            terms.len()
        );
    }
    if ids.is_empty() {
        bail!("no candidate in {} has an embedding", path.display());
    }
    Ok(ids)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let config = args.hyper.config();
    config.validate()?;

    let table = load_embeddings(&args.embeddings)?;
    let mut lexicon = Lexicon::new(table.dim());
    let candidates = resolve_candidates(&args.candidates, &table, &mut lexicon)?;
    let queries = parse_queries(&args.queries)?;
    let gold = parse_gold(&args.gold)?;
    let expansion = expand_gold(&queries, &gold, &table, &mut lexicon)?;
    eprintln!(
        "training queries: {} total, {} without embedding, {} with empty gold; pairs: {} kept, {} dropped; candidates: {}",
        queries.len(),
        expansion.dropped_queries,
        expansion.empty_gold,
        expansion.set.pairs.len(),
        expansion.dropped_pairs,
        candidates.len(),
    );
    if expansion.set.pairs.is_empty() {
        bail!("no training pair has embeddings for both terms");
    }

    let validation = match (&args.valid_queries, &args.valid_gold) {
        (Some(q), Some(g)) => {
            let v = ValidationSet::resolve(&parse_queries(q)?, &parse_gold(g)?, &table, &mut lexicon)?;
            let missing = v.queries.iter().filter(|(_, id)| id.is_none()).count();
            eprintln!(
                "validation queries: {} total, {missing} without embedding",
                v.queries.len()
            );
            Some(v)
        }
        _ => None,
    };

    let log_file = match &args.log {
        Some(path) => Some(BufWriter::new(
            File::create(path).with_context(|| format!("creating log {}", path.display()))?,
        )),
        None => None,
    };

    let outcome = train(&config, &expansion.set, &candidates, &lexicon, validation.as_ref())?;
    // Without --log the trainer has already streamed each epoch to the error stream.
    if let Some(mut f) = log_file {
        for entry in &outcome.log {
            writeln!(f, "{}", entry.to_tsv())?;
        }
        f.flush()?;
    }
    save_model(&outcome.params, &args.out).with_context(|| format!("writing model {}", args.out.display()))?;
    eprintln!(
        "kept epoch {}; model written to {}",
        outcome.best_epoch,
        args.out.display()
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let params = load_model(&args.model).with_context(|| format!("loading model {}", args.model.display()))?;
    let table = load_embeddings(&args.embeddings)?;
    if params.embedding_dim() != table.dim() {
        bail!(
            "model expects embeddings of dimension {} but {} has dimension {}",
            params.embedding_dim(),
            args.embeddings.display(),
            table.dim()
        );
    }
    let mut lexicon = Lexicon::new(table.dim());
    let candidates = resolve_candidates(&args.candidates, &table, &mut lexicon)?;
    let queries = parse_queries(&args.queries)?;
    let resolved: Vec<(String, Option<TermId>)> = queries
        .queries
        .iter()
        .map(|q| (q.term.clone(), lexicon.resolve(&q.term, &table)))
        .collect();
    let oov = resolved.iter().filter(|(_, id)| id.is_none()).count();
    eprintln!(
        "queries: {} total, {} kept, {oov} without embedding (empty prediction lines)",
        resolved.len(),
        resolved.len() - oov
    );

    let index = CandidateIndex::new(&params, &lexicon, &candidates);
    let k = usize::try_from(args.topk).unwrap_or(usize::MAX);
    let ranked = index.rank_all(&resolved, k);
    let lines: Vec<Vec<&str>> = ranked.iter().map(|r| r.terms()).collect();
    let mut out = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating predictions {}", args.out.display()))?,
    );
    write_predictions(&lines, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let report = evaluate_files(&args.predictions, &args.gold)?;
    eprintln!(
        "scored {} queries ({} with empty predictions); skipped {} with empty gold",
        report.num_queries, report.empty_predictions, report.skipped_empty_gold
    );
    eprintln!("{}", hyperbox_core::EvalReport::header());
    println!("{report}");
    Ok(())
}
