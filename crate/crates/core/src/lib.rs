//! HyperBox: hypernym discovery with point-plus-bump word representations
//! and a pair of relation boxes.
//!
//! The crate is split along the pipeline:
//!
//! - [`model`]: projections, pair-relative points, box distance, the pair
//!   score and its analytic gradient.
//! - [`training`]: negative sampling, the margin loss, Adam and the epoch loop.
//! - [`discovery`]: ranking candidate hypernyms for a query.
//! - [`eval`]: MRR, MAP and P@k over top-15 predictions.
//! - [`data`] and [`model_file`]: text formats and the binary model file.

pub mod data;
pub mod discovery;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod model;
pub mod model_file;
pub mod synthetic;
pub mod training;

pub use data::{EmbeddingTable, GoldStandard, Query, QuerySet};
pub use discovery::{CandidateIndex, RankedPrediction};
pub use error::{Error, Result};
pub use eval::EvalReport;
pub use lexicon::{Lexicon, TermId};
pub use model::{BoxGeometry, BoxParams, Matrix, ModelParams, PairPoints};
pub use model_file::{load_model, save_model};
pub use training::{TrainConfig, TrainOutcome, TrainingPair, TrainingSet, ValidationSet};
