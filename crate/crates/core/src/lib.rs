//! Word2vec (skip-gram, cbow) and doc2vec (dbow, dmpv) training with
//! negative sampling, frozen-model inference for unseen documents, and
//! evaluation against averaging and n-gram baselines.
//!
//! ```no_run
//! use vecforge::corpus::{Corpus, CorpusFormat};
//! use vecforge::embedding::{Hyperparams, Mode};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let params = Hyperparams::for_mode(Mode::Dbow);
//! let corpus = Corpus::load("questions.tsv", CorpusFormat::TaggedLines, params.min_count, params.subsample_t)?;
//! let model = vecforge::train::train(&corpus, &params, None)?;
//! vecforge::embedding::save_model(&model, "questions.vf")?;
//! # Ok(())
//! # }
//! ```

pub mod baselines;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod train;

pub use corpus::{Corpus, CorpusError, CorpusFormat, RawDocument, Vocabulary};
pub use embedding::{cosine, DocVector, EmbeddingModel, Hyperparams, Mode, ModelError};
pub use train::{infer_document, train, InferParams, TrainError, Trainer};
