use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{self, BaselineError, DEFAULT_MAX_ORDER};
use crate::corpus::RawDocument;
use crate::embedding::{cosine, EmbeddingModel, ModelError};
use crate::train::{infer_document, InferParams, TrainError};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("document {0:?} has no trained vector and inference is off")]
    NoVector(String),
}

/// A document handed to a scorer: its tokens and, for corpus documents,
/// its tag.
#[derive(Clone, Copy, Debug)]
pub struct DocInput<'a> {
    pub tag: Option<&'a str>,
    pub tokens: &'a [String],
}

impl<'a> DocInput<'a> {
    pub fn tagged(doc: &'a RawDocument) -> Self {
        DocInput { tag: Some(&doc.tag), tokens: &doc.tokens }
    }

    pub fn untagged(tokens: &'a [String]) -> Self {
        DocInput { tag: None, tokens }
    }
}

/// Similarity between two documents; higher means more similar.
pub trait PairScorer {
    fn score(&self, a: &DocInput<'_>, b: &DocInput<'_>) -> Result<f64, ScoreError>;
}

impl<T: PairScorer + ?Sized> PairScorer for &T {
    fn score(&self, a: &DocInput<'_>, b: &DocInput<'_>) -> Result<f64, ScoreError> {
        (**self).score(a, b)
    }
}

/// Cosine between doc2vec document vectors.
///
/// Tagged documents known to the model use their trained vector; anything
/// else is inferred against the frozen model when `infer` is set. Inference
/// is seeded from `seed` and the token sequence, so scores are reproducible.
pub struct Doc2VecScorer<'m> {
    pub model: &'m EmbeddingModel,
    pub infer: Option<InferParams>,
    pub seed: u64,
}

impl<'m> Doc2VecScorer<'m> {
    pub fn new(model: &'m EmbeddingModel) -> Self {
        Doc2VecScorer { model, infer: None, seed: 0 }
    }

    pub fn with_inference(model: &'m EmbeddingModel, params: InferParams, seed: u64) -> Self {
        Doc2VecScorer { model, infer: Some(params), seed }
    }

    pub fn vector(&self, doc: &DocInput<'_>) -> Result<Vec<f32>, ScoreError> {
        let vocab = self.model.vocabulary();
        if !doc.tokens.iter().any(|t| vocab.position(t).is_some()) {
            return Err(TrainError::NothingToInfer.into());
        }
        if let Some(v) = doc.tag.and_then(|t| self.model.doc_vector(t)) {
            return Ok(v.to_vec());
        }
        let Some(ip) = &self.infer else {
            return Err(ScoreError::NoVector(doc.tag.unwrap_or("<untagged>").to_owned()));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ token_hash(doc.tokens));
        Ok(infer_document(self.model, doc.tokens, ip, &mut rng)?.values)
    }
}

impl PairScorer for Doc2VecScorer<'_> {
    fn score(&self, a: &DocInput<'_>, b: &DocInput<'_>) -> Result<f64, ScoreError> {
        Ok(cosine(&self.vector(a)?, &self.vector(b)?)?)
    }
}

/// FNV-1a over the tokens, with a separator between them.
fn token_hash(tokens: &[String]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in tokens {
        for &b in t.as_bytes().iter().chain(b"\0") {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Cosine between averaged input word vectors.
pub struct AverageScorer<'m> {
    pub model: &'m EmbeddingModel,
}

impl PairScorer for AverageScorer<'_> {
    fn score(&self, a: &DocInput<'_>, b: &DocInput<'_>) -> Result<f64, ScoreError> {
        let va = baselines::average_embedding(self.model, a.tokens)?;
        let vb = baselines::average_embedding(self.model, b.tokens)?;
        Ok(cosine(&va.values, &vb.values)?)
    }
}

/// Negated Jensen-Shannon divergence between n-gram profiles.
#[derive(Clone, Copy, Debug)]
pub struct NgramScorer {
    pub max_order: usize,
}

impl Default for NgramScorer {
    fn default() -> Self {
        NgramScorer { max_order: DEFAULT_MAX_ORDER }
    }
}

impl PairScorer for NgramScorer {
    fn score(&self, a: &DocInput<'_>, b: &DocInput<'_>) -> Result<f64, ScoreError> {
        Ok(baselines::ngram_similarity_with_order(a.tokens, b.tokens, self.max_order)?)
    }
}
