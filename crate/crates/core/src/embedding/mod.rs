//! Embedding model state, vector math and persistence.

mod model;
mod persist;
mod wordvec;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::CorpusError;

pub use model::{DocVector, EmbeddingModel, Matrix};
pub use persist::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use wordvec::{
    export_text, load_word_vectors, read_word_vectors, write_word_vectors, VectorFormat,
    WordVectors, WhichVectors,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("undefined cosine: zero-norm vector")]
    ZeroNorm,
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("not a model file: bad magic bytes")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    VersionMismatch(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model file checksum mismatch")]
    Checksum,
    #[error("malformed model metadata: {0}")]
    Metadata(String),
    #[error("malformed word-vector header: {0}")]
    BadHeader(String),
    #[error("word-vector row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("no document vectors")]
    NoDocVectors,
    #[error("invalid hyper-parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Training architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Skip-gram: one word predicts each of its context words.
    SkipGram,
    /// Continuous bag of words: summed context words predict the center.
    Cbow,
    /// Distributed bag of words: the document vector predicts its words.
    Dbow,
    /// Distributed memory with concatenation: the document vector joined
    /// with positional context words predicts the center.
    Dmpv,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::SkipGram, Mode::Cbow, Mode::Dbow, Mode::Dmpv];

    pub fn name(self) -> &'static str {
        match self {
            Mode::SkipGram => "sg",
            Mode::Cbow => "cbow",
            Mode::Dbow => "dbow",
            Mode::Dmpv => "dmpv",
        }
    }

    pub fn has_doc_vectors(self) -> bool {
        matches!(self, Mode::Dbow | Mode::Dmpv)
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Mode::SkipGram => 0,
            Mode::Cbow => 1,
            Mode::Dbow => 2,
            Mode::Dmpv => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Mode> {
        Mode::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sg" | "skip-gram" | "skipgram" => Ok(Mode::SkipGram),
            "cbow" => Ok(Mode::Cbow),
            "dbow" => Ok(Mode::Dbow),
            "dmpv" => Ok(Mode::Dmpv),
            other => Err(ModelError::InvalidParams(format!("unknown mode {other:?}"))),
        }
    }
}

/// Training hyper-parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    pub mode: Mode,
    pub vector_size: usize,
    pub window: usize,
    pub min_count: u64,
    pub subsample_t: f64,
    pub negative: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub alpha_min: f64,
    /// dbow only: interleave a skip-gram pass so word vectors are learned.
    pub dbow_train_words: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Hyperparams {
    /// Tuned defaults for each architecture.
    ///
    /// dbow and dmpv follow the duplicate-question settings (300 dimensions,
    /// min count 5, 5 negatives; window 15 / sample 1e-5 / 20 epochs for dbow,
    /// window 5 / sample 1e-6 / 600 epochs for dmpv). Skip-gram and cbow use
    /// window 5, sample 1e-5 and 100 epochs.
    pub fn for_mode(mode: Mode) -> Self {
        let (window, subsample_t, epochs) = match mode {
            Mode::Dbow => (15, 1e-5, 20),
            Mode::Dmpv => (5, 1e-6, 600),
            Mode::SkipGram | Mode::Cbow => (5, 1e-5, 100),
        };
        Hyperparams {
            mode,
            vector_size: 300,
            window,
            min_count: 5,
            subsample_t,
            negative: 5,
            epochs,
            alpha: 0.025,
            alpha_min: 0.0001,
            dbow_train_words: false,
            seed: 1,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: &str| Err(ModelError::InvalidParams(msg.to_owned()));
        if self.vector_size == 0 {
            return fail("vector size must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha && self.alpha.is_finite()) {
            return fail("learning rates must satisfy 0 < min-alpha <= alpha");
        }
        let needs_window = match self.mode {
            Mode::Dbow => self.dbow_train_words,
            _ => true,
        };
        if needs_window && self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min count must be at least 1");
        }
        if !(self.subsample_t > 0.0 && self.subsample_t.is_finite()) {
            return fail("sub-sampling threshold must be positive");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }

    /// Width of the input vector `h`, and therefore of output rows.
    pub fn input_width(&self) -> usize {
        match self.mode {
            Mode::Dmpv => self.vector_size * (2 * self.window + 1),
            _ => self.vector_size,
        }
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams::for_mode(Mode::Dbow)
    }
}

/// Cosine similarity, computed in double precision and clamped to [-1, 1].
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64, ModelError> {
    if u.len() != v.len() {
        return Err(ModelError::LengthMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a.into(), b.into());
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(ModelError::ZeroNorm);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[0.3f64, -1.2, 4.0], &[0.3, -1.2, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0f64, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!((cosine(&[1.0f32, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-7);
    }

    #[test]
    fn cosine_errors() {
        let err = cosine(&[0.0f64, 0.0], &[1.0, 0.0]).unwrap_err();
        assert_eq!(err.to_string(), "undefined cosine: zero-norm vector");
        assert!(matches!(cosine(&[1.0f64], &[1.0, 2.0]), Err(ModelError::LengthMismatch(1, 2))));
    }

    #[test]
    fn defaults_follow_mode() {
        let dbow = Hyperparams::for_mode(Mode::Dbow);
        assert_eq!((dbow.vector_size, dbow.window, dbow.negative, dbow.epochs), (300, 15, 5, 20));
        assert_eq!(dbow.subsample_t, 1e-5);
        assert_eq!(dbow.min_count, 5);
        let dmpv = Hyperparams::for_mode(Mode::Dmpv);
        assert_eq!((dmpv.window, dmpv.negative), (5, 5));
        assert_eq!(dmpv.subsample_t, 1e-6);
        assert_eq!((dbow.alpha, dbow.alpha_min), (0.025, 0.0001));
    }

    #[test]
    fn dmpv_input_width() {
        let mut p = Hyperparams::for_mode(Mode::Dmpv);
        p.vector_size = 8;
        p.window = 2;
        assert_eq!(p.input_width(), 40);
        p.mode = Mode::Cbow;
        assert_eq!(p.input_width(), 8);
    }

    #[test]
    fn validation() {
        let ok = Hyperparams::for_mode(Mode::Dbow);
        assert!(ok.validate().is_ok());
        let mut p = ok.clone();
        p.window = 0;
        assert!(p.validate().is_ok(), "plain dbow needs no window");
        p.dbow_train_words = true;
        assert!(p.validate().is_err());
        let mut p = ok.clone();
        p.alpha_min = 0.5;
        assert!(p.validate().is_err());
        let mut p = ok.clone();
        p.epochs = 0;
        assert!(p.validate().is_err());
        let mut p = Hyperparams::for_mode(Mode::SkipGram);
        p.window = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in Mode::ALL {
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
            assert_eq!(Mode::from_code(mode.code()), Some(mode));
        }
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            u in proptest::collection::vec(-10.0f64..10.0, 5),
            v in proptest::collection::vec(-10.0f64..10.0, 5),
            a in 0.01f64..100.0,
        ) {
            prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
            let c = cosine(&u, &v).unwrap();
            prop_assert_eq!(c, cosine(&v, &u).unwrap());
            let scaled: Vec<f64> = u.iter().map(|x| a * x).collect();
            prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
