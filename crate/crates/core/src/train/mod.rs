//! Training for all four architectures and frozen-model inference.

mod hogwild;
mod infer;
pub mod kernel;
mod pretrained;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{Corpus, NoiseTable};
use crate::embedding::{EmbeddingModel, Hyperparams, Matrix, Mode, ModelError, WordVectors};
use hogwild::SharedTables;
use kernel::{Params, TrainingContext, UpdateMask};

pub use infer::{infer_document, InferParams};
pub use pretrained::{init_from_pretrained, Coverage};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus has no non-empty documents")]
    EmptyCorpus,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite loss in epoch {epoch} at document {tag:?}")]
    NonFinite { epoch: usize, tag: String },
    #[error("pretrained vectors have dimension {got}, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("nothing to infer on: no in-vocabulary tokens")]
    NothingToInfer,
    #[error("inference needs a dbow or dmpv model, got {0}")]
    UnsupportedMode(Mode),
    #[error("invalid inference parameters: {0}")]
    InvalidInferParams(String),
}

/// Learning rate for 0-based epoch `epoch`, decreasing linearly from
/// `alpha` at the first epoch to `alpha_min` at the last.
pub fn epoch_learning_rate(epoch: usize, params: &Hyperparams) -> f64 {
    linear_rate(epoch, params.epochs, params.alpha, params.alpha_min)
}

pub(crate) fn linear_rate(epoch: usize, epochs: usize, start: f64, end: f64) -> f64 {
    let frac = epoch as f64 / epochs.saturating_sub(1).max(1) as f64;
    // Exact at both endpoints.
    start * (1.0 - frac) + end * frac
}

/// Diagnostics for one finished epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean loss per negative-sampling step.
    pub mean_loss: f64,
    pub steps: u64,
    /// Tokens that survived subsampling.
    pub tokens: u64,
    pub tokens_per_sec: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub epochs: Vec<EpochStats>,
    pub coverage: Option<Coverage>,
}

/// Trains a model with default reporting (silent).
pub fn train(
    corpus: &Corpus,
    params: &Hyperparams,
    pretrained: Option<&WordVectors>,
) -> Result<EmbeddingModel, TrainError> {
    Trainer::new(params.clone()).fit(corpus, pretrained).map(|o| o.model)
}

#[derive(Clone, Debug)]
pub struct Trainer {
    params: Hyperparams,
    verbose: bool,
}

impl Trainer {
    pub fn new(params: Hyperparams) -> Self {
        Trainer { params, verbose: false }
    }

    /// Print per-epoch progress to standard error.
    pub fn verbose(mut self, on: bool) -> Self {
        self.verbose = on;
        self
    }

    pub fn fit(&self, corpus: &Corpus, pretrained: Option<&WordVectors>) -> Result<TrainOutcome, TrainError> {
        self.fit_with(corpus, pretrained, |_, _| {})
    }

    /// Trains, calling `on_epoch` with the model state after every epoch.
    pub fn fit_with<C>(
        &self,
        corpus: &Corpus,
        pretrained: Option<&WordVectors>,
        mut on_epoch: C,
    ) -> Result<TrainOutcome, TrainError>
    where
        C: FnMut(&EpochStats, &EmbeddingModel),
    {
        let mut params = self.params.clone();
        if pretrained.is_some() && params.mode == Mode::Dbow && !params.dbow_train_words {
            // Without word learning the output vectors never see the
            // pretrained inputs, so they would have no effect.
            params.dbow_train_words = true;
            if self.verbose {
                eprintln!("pretrained vectors supplied: enabling dbow word training");
            }
        }
        params.validate()?;
        if corpus.vocabulary.is_empty() || corpus.non_empty_count() == 0 {
            return Err(TrainError::EmptyCorpus);
        }

        let mut model = initialize(corpus, &params)?;
        let coverage = match pretrained {
            Some(wv) => {
                let cov = init_from_pretrained(&mut model, wv)?;
                if self.verbose {
                    eprintln!(
                        "pretrained coverage: {}/{} ({:.1}%)",
                        cov.matched,
                        cov.vocab_size,
                        100.0 * cov.ratio()
                    );
                }
                Some(cov)
            }
            None => None,
        };

        let noise = NoiseTable::new(&corpus.vocabulary);
        let keep: Vec<f64> = corpus.vocabulary.entries().iter().map(|e| e.keep_prob).collect();
        let docs: Vec<usize> = (0..corpus.documents.len())
            .filter(|&i| !corpus.documents[i].is_empty())
            .collect();
        let chunk = docs.len().div_ceil(params.workers);
        let pad_row = model.pad_row().unwrap_or(usize::MAX);

        let mut history = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            let lr = epoch_learning_rate(epoch, &params);
            let started = Instant::now();
            let job = EpochJob {
                params: &params,
                corpus,
                noise: &noise,
                keep: &keep,
                lr: lr as f32,
                pad_row,
                epoch,
            };

            let shared = SharedTables::new(&mut model);
            let totals = if params.workers == 1 {
                let mut rng = worker_rng(params.seed, epoch, 0);
                job.run(&mut shared.view(), &docs, &mut rng)?
            } else {
                let results: Vec<Result<WorkerTotals, TrainError>> = std::thread::scope(|s| {
                    let handles: Vec<_> = docs
                        .chunks(chunk.max(1))
                        .enumerate()
                        .map(|(w, part)| {
                            let job = &job;
                            let shared = &shared;
                            s.spawn(move || {
                                let mut rng = worker_rng(job.params.seed, job.epoch, w);
                                job.run(&mut shared.view(), part, &mut rng)
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
                });
                let mut totals = WorkerTotals::default();
                for r in results {
                    totals.merge(r?);
                }
                totals
            };
            drop(shared);

            let secs = started.elapsed().as_secs_f64();
            let stats = EpochStats {
                epoch,
                learning_rate: lr,
                mean_loss: if totals.steps > 0 { totals.loss / totals.steps as f64 } else { 0.0 },
                steps: totals.steps,
                tokens: totals.tokens,
                tokens_per_sec: if secs > 0.0 { totals.tokens as f64 / secs } else { 0.0 },
            };
            if self.verbose {
                eprintln!(
                    "epoch {:>4}  loss {:.6}  lr {:.6}  {:.0} tokens/s",
                    stats.epoch, stats.mean_loss, stats.learning_rate, stats.tokens_per_sec
                );
            }
            on_epoch(&stats, &model);
            history.push(stats);
        }

        Ok(TrainOutcome { model, epochs: history, coverage })
    }
}

fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Separate, reproducible stream per (epoch, worker).
    rng.set_stream(((epoch as u64) << 16) | worker as u64 + 1);
    rng
}

/// Uniform in `[-0.5/d, 0.5/d]`.
pub(crate) fn random_vector<R: Rng + ?Sized>(rng: &mut R, out: &mut [f32]) {
    let d = out.len() as f32;
    for x in out {
        *x = (rng.random::<f32>() - 0.5) / d;
    }
}

/// Fresh model: word and document vectors uniform in `[-0.5/d, 0.5/d]`,
/// output vectors zero.
pub fn initialize(corpus: &Corpus, params: &Hyperparams) -> Result<EmbeddingModel, TrainError> {
    let d = params.vector_size;
    let v = corpus.vocabulary.len();
    let pad = usize::from(params.mode == Mode::Dmpv);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut w_in = Matrix::zeros(v + pad, d);
    random_vector(&mut rng, w_in.as_mut_slice());
    let w_out = Matrix::zeros(v, params.input_width());
    let (docs, tags) = if params.mode.has_doc_vectors() {
        let tags: Vec<String> = corpus.documents.iter().map(|doc| doc.tag.clone()).collect();
        let mut docs = Matrix::zeros(tags.len(), d);
        random_vector(&mut rng, docs.as_mut_slice());
        (docs, tags)
    } else {
        (Matrix::zeros(0, d), Vec::new())
    };
    Ok(EmbeddingModel::from_parts(corpus.vocabulary.clone(), params.clone(), w_in, w_out, docs, tags)?)
}

#[derive(Default)]
struct WorkerTotals {
    loss: f64,
    steps: u64,
    tokens: u64,
}

impl WorkerTotals {
    fn merge(&mut self, other: WorkerTotals) {
        self.loss += other.loss;
        self.steps += other.steps;
        self.tokens += other.tokens;
    }
}

struct EpochJob<'a> {
    params: &'a Hyperparams,
    corpus: &'a Corpus,
    noise: &'a NoiseTable,
    keep: &'a [f64],
    lr: f32,
    pad_row: usize,
    epoch: usize,
}

/// Reusable per-worker buffers.
pub(crate) struct Scratch {
    pub ctx: TrainingContext,
    pub h: Vec<f32>,
    pub grad: Vec<f32>,
    pub outputs: Vec<(usize, bool)>,
    pub kept: Vec<u32>,
}

impl Scratch {
    pub(crate) fn new(width: usize) -> Self {
        Scratch {
            ctx: TrainingContext::default(),
            h: vec![0.0; width],
            grad: vec![0.0; width],
            outputs: Vec::new(),
            kept: Vec::new(),
        }
    }
}

/// Keeps each occurrence with its type's keep probability.
pub(crate) fn subsample<R: Rng + ?Sized>(tokens: &[u32], keep: &[f64], rng: &mut R, out: &mut Vec<u32>) {
    out.clear();
    out.extend(tokens.iter().copied().filter(|&t| {
        let p = keep[t as usize];
        p >= 1.0 || rng.random::<f64>() < p
    }));
}

impl EpochJob<'_> {
    fn run<P: Params<f32>, R: Rng>(
        &self,
        params: &mut P,
        docs: &[usize],
        rng: &mut R,
    ) -> Result<WorkerTotals, TrainError> {
        let mut totals = WorkerTotals::default();
        let mut scratch = Scratch::new(self.params.input_width());
        let mut sg_scratch = Scratch::new(self.params.vector_size);
        for &row in docs {
            let doc = &self.corpus.documents[row];
            subsample(&doc.tokens, self.keep, rng, &mut scratch.kept);
            if scratch.kept.is_empty() {
                continue;
            }
            totals.tokens += scratch.kept.len() as u64;
            let mut loss = 0.0f64;
            let mut steps = 0u64;
            let mode = self.params.mode;
            if mode == Mode::Dbow && self.params.dbow_train_words {
                sg_scratch.kept.clone_from(&scratch.kept);
                self.pass(params, Mode::SkipGram, row, &mut sg_scratch, UpdateMask::ALL, rng, &mut loss, &mut steps);
            }
            let mask = match mode {
                Mode::Dbow => UpdateMask::NO_WORDS,
                _ => UpdateMask::ALL,
            };
            self.pass(params, mode, row, &mut scratch, mask, rng, &mut loss, &mut steps);

            if !loss.is_finite() {
                return Err(TrainError::NonFinite { epoch: self.epoch, tag: doc.tag.clone() });
            }
            totals.loss += loss;
            totals.steps += steps;
        }
        Ok(totals)
    }

    #[allow(clippy::too_many_arguments)]
    fn pass<P: Params<f32>, R: Rng>(
        &self,
        params: &mut P,
        mode: Mode,
        doc_row: usize,
        s: &mut Scratch,
        mask: UpdateMask,
        rng: &mut R,
        loss: &mut f64,
        steps: &mut u64,
    ) {
        let window = self.params.window;
        for center in 0..s.kept.len() {
            let effective = match mode {
                Mode::SkipGram | Mode::Cbow => rng.random_range(1..=window),
                _ => window,
            };
            if !kernel::build_input(mode, doc_row, &s.kept, center, effective, window, self.pad_row, &mut s.ctx) {
                continue;
            }
            for t in 0..s.ctx.targets.len() {
                let target = s.ctx.targets[t];
                kernel::draw_outputs(self.noise, target, self.params.negative, rng, &mut s.outputs);
                kernel::gather(params, &s.ctx, &mut s.h);
                let l = kernel::negative_sampling_step(params, &s.h, &s.outputs, self.lr, mask.outputs, &mut s.grad);
                kernel::scatter(params, &s.ctx, &s.grad, self.lr, mask);
                *loss += f64::from(l);
                *steps += 1;
            }
        }
    }
}
