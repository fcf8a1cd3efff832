use rand::Rng;

use super::kernel::{self, Params, Table, UpdateMask};
use super::{linear_rate, random_vector, subsample, Scratch, TrainError};
use crate::corpus::NoiseTable;
use crate::embedding::{DocVector, EmbeddingModel};

/// Settings for inferring a vector for an unseen document.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InferParams {
    pub alpha: f64,
    pub alpha_min: f64,
    pub epochs: usize,
}

impl Default for InferParams {
    fn default() -> Self {
        InferParams { alpha: 0.01, alpha_min: 0.0001, epochs: 1000 }
    }
}

impl InferParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha && self.alpha.is_finite()) {
            return Err(TrainError::InvalidInferParams(
                "learning rates must satisfy 0 < min-alpha <= alpha".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidInferParams("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reads word and output rows from the model, writes only the new vector.
struct FrozenView<'a> {
    model: &'a EmbeddingModel,
    doc: &'a mut [f32],
}

impl Params<f32> for FrozenView<'_> {
    fn row(&self, table: Table, i: usize) -> &[f32] {
        match table {
            Table::Words => self.model.w_in().row(i),
            Table::Outputs => self.model.w_out().row(i),
            Table::Docs => {
                assert_eq!(i, 0, "inference has a single document row");
                self.doc
            }
        }
    }

    fn row_mut(&mut self, table: Table, i: usize) -> &mut [f32] {
        assert_eq!(table, Table::Docs, "model weights are frozen during inference");
        assert_eq!(i, 0, "inference has a single document row");
        self.doc
    }
}

/// Trains a fresh document vector against the frozen model.
///
/// Only the new vector receives gradient; `w_in` and `w_out` are read
/// through a shared borrow and cannot change. The learning rate decreases
/// linearly from `ip.alpha` to `ip.alpha_min` over `ip.epochs`.
pub fn infer_document<S, R>(
    model: &EmbeddingModel,
    tokens: &[S],
    ip: &InferParams,
    rng: &mut R,
) -> Result<DocVector, TrainError>
where
    S: AsRef<str>,
    R: Rng + ?Sized,
{
    let mode = model.mode();
    if !mode.has_doc_vectors() {
        return Err(TrainError::UnsupportedMode(mode));
    }
    ip.validate()?;
    let vocab = model.vocabulary();
    let ids: Vec<u32> = tokens
        .iter()
        .filter_map(|t| vocab.position(t.as_ref()).map(|p| p as u32))
        .collect();
    if ids.is_empty() {
        return Err(TrainError::NothingToInfer);
    }

    let params = model.params();
    let noise = NoiseTable::new(vocab);
    let keep: Vec<f64> = vocab.entries().iter().map(|e| e.keep_prob).collect();
    let pad_row = model.pad_row().unwrap_or(usize::MAX);

    let mut values = vec![0.0f32; params.vector_size];
    random_vector(rng, &mut values);
    let mut view = FrozenView { model, doc: &mut values };
    let mut s = Scratch::new(params.input_width());

    for epoch in 0..ip.epochs {
        let lr = linear_rate(epoch, ip.epochs, ip.alpha, ip.alpha_min) as f32;
        subsample(&ids, &keep, rng, &mut s.kept);
        for center in 0..s.kept.len() {
            if !kernel::build_input(mode, 0, &s.kept, center, params.window, params.window, pad_row, &mut s.ctx) {
                continue;
            }
            let target = s.ctx.targets[0];
            kernel::draw_outputs(&noise, target, params.negative, rng, &mut s.outputs);
            kernel::gather(&view, &s.ctx, &mut s.h);
            kernel::negative_sampling_step(&mut view, &s.h, &s.outputs, lr, false, &mut s.grad);
            kernel::scatter(&mut view, &s.ctx, &s.grad, lr, UpdateMask::DOCS_ONLY);
        }
    }

    Ok(DocVector { tag: "inferred".into(), values })
}
