use std::collections::HashMap;

use super::{Hyperparams, Mode, ModelError};
use crate::corpus::Vocabulary;

/// Dense row-major `f32` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::LengthMismatch(data.len(), rows * cols));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        // chunks_exact(0) panics, and a zero-width matrix has no meaningful rows.
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// A document embedding, either trained or inferred.
#[derive(Clone, Debug, PartialEq)]
pub struct DocVector {
    pub tag: String,
    pub values: Vec<f32>,
}

/// Trained (or initialized) model state.
///
/// `w_in` holds one input vector per vocabulary entry; dmpv models carry one
/// extra trailing row for the padding token used at document boundaries.
/// `w_out` holds the negative-sampling output vectors, one per vocabulary
/// entry, with width equal to the mode's input width. `docs` holds one row
/// per document tag and is empty for skip-gram and cbow models.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    vocabulary: Vocabulary,
    params: Hyperparams,
    w_in: Matrix,
    w_out: Matrix,
    docs: Matrix,
    doc_tags: Vec<String>,
    doc_index: HashMap<String, usize>,
}

impl EmbeddingModel {
    pub fn from_parts(
        vocabulary: Vocabulary,
        params: Hyperparams,
        w_in: Matrix,
        w_out: Matrix,
        docs: Matrix,
        doc_tags: Vec<String>,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        let v = vocabulary.len();
        let d = params.vector_size;
        let pad = usize::from(params.mode == Mode::Dmpv);
        let shape_err = |what: &str, got: (usize, usize), want: (usize, usize)| {
            Err(ModelError::Metadata(format!("{what} has shape {got:?}, expected {want:?}")))
        };
        if (w_in.rows, w_in.cols) != (v + pad, d) {
            return shape_err("input matrix", (w_in.rows, w_in.cols), (v + pad, d));
        }
        if (w_out.rows, w_out.cols) != (v, params.input_width()) {
            return shape_err("output matrix", (w_out.rows, w_out.cols), (v, params.input_width()));
        }
        if (docs.rows, docs.cols) != (doc_tags.len(), d) {
            return shape_err("document matrix", (docs.rows, docs.cols), (doc_tags.len(), d));
        }
        if !(w_in.is_finite() && w_out.is_finite() && docs.is_finite()) {
            return Err(ModelError::Metadata("non-finite matrix entry".into()));
        }
        let mut doc_index = HashMap::with_capacity(doc_tags.len());
        for (row, tag) in doc_tags.iter().enumerate() {
            if doc_index.insert(tag.clone(), row).is_some() {
                return Err(ModelError::Metadata(format!("duplicate document tag {tag:?}")));
            }
        }
        Ok(EmbeddingModel { vocabulary, params, w_in, w_out, docs, doc_tags, doc_index })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.params.mode
    }

    pub fn dim(&self) -> usize {
        self.params.vector_size
    }

    pub fn w_in(&self) -> &Matrix {
        &self.w_in
    }

    pub fn w_out(&self) -> &Matrix {
        &self.w_out
    }

    pub fn docs(&self) -> &Matrix {
        &self.docs
    }

    pub fn doc_tags(&self) -> &[String] {
        &self.doc_tags
    }

    pub fn doc_row(&self, tag: &str) -> Option<usize> {
        self.doc_index.get(tag).copied()
    }

    pub fn doc_vector(&self, tag: &str) -> Option<&[f32]> {
        self.doc_row(tag).map(|r| self.docs.row(r))
    }

    pub fn word_vector(&self, surface: &str) -> Option<&[f32]> {
        self.vocabulary.position(surface).map(|p| self.w_in.row(p))
    }

    /// Row of the dmpv padding token in `w_in`.
    pub fn pad_row(&self) -> Option<usize> {
        (self.params.mode == Mode::Dmpv).then_some(self.vocabulary.len())
    }

    pub(crate) fn matrices_mut(&mut self) -> (&mut Matrix, &mut Matrix, &mut Matrix) {
        (&mut self.w_in, &mut self.w_out, &mut self.docs)
    }
}
