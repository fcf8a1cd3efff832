//! Negative-sampling SGD kernel shared by training and inference.
//!
//! The kernel is generic over the float type so the same code path can be
//! checked against finite differences at 64-bit precision.

use num_traits::Float;
use rand::Rng;

use crate::corpus::NoiseTable;
use crate::embedding::Mode;

/// Draws for a negative that keep hitting the target before it is skipped.
pub const MAX_NEGATIVE_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Table {
    /// Input word vectors (`w_in`).
    Words,
    /// Negative-sampling output vectors (`w_out`).
    Outputs,
    /// Document vectors.
    Docs,
}

/// Row-level access to the three parameter tables.
pub trait Params<F> {
    fn row(&self, table: Table, i: usize) -> &[F];
    fn row_mut(&mut self, table: Table, i: usize) -> &mut [F];
}

/// A row that contributes to the input vector `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contributor {
    Word(usize),
    Doc(usize),
}

/// The inputs and prediction targets around one center position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainingContext {
    pub center: usize,
    pub effective_window: usize,
    pub contributors: Vec<Contributor>,
    /// Contributors are concatenated (dmpv) rather than summed.
    pub concat: bool,
    pub targets: Vec<usize>,
}

/// Which tables receive updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateMask {
    pub words: bool,
    pub outputs: bool,
    pub docs: bool,
}

impl UpdateMask {
    pub const ALL: UpdateMask = UpdateMask { words: true, outputs: true, docs: true };
    /// Only document vectors move; used for frozen inference.
    pub const DOCS_ONLY: UpdateMask = UpdateMask { words: false, outputs: false, docs: true };
    /// Everything except word input vectors; plain dbow.
    pub const NO_WORDS: UpdateMask = UpdateMask { words: false, outputs: true, docs: true };
}

/// Fills `ctx` for the token at `center` of `tokens`.
///
/// * sg: `h` is the center word, targets are the context words.
/// * cbow: `h` sums the context words, the target is the center.
/// * dbow: `h` is the document, the target is the center word.
/// * dmpv: `h` concatenates the document and the `2 * window` positional
///   context words, with `pad_row` standing in beyond the document edges;
///   the target is the center. dmpv always uses the full `window` so the
///   input width is fixed; `effective_window` is ignored.
///
/// Returns `false` when there is nothing to train on (no contributors or no
/// targets).
#[allow(clippy::too_many_arguments)]
pub fn build_input(
    mode: Mode,
    doc_row: usize,
    tokens: &[u32],
    center: usize,
    effective_window: usize,
    window: usize,
    pad_row: usize,
    ctx: &mut TrainingContext,
) -> bool {
    ctx.center = center;
    ctx.contributors.clear();
    ctx.targets.clear();
    ctx.concat = mode == Mode::Dmpv;
    let center_word = tokens[center] as usize;
    let context = |radius: usize| {
        let lo = center.saturating_sub(radius);
        let hi = (center + radius).min(tokens.len() - 1);
        (lo..=hi).filter(move |&j| j != center).map(|j| tokens[j] as usize)
    };

    match mode {
        Mode::SkipGram => {
            ctx.effective_window = effective_window;
            ctx.contributors.push(Contributor::Word(center_word));
            ctx.targets.extend(context(effective_window));
        }
        Mode::Cbow => {
            ctx.effective_window = effective_window;
            ctx.contributors.extend(context(effective_window).map(Contributor::Word));
            ctx.targets.push(center_word);
        }
        Mode::Dbow => {
            ctx.effective_window = 0;
            ctx.contributors.push(Contributor::Doc(doc_row));
            ctx.targets.push(center_word);
        }
        Mode::Dmpv => {
            ctx.effective_window = window;
            ctx.contributors.push(Contributor::Doc(doc_row));
            for offset in (1..=window).rev() {
                let word = center.checked_sub(offset).map_or(pad_row, |j| tokens[j] as usize);
                ctx.contributors.push(Contributor::Word(word));
            }
            for offset in 1..=window {
                let word = tokens.get(center + offset).map_or(pad_row, |&t| t as usize);
                ctx.contributors.push(Contributor::Word(word));
            }
            ctx.targets.push(center_word);
        }
    }
    !ctx.contributors.is_empty() && !ctx.targets.is_empty()
}

fn contributor_row(c: Contributor) -> (Table, usize) {
    match c {
        Contributor::Word(i) => (Table::Words, i),
        Contributor::Doc(i) => (Table::Docs, i),
    }
}

/// Composes `h` from the context's contributors. `h` must have the mode's
/// input width: `dim` for summed inputs, `dim * contributors` for
/// concatenated ones.
pub fn gather<F: Float, P: Params<F> + ?Sized>(params: &P, ctx: &TrainingContext, h: &mut [F]) {
    if ctx.concat {
        let dim = h.len() / ctx.contributors.len();
        for (slot, &c) in h.chunks_exact_mut(dim).zip(&ctx.contributors) {
            let (table, i) = contributor_row(c);
            slot.copy_from_slice(params.row(table, i));
        }
    } else {
        h.fill(F::zero());
        for &c in &ctx.contributors {
            let (table, i) = contributor_row(c);
            for (x, &y) in h.iter_mut().zip(params.row(table, i)) {
                *x = *x + y;
            }
        }
    }
}

/// Subtracts `lr * grad` from each contributor allowed by `mask`. Summed
/// inputs give every contributor the whole gradient; concatenated inputs
/// give each contributor its own slice.
pub fn scatter<F: Float, P: Params<F> + ?Sized>(
    params: &mut P,
    ctx: &TrainingContext,
    grad: &[F],
    lr: F,
    mask: UpdateMask,
) {
    let dim = if ctx.concat { grad.len() / ctx.contributors.len() } else { grad.len() };
    for (slot, &c) in ctx.contributors.iter().enumerate() {
        let allowed = match c {
            Contributor::Word(_) => mask.words,
            Contributor::Doc(_) => mask.docs,
        };
        if !allowed {
            continue;
        }
        let g = if ctx.concat { &grad[slot * dim..(slot + 1) * dim] } else { grad };
        let (table, i) = contributor_row(c);
        for (x, &gi) in params.row_mut(table, i).iter_mut().zip(g) {
            *x = *x - lr * gi;
        }
    }
}

/// `log(sigmoid(x))`, stable for large `|x|`.
pub fn log_sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// Appends `(target, true)` and up to `k` noise draws labelled `false` to
/// `out`. A draw equal to the target is redrawn, at most
/// [`MAX_NEGATIVE_RETRIES`] times, then that negative is skipped.
pub fn draw_outputs<R: Rng + ?Sized>(
    noise: &NoiseTable,
    target: usize,
    k: usize,
    rng: &mut R,
    out: &mut Vec<(usize, bool)>,
) {
    out.clear();
    out.push((target, true));
    for _ in 0..k {
        for _ in 0..=MAX_NEGATIVE_RETRIES {
            let w = noise.sample(rng);
            if w != target {
                out.push((w, false));
                break;
            }
        }
    }
}

/// One negative-sampling update for input `h` against labelled output rows.
///
/// For each output row with score `s = v'.h` and label `l`, the error is
/// `g = sigmoid(s) - l`; the row moves by `-lr * g * h` (when outputs are
/// not frozen) and `g * v'` is accumulated into `grad`, using `v'` before its
/// update. `grad` is overwritten and ends up holding the gradient of the
/// loss with respect to `h`; the caller applies it with [`scatter`].
///
/// Returns the loss `-[log sigmoid(s+) + sum log sigmoid(-s-)]`.
pub fn negative_sampling_step<F: Float, P: Params<F> + ?Sized>(
    params: &mut P,
    h: &[F],
    outputs: &[(usize, bool)],
    lr: F,
    update_outputs: bool,
    grad: &mut [F],
) -> F {
    grad.fill(F::zero());
    let mut loss = F::zero();
    for &(row, positive) in outputs {
        let v = params.row(Table::Outputs, row);
        let s = dot(v, h);
        let (g, term) = if positive {
            (sigmoid(s) - F::one(), log_sigmoid(s))
        } else {
            (sigmoid(s), log_sigmoid(-s))
        };
        loss = loss - term;
        if g == F::zero() {
            continue;
        }
        for (gi, &vi) in grad.iter_mut().zip(v) {
            *gi = *gi + g * vi;
        }
        if update_outputs {
            let step = lr * g;
            for (vi, &hi) in params.row_mut(Table::Outputs, row).iter_mut().zip(h) {
                *vi = *vi - step * hi;
            }
        }
    }
    loss
}

#[inline]
fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Plain owned parameter tables.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams<F> {
    pub dim: usize,
    pub out_width: usize,
    pub words: Vec<F>,
    pub outputs: Vec<F>,
    pub docs: Vec<F>,
}

impl<F: Float> DenseParams<F> {
    pub fn zeros(n_words: usize, n_outputs: usize, n_docs: usize, dim: usize, out_width: usize) -> Self {
        DenseParams {
            dim,
            out_width,
            words: vec![F::zero(); n_words * dim],
            outputs: vec![F::zero(); n_outputs * out_width],
            docs: vec![F::zero(); n_docs * dim],
        }
    }

    pub fn table(&self, table: Table) -> &[F] {
        match table {
            Table::Words => &self.words,
            Table::Outputs => &self.outputs,
            Table::Docs => &self.docs,
        }
    }

    pub fn table_mut(&mut self, table: Table) -> &mut [F] {
        match table {
            Table::Words => &mut self.words,
            Table::Outputs => &mut self.outputs,
            Table::Docs => &mut self.docs,
        }
    }

    fn width(&self, table: Table) -> usize {
        if table == Table::Outputs { self.out_width } else { self.dim }
    }
}

impl<F: Float> Params<F> for DenseParams<F> {
    fn row(&self, table: Table, i: usize) -> &[F] {
        let w = self.width(table);
        &self.table(table)[i * w..(i + 1) * w]
    }

    fn row_mut(&mut self, table: Table, i: usize) -> &mut [F] {
        let w = self.width(table);
        &mut self.table_mut(table)[i * w..(i + 1) * w]
    }
}
