//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecforge::train::kernel::{self, DenseParams, Table, TrainingContext, UpdateMask};
use vecforge::Mode;

pub const VOCAB: usize = 20;
pub const DIM: usize = 8;

fn ln_sigmoid(x: f64) -> f64 {
    -(1.0 + (-x).exp()).ln()
}

/// Input vector composed straight from the architecture description,
/// without going through the kernel.
fn compose_input(mode: Mode, p: &DenseParams<f64>, tokens: &[u32], center: usize, window: usize) -> Vec<f64> {
    let w_in = |i: usize| &p.words[i * DIM..(i + 1) * DIM];
    let pad = VOCAB;
    match mode {
        Mode::SkipGram => w_in(tokens[center] as usize).to_vec(),
        Mode::Cbow => {
            let mut h = vec![0.0; DIM];
            for (j, &t) in tokens.iter().enumerate() {
                if j != center && j + window >= center && j <= center + window {
                    for (x, y) in h.iter_mut().zip(w_in(t as usize)) {
                        *x += y;
                    }
                }
            }
            h
        }
        Mode::Dbow => p.docs[..DIM].to_vec(),
        Mode::Dmpv => {
            let mut h = p.docs[..DIM].to_vec();
            let at = |j: isize| {
                if j < 0 || j as usize >= tokens.len() {
                    pad
                } else {
                    tokens[j as usize] as usize
                }
            };
            let c = center as isize;
            let w = window as isize;
            for j in (c - w..c).chain(c + 1..=c + w) {
                h.extend_from_slice(w_in(at(j)));
            }
            h
        }
    }
}

/// Negative-sampling loss for one prediction, computed from scratch.
fn oracle_loss(
    mode: Mode,
    p: &DenseParams<f64>,
    tokens: &[u32],
    center: usize,
    window: usize,
    outputs: &[(usize, bool)],
) -> f64 {
    let h = compose_input(mode, p, tokens, center, window);
    let width = h.len();
    outputs
        .iter()
        .map(|&(row, positive)| {
            let v = &p.outputs[row * width..(row + 1) * width];
            let s: f64 = v.iter().zip(&h).map(|(a, b)| a * b).sum();
            if positive {
                -ln_sigmoid(s)
            } else {
                -ln_sigmoid(-s)
            }
        })
        .sum()
}

/// Relative error, over all parameters at once, between the kernel's update
/// (taken with learning rate 1, so the change equals minus the gradient)
/// and central finite differences of the oracle loss.
pub fn gradient_relative_error(mode: Mode, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = 2;
    let width = if mode == Mode::Dmpv { DIM * (2 * window + 1) } else { DIM };
    let mut p = DenseParams::<f64>::zeros(VOCAB + 1, VOCAB, 1, DIM, width);
    for table in [Table::Words, Table::Outputs, Table::Docs] {
        for x in p.table_mut(table) {
            *x = rng.random_range(-0.5..0.5);
        }
    }
    let tokens: Vec<u32> = (0..7).map(|_| rng.random_range(0..VOCAB as u32)).collect();
    let center = rng.random_range(0..tokens.len());

    let mut ctx = TrainingContext::default();
    assert!(kernel::build_input(mode, 0, &tokens, center, window, window, VOCAB, &mut ctx));
    let target = ctx.targets[0];
    // Distinct output rows so sequential output updates cannot interact.
    let mut outputs = vec![(target, true)];
    while outputs.len() < 6 {
        let w = rng.random_range(0..VOCAB);
        if outputs.iter().all(|&(r, _)| r != w) {
            outputs.push((w, false));
        }
    }
    let loss_at = |q: &DenseParams<f64>| oracle_loss(mode, q, &tokens, center, window, &outputs);

    let mut stepped = p.clone();
    let mut h = vec![0.0; width];
    let mut grad = vec![0.0; width];
    kernel::gather(&stepped, &ctx, &mut h);
    let kernel_loss = kernel::negative_sampling_step(&mut stepped, &h, &outputs, 1.0, true, &mut grad);
    kernel::scatter(&mut stepped, &ctx, &grad, 1.0, UpdateMask::ALL);
    assert!((kernel_loss - loss_at(&p)).abs() < 1e-12, "kernel loss disagrees with oracle");

    let eps = 1e-6;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for table in [Table::Words, Table::Outputs, Table::Docs] {
        for i in 0..p.table(table).len() {
            let analytic = p.table(table)[i] - stepped.table(table)[i];
            let mut plus = p.clone();
            plus.table_mut(table)[i] += eps;
            let mut minus = p.clone();
            minus.table_mut(table)[i] -= eps;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * eps);
            num += (analytic - numeric).powi(2);
            den += analytic.powi(2).max(numeric.powi(2));
        }
    }
    assert!(den > 0.0, "degenerate gradient");
    (num / den).sqrt()
}

/// AUC by counting every positive/negative pair.
pub fn brute_force_auc(pairs: &[(f64, bool)]) -> f64 {
    let mut credit = 0.0;
    let mut total = 0.0;
    for &(sp, _) in pairs.iter().filter(|p| p.1) {
        for &(sn, _) in pairs.iter().filter(|p| !p.1) {
            total += 1.0;
            if sp > sn {
                credit += 1.0;
            } else if sp == sn {
                credit += 0.5;
            }
        }
    }
    credit / total
}

/// Sample correlation from the textbook sums formula.
pub fn direct_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}
