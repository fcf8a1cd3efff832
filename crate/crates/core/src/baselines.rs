//! Non-doc2vec document scorers: word-vector averaging and n-gram
//! Jensen-Shannon similarity.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::embedding::{DocVector, EmbeddingModel};

/// Largest n-gram order used by default.
pub const DEFAULT_MAX_ORDER: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("empty token sequence")]
    EmptySequence,
    #[error("no in-vocabulary tokens")]
    AllOutOfVocabulary,
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
}

/// Component-wise mean of the input vectors of all in-vocabulary tokens.
pub fn average_embedding<S: AsRef<str>>(
    model: &EmbeddingModel,
    tokens: &[S],
) -> Result<DocVector, BaselineError> {
    let mut ids: Vec<usize> = tokens
        .iter()
        .filter_map(|t| model.vocabulary().position(t.as_ref()))
        .collect();
    if ids.is_empty() {
        return Err(BaselineError::AllOutOfVocabulary);
    }
    // Fixed summation order makes the result independent of token order.
    ids.sort_unstable();
    let mut sum = vec![0.0f64; model.dim()];
    for &id in &ids {
        for (s, &x) in sum.iter_mut().zip(model.w_in().row(id)) {
            *s += f64::from(x);
        }
    }
    let n = ids.len() as f64;
    Ok(DocVector {
        tag: "average".into(),
        values: sum.into_iter().map(|s| (s / n) as f32).collect(),
    })
}

/// Maximum-likelihood distribution over a document's contiguous n-grams of
/// orders `1..=max_order`, pooled into a single distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct NgramProfile {
    probs: BTreeMap<Vec<String>, f64>,
}

impl NgramProfile {
    pub fn new<S: AsRef<str>>(tokens: &[S], max_order: usize) -> Result<Self, BaselineError> {
        if tokens.is_empty() {
            return Err(BaselineError::EmptySequence);
        }
        if max_order == 0 {
            return Err(BaselineError::ZeroOrder);
        }
        let tokens: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
        let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        let mut total = 0u64;
        for n in 1..=max_order.min(tokens.len()) {
            for gram in tokens.windows(n) {
                *counts.entry(gram.iter().map(|s| s.to_string()).collect()).or_default() += 1;
                total += 1;
            }
        }
        let probs = counts.into_iter().map(|(g, c)| (g, c as f64 / total as f64)).collect();
        Ok(NgramProfile { probs })
    }

    pub fn prob<S: AsRef<str>>(&self, gram: &[S]) -> f64 {
        let key: Vec<String> = gram.iter().map(|s| s.as_ref().to_owned()).collect();
        self.probs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], f64)> {
        self.probs.iter().map(|(g, &p)| (g.as_slice(), p))
    }
}

/// Jensen-Shannon divergence in nats, in `[0, ln 2]`.
///
/// The support union is walked in sorted order and each term is formed
/// symmetrically, so `js_divergence(p, q) == js_divergence(q, p)` bit for bit.
pub fn js_divergence(p: &NgramProfile, q: &NgramProfile) -> f64 {
    let mut a = p.probs.iter().peekable();
    let mut b = q.probs.iter().peekable();
    let mut total = 0.0;
    loop {
        let (pi, qi) = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => (a.next().unwrap().1, &0.0),
            (None, Some(_)) => (&0.0, b.next().unwrap().1),
            (Some((ka, _)), Some((kb, _))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => (a.next().unwrap().1, &0.0),
                std::cmp::Ordering::Greater => (&0.0, b.next().unwrap().1),
                std::cmp::Ordering::Equal => (a.next().unwrap().1, b.next().unwrap().1),
            },
        };
        let m = 0.5 * (pi + qi);
        total += 0.5 * (kl_term(*pi, m) + kl_term(*qi, m));
    }
    total.clamp(0.0, std::f64::consts::LN_2)
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p > 0.0 { p * (p / m).ln() } else { 0.0 }
}

/// Negated Jensen-Shannon divergence of the two documents' n-gram profiles;
/// 0 for identical documents, `-ln 2` for disjoint ones.
pub fn ngram_similarity<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<f64, BaselineError> {
    ngram_similarity_with_order(a, b, DEFAULT_MAX_ORDER)
}

pub fn ngram_similarity_with_order<S: AsRef<str>>(
    a: &[S],
    b: &[S],
    max_order: usize,
) -> Result<f64, BaselineError> {
    let p = NgramProfile::new(a, max_order)?;
    let q = NgramProfile::new(b, max_order)?;
    Ok(-js_divergence(&p, &q))
}
