use super::TrainError;
use crate::embedding::{EmbeddingModel, WordVectors};

/// How much of the vocabulary a pretrained vector set covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub matched: usize,
    pub vocab_size: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        if self.vocab_size == 0 { 0.0 } else { self.matched as f64 / self.vocab_size as f64 }
    }
}

/// Overwrites the input vector of every vocabulary word found in `vectors`.
/// Words without a pretrained vector keep their current values.
pub fn init_from_pretrained(
    model: &mut EmbeddingModel,
    vectors: &WordVectors,
) -> Result<Coverage, TrainError> {
    if vectors.dim() != model.dim() {
        return Err(TrainError::DimensionMismatch { got: vectors.dim(), expected: model.dim() });
    }
    let positions: Vec<(usize, usize)> = vectors
        .tokens
        .iter()
        .enumerate()
        .filter_map(|(row, tok)| model.vocabulary().position(tok).map(|pos| (pos, row)))
        .collect();

    let (w_in, _, _) = model.matrices_mut();
    let mut seen = vec![false; w_in.rows()];
    let mut matched = 0;
    for (pos, row) in positions {
        w_in.row_mut(pos).copy_from_slice(vectors.vectors.row(row));
        if !std::mem::replace(&mut seen[pos], true) {
            matched += 1;
        }
    }
    Ok(Coverage { matched, vocab_size: model.vocabulary().len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, RawDocument};
    use crate::embedding::{Hyperparams, Matrix, Mode};
    use crate::train::initialize;

    fn fresh() -> EmbeddingModel {
        let words: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let corpus = Corpus::from_raw(&[RawDocument::new("0", words)], 1, 1e-3).unwrap();
        let params = Hyperparams { vector_size: 2, min_count: 1, ..Hyperparams::for_mode(Mode::SkipGram) };
        initialize(&corpus, &params).unwrap()
    }

    fn vectors(tokens: &[&str]) -> WordVectors {
        let data = (0..tokens.len() * 2).map(|i| 10.0 + i as f32).collect();
        WordVectors {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            vectors: Matrix::from_vec(tokens.len(), 2, data).unwrap(),
        }
    }

    #[test]
    fn no_overlap_is_a_no_op() {
        let mut m = fresh();
        let before = m.clone();
        let cov = init_from_pretrained(&mut m, &vectors(&["x", "y"])).unwrap();
        assert_eq!(cov.matched, 0);
        assert_eq!(cov.ratio(), 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn full_coverage_overwrites_all() {
        let mut m = fresh();
        let wv = vectors(&["e", "d", "c", "b", "a"]);
        let cov = init_from_pretrained(&mut m, &wv).unwrap();
        assert_eq!(cov.ratio(), 1.0);
        for (row, tok) in wv.tokens.iter().enumerate() {
            assert_eq!(m.word_vector(tok).unwrap(), wv.vectors.row(row));
        }
    }

    #[test]
    fn partial_coverage_replaces_exactly_the_overlap() {
        let mut m = fresh();
        let before = m.clone();
        let cov = init_from_pretrained(&mut m, &vectors(&["a", "zz", "c", "e", "qq"])).unwrap();
        assert_eq!(cov, Coverage { matched: 3, vocab_size: 5 });
        let changed = (0..5).filter(|&r| m.w_in().row(r) != before.w_in().row(r)).count();
        assert_eq!(changed, 3);
    }

    #[test]
    fn dimension_mismatch() {
        let mut m = fresh();
        let wv = WordVectors { tokens: vec!["a".into()], vectors: Matrix::zeros(1, 3) };
        assert!(matches!(
            init_from_pretrained(&mut m, &wv),
            Err(TrainError::DimensionMismatch { got: 3, expected: 2 })
        ));
    }
}
