use rand::Rng;

use super::Vocabulary;

/// Cumulative distribution over vocabulary positions, proportional to each
/// entry's noise weight.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(vocab: &Vocabulary) -> Self {
        Self::from_weights(vocab.entries().iter().map(|e| e.noise_weight))
    }

    /// # Panics
    ///
    /// Panics if the weights are empty, negative, or sum to zero.
    pub fn from_weights<I: IntoIterator<Item = f64>>(weights: I) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .into_iter()
            .map(|w| {
                assert!(w >= 0.0 && w.is_finite(), "noise weight must be finite and non-negative");
                acc += w;
                acc
            })
            .collect();
        assert!(acc > 0.0, "noise table needs positive total weight");
        for c in &mut cumulative {
            *c /= acc;
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        NoiseTable { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, pos: usize) -> f64 {
        let prev = if pos == 0 { 0.0 } else { self.cumulative[pos - 1] };
        self.cumulative[pos] - prev
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // First position whose cumulative mass exceeds u; zero-weight entries
        // share their predecessor's cumulative value and are never chosen.
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}
