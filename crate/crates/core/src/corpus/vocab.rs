use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::CorpusError;

/// Exponent applied to raw counts to obtain the noise distribution.
pub const NOISE_EXPONENT: f64 = 0.75;

/// A single word type that survived the frequency cut-off.
#[derive(Clone, Debug, PartialEq)]
pub struct VocabEntry {
    pub surface: String,
    pub count: u64,
    /// Probability that one occurrence survives subsampling.
    pub keep_prob: f64,
    /// Unnormalized weight of this type in the noise distribution.
    pub noise_weight: f64,
}

/// Probability of keeping one occurrence of a word with relative frequency
/// `count / total` under subsampling threshold `t`: `min(1, sqrt(t / f))`.
pub fn keep_probability(count: u64, total: u64, t: f64) -> f64 {
    let f = count as f64 / total as f64;
    (t / f).sqrt().min(1.0)
}

/// Frequency-filtered token table, ordered by descending count.
///
/// Ties are broken by the order in which types were first seen, so building
/// twice from the same token stream always yields the same indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
    subsample_t: f64,
}

impl Vocabulary {
    /// An empty vocabulary; only produced when loading a corpus with no
    /// surviving tokens.
    pub fn empty(min_count: u64, subsample_t: f64) -> Self {
        Vocabulary {
            entries: Vec::new(),
            index: HashMap::new(),
            total_tokens: 0,
            min_count,
            subsample_t,
        }
    }

    pub fn build<I, S>(tokens: I, min_count: u64, subsample_t: f64) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        validate_params(min_count, subsample_t)?;

        let mut positions: HashMap<String, usize> = HashMap::new();
        let mut counted: Vec<(String, u64)> = Vec::new();
        for token in tokens {
            let token = token.as_ref();
            match positions.get(token) {
                Some(&pos) => counted[pos].1 += 1,
                None => {
                    positions.insert(token.to_owned(), counted.len());
                    counted.push((token.to_owned(), 1));
                }
            }
        }

        counted.retain(|(_, count)| *count >= min_count);
        // Stable sort keeps first-seen order among equal counts.
        counted.sort_by(|a, b| b.1.cmp(&a.1));
        Self::from_counts(counted, min_count, subsample_t)
    }

    /// Builds from `(surface, count)` pairs that are already in vocabulary
    /// order.
    pub fn from_counts(
        counted: Vec<(String, u64)>,
        min_count: u64,
        subsample_t: f64,
    ) -> Result<Self, CorpusError> {
        validate_params(min_count, subsample_t)?;
        if counted.is_empty() {
            return Err(CorpusError::NoTokensSurvive);
        }

        let total_tokens: u64 = counted.iter().map(|(_, c)| c).sum();
        let mut index = HashMap::with_capacity(counted.len());
        let mut entries = Vec::with_capacity(counted.len());
        for (pos, (surface, count)) in counted.into_iter().enumerate() {
            if count < min_count {
                return Err(CorpusError::BelowMinCount { surface, count, min_count });
            }
            if pos > 0 && entries.last().is_some_and(|prev: &VocabEntry| prev.count < count) {
                return Err(CorpusError::Unsorted(surface));
            }
            if index.insert(surface.clone(), pos).is_some() {
                return Err(CorpusError::DuplicateType(surface));
            }
            entries.push(VocabEntry {
                keep_prob: keep_probability(count, total_tokens, subsample_t),
                noise_weight: (count as f64).powf(NOISE_EXPONENT),
                surface,
                count,
            });
        }

        Ok(Vocabulary { entries, index, total_tokens, min_count, subsample_t })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, pos: usize) -> Option<&VocabEntry> {
        self.entries.get(pos)
    }

    pub fn position(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    /// Sum of the counts of all retained types.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn subsample_t(&self) -> f64 {
        self.subsample_t
    }

    /// Writes `surface<TAB>count` lines in vocabulary order.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for entry in &self.entries {
            writeln!(writer, "{}\t{}", entry.surface, entry.count)?;
        }
        writer.flush()
    }

    /// Parses the output of [`Vocabulary::write_tsv`].
    pub fn read_tsv<R: BufRead>(
        reader: R,
        min_count: u64,
        subsample_t: f64,
    ) -> Result<Self, CorpusError> {
        let mut counted = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let malformed = || CorpusError::MalformedVocab { line: lineno + 1 };
            let (surface, count) = line.split_once('\t').ok_or_else(malformed)?;
            let count = count.trim().parse::<u64>().map_err(|_| malformed())?;
            counted.push((surface.to_owned(), count));
        }
        Self::from_counts(counted, min_count, subsample_t)
    }
}

fn validate_params(min_count: u64, subsample_t: f64) -> Result<(), CorpusError> {
    if min_count < 1 {
        return Err(CorpusError::InvalidParam("min_count must be at least 1".into()));
    }
    if !(subsample_t > 0.0 && subsample_t.is_finite()) {
        return Err(CorpusError::InvalidParam("subsampling threshold must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tokens(spec: &[(&str, usize)]) -> Vec<String> {
        spec.iter()
            .flat_map(|(tok, n)| std::iter::repeat_n(tok.to_string(), *n))
            .collect()
    }

    #[test]
    fn min_count_filters_rare_types() {
        let vocab = Vocabulary::build(tokens(&[("a", 5), ("b", 1)]), 2, 1e-3).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.entries()[0].surface, "a");
        assert_eq!(vocab.position("b"), None);
        assert_eq!(vocab.total_tokens(), 5);
    }

    #[test]
    fn equal_counts_keep_first_seen_order() {
        let stream = ["b", "a", "a", "b", "a", "b"];
        let vocab = Vocabulary::build(stream, 1, 1e-3).unwrap();
        let order: Vec<_> = vocab.entries().iter().map(|e| e.surface.as_str()).collect();
        assert_eq!(order, ["b", "a"]);

        let vocab = Vocabulary::build(tokens(&[("a", 3), ("b", 3)]), 1, 1e-3).unwrap();
        assert_eq!(vocab.position("a"), Some(0));
        assert_eq!(vocab.position("b"), Some(1));
    }

    #[test]
    fn noise_weights_are_count_to_three_quarters() {
        let vocab = Vocabulary::build(tokens(&[("a", 81), ("b", 16)]), 1, 1e-3).unwrap();
        let w: Vec<f64> = vocab.entries().iter().map(|e| e.noise_weight).collect();
        assert!((w[0] - 27.0).abs() < 1e-12);
        assert!((w[1] - 8.0).abs() < 1e-12);
        assert!((w[0] / (w[0] + w[1]) - 27.0 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn empty_stream_is_an_error() {
        let err = Vocabulary::build(Vec::<String>::new(), 1, 1e-3).unwrap_err();
        assert!(matches!(err, CorpusError::NoTokensSurvive));
        assert_eq!(err.to_string(), "no tokens survive min_count");
        let err = Vocabulary::build(["a"], 2, 1e-3).unwrap_err();
        assert!(matches!(err, CorpusError::NoTokensSurvive));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Vocabulary::build(["a"], 0, 1e-3).is_err());
        assert!(Vocabulary::build(["a"], 1, 0.0).is_err());
    }

    #[test]
    fn keep_probability_examples() {
        let t = 1e-3;
        // f <= t
        assert_eq!(keep_probability(1, 10_000, t), 1.0);
        assert_eq!(keep_probability(10, 10_000, t), 1.0);
        // f = 4t and f = 100t
        assert!((keep_probability(4, 1000, t) - 0.5).abs() < 1e-12);
        assert!((keep_probability(100, 1000, t) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn tsv_round_trip() {
        let stream = "the cat sat on the mat the end cat".split(' ');
        let vocab = Vocabulary::build(stream, 1, 1e-2).unwrap();
        let mut buf = Vec::new();
        vocab.write_tsv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("the\t3\ncat\t2\n"));
        let parsed = Vocabulary::read_tsv(&buf[..], 1, 1e-2).unwrap();
        assert_eq!(parsed, vocab);
    }

    #[test]
    fn read_tsv_rejects_garbage() {
        assert!(matches!(
            Vocabulary::read_tsv(&b"a\t3\nb three\n"[..], 1, 1e-3),
            Err(CorpusError::MalformedVocab { line: 2 })
        ));
        assert!(matches!(
            Vocabulary::read_tsv(&b"a\t3\nb\t4\n"[..], 1, 1e-3),
            Err(CorpusError::Unsorted(_))
        ));
        assert!(matches!(
            Vocabulary::read_tsv(&b"a\t3\na\t3\n"[..], 1, 1e-3),
            Err(CorpusError::DuplicateType(_))
        ));
    }

    proptest! {
        #[test]
        fn keep_probability_bounded_and_non_increasing(
            count in 1u64..10_000,
            extra in 0u64..1_000_000,
            t in 1e-7f64..1.0,
        ) {
            let total = count + extra + 1;
            let p = keep_probability(count, total, t);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(keep_probability(count + 1, total, t) <= p);
        }

        #[test]
        fn build_round_trips_through_tsv(stream in proptest::collection::vec("[a-e]{1,2}", 1..200)) {
            let vocab = Vocabulary::build(&stream, 1, 1e-3).unwrap();
            let mut buf = Vec::new();
            vocab.write_tsv(&mut buf).unwrap();
            let parsed = Vocabulary::read_tsv(&buf[..], 1, 1e-3).unwrap();
            prop_assert_eq!(&parsed, &vocab);
            for (pos, entry) in vocab.entries().iter().enumerate() {
                prop_assert_eq!(vocab.position(&entry.surface), Some(pos));
            }
        }
    }
}
