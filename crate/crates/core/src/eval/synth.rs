use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{QdupPair, StsRecord};
use crate::corpus::RawDocument;

/// Parameters of the synthetic topic corpus.
///
/// Every topic owns `vocab_per_topic` content words. A fraction
/// `function_rate` of each document's tokens are drawn instead from
/// `n_function_words` shared function words with Zipfian frequencies, which
/// makes them far more frequent than any content word. Each original
/// document also picks `focus_words` of its topic's content words and draws
/// a fraction `focus_rate` of its content tokens from that set, so documents
/// of one topic differ in what they emphasise. After the first
/// document of a topic, each new document is with probability `dup_fraction`
/// a near-copy of an earlier original of the same topic, each token
/// surviving with probability `1 - dropout`; every such copy yields a
/// positive duplicate pair. Negative pairs join documents from different
/// topics.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub doc_len: usize,
    pub vocab_per_topic: usize,
    pub n_function_words: usize,
    pub function_rate: f64,
    pub focus_words: usize,
    pub focus_rate: f64,
    pub dup_fraction: f64,
    pub dropout: f64,
    /// Negative pairs per document in the corpus.
    pub negatives_per_doc: f64,
    /// Similarity records per document in the corpus.
    pub sts_per_doc: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_topics: 4,
            docs_per_topic: 200,
            doc_len: 40,
            vocab_per_topic: 500,
            n_function_words: 50,
            function_rate: 0.3,
            focus_words: 5,
            focus_rate: 0.8,
            dup_fraction: 0.1,
            dropout: 0.25,
            negatives_per_doc: 0.5,
            sts_per_doc: 0.25,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticData {
    pub documents: Vec<RawDocument>,
    pub qdup: Vec<QdupPair>,
    pub sts: Vec<StsRecord>,
    /// Topic of each document, parallel to `documents`.
    pub topics: Vec<usize>,
}

impl SyntheticData {
    pub fn content_word(topic: usize, i: usize) -> String {
        format!("t{topic}w{i}")
    }

    pub fn function_word(i: usize) -> String {
        format!("fw{i}")
    }
}

struct Sampler<'c> {
    cfg: &'c SynthConfig,
    function_cdf: Vec<f64>,
}

impl Sampler<'_> {
    fn token<R: Rng>(&self, topic: usize, focus: &[usize], rng: &mut R) -> String {
        if self.cfg.n_function_words > 0 && rng.random::<f64>() < self.cfg.function_rate {
            let u: f64 = rng.random();
            let i = self.function_cdf.partition_point(|&c| c <= u).min(self.function_cdf.len() - 1);
            SyntheticData::function_word(i)
        } else if !focus.is_empty() && rng.random::<f64>() < self.cfg.focus_rate {
            SyntheticData::content_word(topic, focus[rng.random_range(0..focus.len())])
        } else {
            SyntheticData::content_word(topic, rng.random_range(0..self.cfg.vocab_per_topic))
        }
    }

    fn document<R: Rng>(&self, topic: usize, rng: &mut R) -> Vec<String> {
        let focus: Vec<usize> =
            (0..self.cfg.focus_words).map(|_| rng.random_range(0..self.cfg.vocab_per_topic)).collect();
        (0..self.cfg.doc_len).map(|_| self.token(topic, &focus, rng)).collect()
    }
}

/// Generates a corpus, duplicate pairs and graded similarity records.
/// Output is fully determined by the config, including its seed.
pub fn make_synthetic(cfg: &SynthConfig) -> SyntheticData {
    let cfg = SynthConfig {
        n_topics: cfg.n_topics.max(1),
        docs_per_topic: cfg.docs_per_topic.max(1),
        doc_len: cfg.doc_len.max(1),
        vocab_per_topic: cfg.vocab_per_topic.max(1),
        ..cfg.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<f64> = (0..cfg.n_function_words).map(|i| 1.0 / (i + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let function_cdf = weights.iter().map(|w| { acc += w / total; acc }).collect();
    let sampler = Sampler { cfg: &cfg, function_cdf };

    let mut documents = Vec::new();
    let mut topics = Vec::new();
    let mut qdup = Vec::new();
    let mut originals: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_topics];
    for topic in 0..cfg.n_topics {
        for i in 0..cfg.docs_per_topic {
            let tag = format!("t{topic}d{i}");
            let is_dup = !originals[topic].is_empty() && rng.random::<f64>() < cfg.dup_fraction;
            let tokens = if is_dup {
                let src = originals[topic][rng.random_range(0..originals[topic].len())];
                let source: &RawDocument = &documents[src];
                let mut kept: Vec<String> =
                    source.tokens.iter().filter(|_| rng.random::<f64>() >= cfg.dropout).cloned().collect();
                if kept.is_empty() {
                    kept.push(source.tokens[0].clone());
                }
                qdup.push(QdupPair { tag_a: source.tag.clone(), tag_b: tag.clone(), duplicate: true });
                kept
            } else {
                originals[topic].push(documents.len());
                sampler.document(topic, &mut rng)
            };
            documents.push(RawDocument { tag, tokens });
            topics.push(topic);
        }
    }

    let n_docs = documents.len();
    if cfg.n_topics > 1 {
        let n_neg = (cfg.negatives_per_doc * n_docs as f64).round() as usize;
        for _ in 0..n_neg {
            let a = rng.random_range(0..n_docs);
            let b = loop {
                let b = rng.random_range(0..n_docs);
                if topics[b] != topics[a] {
                    break b;
                }
            };
            qdup.push(QdupPair {
                tag_a: documents[a].tag.clone(),
                tag_b: documents[b].tag.clone(),
                duplicate: false,
            });
        }
    }

    // Similarity records: an original against a variant that keeps each
    // token with probability gold / 5 and otherwise substitutes a token
    // from another topic.
    let all_originals: Vec<usize> = originals.concat();
    let n_sts = (cfg.sts_per_doc * n_docs as f64).round() as usize;
    let mut sts = Vec::with_capacity(n_sts);
    for _ in 0..n_sts {
        let src = all_originals[rng.random_range(0..all_originals.len())];
        let topic = topics[src];
        let level = rng.random_range(0..=5u32);
        let keep = f64::from(level) / 5.0;
        let other = if cfg.n_topics > 1 {
            (topic + rng.random_range(1..cfg.n_topics)) % cfg.n_topics
        } else {
            topic
        };
        let b = documents[src]
            .tokens
            .iter()
            .map(|t| if rng.random::<f64>() < keep { t.clone() } else { sampler.token(other, &[], &mut rng) })
            .collect();
        sts.push(StsRecord { a: documents[src].tokens.clone(), b, gold: f64::from(level) });
    }

    SyntheticData { documents, qdup, sts, topics }
}
