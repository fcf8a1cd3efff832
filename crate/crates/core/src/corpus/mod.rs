//! Corpus ingestion, vocabulary construction, subsampling and noise sampling.
//!
//! Input text is expected to be tokenized and lowercased already; tokens are
//! split on whitespace and used verbatim.

mod noise;
mod vocab;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub use noise::NoiseTable;
pub use vocab::{keep_probability, VocabEntry, Vocabulary, NOISE_EXPONENT};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no tokens survive min_count")]
    NoTokensSurvive,
    #[error("invalid vocabulary parameter: {0}")]
    InvalidParam(String),
    #[error("duplicate document tag {tag:?} on line {line}")]
    DuplicateTag { tag: String, line: usize },
    #[error("line {line} has no tab-separated tag")]
    MissingTag { line: usize },
    #[error("unknown corpus format {0:?} (expected tagged-lines or plain-lines)")]
    UnknownFormat(String),
    #[error("malformed vocabulary line {line}")]
    MalformedVocab { line: usize },
    #[error("vocabulary entry {surface:?} has count {count} below min_count {min_count}")]
    BelowMinCount { surface: String, count: u64, min_count: u64 },
    #[error("vocabulary is not sorted by descending count at {0:?}")]
    Unsorted(String),
    #[error("word type {0:?} appears twice in vocabulary")]
    DuplicateType(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `tag<TAB>token token ...`
    TaggedLines,
    /// One document of whitespace-separated tokens per line, tagged by its
    /// 0-based line number.
    PlainLines,
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tagged-lines" | "tagged" => Ok(CorpusFormat::TaggedLines),
            "plain-lines" | "plain" => Ok(CorpusFormat::PlainLines),
            other => Err(CorpusError::UnknownFormat(other.to_owned())),
        }
    }
}

/// A document as read from disk, before vocabulary lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDocument {
    pub tag: String,
    pub tokens: Vec<String>,
}

impl RawDocument {
    pub fn new<T: Into<String>>(tag: T, tokens: Vec<String>) -> Self {
        RawDocument { tag: tag.into(), tokens }
    }
}

/// A tagged document as a sequence of vocabulary positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub tag: String,
    pub tokens: Vec<u32>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub vocabulary: Vocabulary,
    pub documents: Vec<Document>,
    /// Token count before out-of-vocabulary tokens were dropped.
    pub total_token_count: u64,
}

impl Corpus {
    /// Builds the vocabulary over all documents and maps each one onto it.
    ///
    /// If no token survives `min_count` the corpus still loads, with an
    /// empty vocabulary and only empty documents; training on it fails.
    pub fn from_raw(
        docs: &[RawDocument],
        min_count: u64,
        subsample_t: f64,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if !seen.insert(doc.tag.as_str()) {
                return Err(CorpusError::DuplicateTag { tag: doc.tag.clone(), line: i + 1 });
            }
        }

        let stream = docs.iter().flat_map(|d| d.tokens.iter());
        let vocabulary = match Vocabulary::build(stream, min_count, subsample_t) {
            Ok(v) => v,
            Err(CorpusError::NoTokensSurvive) => Vocabulary::empty(min_count, subsample_t),
            Err(e) => return Err(e),
        };
        let documents = docs
            .iter()
            .map(|d| Document {
                tag: d.tag.clone(),
                tokens: d
                    .tokens
                    .iter()
                    .filter_map(|t| vocabulary.position(t).map(|p| p as u32))
                    .collect(),
            })
            .collect();
        let total_token_count = docs.iter().map(|d| d.tokens.len() as u64).sum();
        Ok(Corpus { vocabulary, documents, total_token_count })
    }

    pub fn load<P: AsRef<Path>>(
        path: P,
        format: CorpusFormat,
        min_count: u64,
        subsample_t: f64,
    ) -> Result<Self, CorpusError> {
        let raw = read_documents(path, format)?;
        Corpus::from_raw(&raw, min_count, subsample_t)
    }

    /// Indices of documents that have no in-vocabulary tokens. These are
    /// skipped during training.
    pub fn empty_documents(&self) -> Vec<usize> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn non_empty_count(&self) -> usize {
        self.documents.iter().filter(|d| !d.is_empty()).count()
    }
}

pub fn read_documents<P: AsRef<Path>>(
    path: P,
    format: CorpusFormat,
) -> Result<Vec<RawDocument>, CorpusError> {
    parse_documents(BufReader::new(File::open(path)?), format)
}

pub fn parse_documents<R: BufRead>(
    reader: R,
    format: CorpusFormat,
) -> Result<Vec<RawDocument>, CorpusError> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let (tag, body) = match format {
            CorpusFormat::TaggedLines => {
                let (tag, body) = line
                    .split_once('\t')
                    .ok_or(CorpusError::MissingTag { line: lineno + 1 })?;
                (tag.to_owned(), body)
            }
            CorpusFormat::PlainLines => (lineno.to_string(), line.as_str()),
        };
        if !seen.insert(tag.clone()) {
            return Err(CorpusError::DuplicateTag { tag, line: lineno + 1 });
        }
        let tokens = body.split_whitespace().map(str::to_owned).collect();
        docs.push(RawDocument { tag, tokens });
    }
    Ok(docs)
}
