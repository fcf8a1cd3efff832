//! Metrics, the duplicate-pair and sentence-similarity protocols, and a
//! synthetic corpus generator.

mod metrics;
mod scorer;
mod synth;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::corpus::RawDocument;

pub use metrics::{pearson, roc_auc};
pub use scorer::{AverageScorer, Doc2VecScorer, DocInput, NgramScorer, PairScorer, ScoreError};
pub use synth::{make_synthetic, SynthConfig, SyntheticData};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("AUC needs both classes, got {positives} positives and {negatives} negatives")]
    OneClass { positives: usize, negatives: usize },
    #[error("score is not finite")]
    NonFiniteScore,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 scorable pairs, got {0}")]
    TooFewPairs(usize),
    #[error("zero variance: correlation undefined")]
    ZeroVariance,
    #[error("unknown document tag {0:?}")]
    UnknownTag(String),
    #[error("malformed record on line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    QDup,
    Sts,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::QDup => "qdup",
            Task::Sts => "sts",
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            Task::QDup => "auc",
            Task::Sts => "pearson",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Label {
    Duplicate(bool),
    Gold(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPair {
    pub tag_a: String,
    pub tag_b: String,
    pub score: f64,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    /// ROC AUC for duplicate detection, Pearson's r for similarity.
    pub value: f64,
    pub pairs: usize,
    pub skipped: usize,
    /// Duplicate-detection only.
    pub positives: Option<usize>,
    pub scores: Vec<ScoredPair>,
    /// One message per skipped pair.
    pub warnings: Vec<String>,
}

impl EvalReport {
    /// `task<TAB>metric<TAB>value<TAB>pairs<TAB>skipped`
    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{:.6}\t{}\t{}",
            self.task.name(),
            self.task.metric_name(),
            self.value,
            self.pairs,
            self.skipped
        )
    }

    /// One `tag_a<TAB>tag_b<TAB>score<TAB>label` line per scored pair.
    pub fn write_scores<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.scores {
            let label = match p.label {
                Label::Duplicate(d) => u8::from(d).to_string(),
                Label::Gold(g) => g.to_string(),
            };
            writeln!(w, "{}\t{}\t{}\t{}", p.tag_a, p.tag_b, p.score, label)?;
        }
        w.flush()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tsv_line())
    }
}

/// One line of a duplicate-pairs file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QdupPair {
    pub tag_a: String,
    pub tag_b: String,
    pub duplicate: bool,
}

/// One line of a similarity file: two tokenized sentences and a gold score
/// in [0, 5].
#[derive(Clone, Debug, PartialEq)]
pub struct StsRecord {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub gold: f64,
}

/// Scores every pair and computes ROC AUC over the scorable ones. Pairs the
/// scorer cannot handle are skipped and reported.
pub fn run_qdup<S: PairScorer + ?Sized>(
    scorer: &S,
    documents: &[RawDocument],
    pairs: &[QdupPair],
) -> Result<EvalReport, EvalError> {
    let positives = pairs.iter().filter(|p| p.duplicate).count();
    if positives == 0 || positives == pairs.len() {
        return Err(EvalError::OneClass { positives, negatives: pairs.len() - positives });
    }
    let index: HashMap<&str, &RawDocument> = documents.iter().map(|d| (d.tag.as_str(), d)).collect();
    let lookup = |tag: &str| index.get(tag).copied().ok_or_else(|| EvalError::UnknownTag(tag.to_owned()));

    let mut scores = Vec::with_capacity(pairs.len());
    let mut warnings = Vec::new();
    for pair in pairs {
        let a = lookup(&pair.tag_a)?;
        let b = lookup(&pair.tag_b)?;
        match scorer.score(&DocInput::tagged(a), &DocInput::tagged(b)) {
            Ok(score) => scores.push(ScoredPair {
                tag_a: pair.tag_a.clone(),
                tag_b: pair.tag_b.clone(),
                score,
                label: Label::Duplicate(pair.duplicate),
            }),
            Err(e) => warnings.push(format!("skipping pair {} / {}: {e}", pair.tag_a, pair.tag_b)),
        }
    }

    let labelled: Vec<(f64, bool)> = scores
        .iter()
        .map(|p| (p.score, matches!(p.label, Label::Duplicate(true))))
        .collect();
    let value = roc_auc(&labelled)?;
    Ok(EvalReport {
        task: Task::QDup,
        value,
        pairs: scores.len(),
        skipped: warnings.len(),
        positives: Some(labelled.iter().filter(|p| p.1).count()),
        scores,
        warnings,
    })
}

/// Pearson's r between scorer outputs and gold similarity.
pub fn run_sts<S: PairScorer + ?Sized>(scorer: &S, records: &[StsRecord]) -> Result<EvalReport, EvalError> {
    let mut scores = Vec::with_capacity(records.len());
    let mut warnings = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let (tag_a, tag_b) = (format!("{i}a"), format!("{i}b"));
        match scorer.score(&DocInput::untagged(&rec.a), &DocInput::untagged(&rec.b)) {
            Ok(score) => scores.push(ScoredPair { tag_a, tag_b, score, label: Label::Gold(rec.gold) }),
            Err(e) => warnings.push(format!("skipping record {i}: {e}")),
        }
    }
    let predicted: Vec<f64> = scores.iter().map(|p| p.score).collect();
    let gold: Vec<f64> = scores
        .iter()
        .map(|p| match p.label {
            Label::Gold(g) => g,
            Label::Duplicate(_) => unreachable!("similarity pairs carry gold scores"),
        })
        .collect();
    let value = pearson(&predicted, &gold)?;
    Ok(EvalReport {
        task: Task::Sts,
        value,
        pairs: scores.len(),
        skipped: warnings.len(),
        positives: None,
        scores,
        warnings,
    })
}

pub fn read_qdup_pairs<P: AsRef<Path>>(path: P) -> Result<Vec<QdupPair>, EvalError> {
    parse_qdup_pairs(BufReader::new(File::open(path)?))
}

pub fn parse_qdup_pairs<R: BufRead>(reader: R) -> Result<Vec<QdupPair>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: &str| EvalError::Malformed { line: i + 1, reason: reason.to_owned() };
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, label] = fields[..] else {
            return Err(malformed("expected tag_a, tag_b, label"));
        };
        let duplicate = match label.trim() {
            "1" => true,
            "0" => false,
            _ => return Err(malformed("label must be 0 or 1")),
        };
        out.push(QdupPair { tag_a: a.to_owned(), tag_b: b.to_owned(), duplicate });
    }
    Ok(out)
}

pub fn write_qdup_pairs<W: Write>(mut w: W, pairs: &[QdupPair]) -> std::io::Result<()> {
    for p in pairs {
        writeln!(w, "{}\t{}\t{}", p.tag_a, p.tag_b, u8::from(p.duplicate))?;
    }
    w.flush()
}

pub fn read_sts<P: AsRef<Path>>(path: P) -> Result<Vec<StsRecord>, EvalError> {
    parse_sts(BufReader::new(File::open(path)?))
}

pub fn parse_sts<R: BufRead>(reader: R) -> Result<Vec<StsRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: &str| EvalError::Malformed { line: i + 1, reason: reason.to_owned() };
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, gold] = fields[..] else {
            return Err(malformed("expected sentence_a, sentence_b, gold"));
        };
        let gold: f64 = gold.trim().parse().map_err(|_| malformed("gold score is not a number"))?;
        if !(0.0..=5.0).contains(&gold) {
            return Err(malformed("gold score outside [0, 5]"));
        }
        let split = |s: &str| s.split_whitespace().map(str::to_owned).collect::<Vec<_>>();
        out.push(StsRecord { a: split(a), b: split(b), gold });
    }
    Ok(out)
}

pub fn write_sts<W: Write>(mut w: W, records: &[StsRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}\t{}\t{}", r.a.join(" "), r.b.join(" "), r.gold)?;
    }
    w.flush()
}
