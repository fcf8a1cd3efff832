use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vecforge::corpus::{read_documents, CorpusFormat, RawDocument, Vocabulary};
use vecforge::embedding::{
    load_model, load_word_vectors, save_model, write_word_vectors, EmbeddingModel, VectorFormat, WordVectors,
};
use vecforge::eval::{
    make_synthetic, read_qdup_pairs, read_sts, run_qdup, run_sts, write_qdup_pairs, write_sts, AverageScorer,
    Doc2VecScorer, EvalReport, NgramScorer, PairScorer, SynthConfig,
};
use vecforge::{cosine, infer_document, Corpus, Hyperparams, InferParams, Mode, Trainer};

use crate::{
    CorpusFormatArg, ExportArgs, InferArgs, InferenceArgs, InputArgs, ModeArg, NnArgs, QdupArgs, ScorerArg,
    ScorerArgs, StsArgs, SynthArgs, TrainArgs, VectorFormatArg, VocabArgs, WhichArg,
};

pub enum Failure {
    /// Bad flag combination or value; exit status 1.
    Usage(String),
    /// Unreadable or invalid data or model; exit status 2.
    Data(String),
}

type Outcome = Result<(), Failure>;

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn with_path<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sg => Mode::SkipGram,
            ModeArg::Cbow => Mode::Cbow,
            ModeArg::Dbow => Mode::Dbow,
            ModeArg::Dmpv => Mode::Dmpv,
        }
    }
}

impl From<CorpusFormatArg> for CorpusFormat {
    fn from(f: CorpusFormatArg) -> Self {
        match f {
            CorpusFormatArg::Tagged => CorpusFormat::TaggedLines,
            CorpusFormatArg::Plain => CorpusFormat::PlainLines,
        }
    }
}

impl From<VectorFormatArg> for VectorFormat {
    fn from(f: VectorFormatArg) -> Self {
        match f {
            VectorFormatArg::Text => VectorFormat::Text,
            VectorFormatArg::Binary => VectorFormat::Binary,
        }
    }
}

impl InferenceArgs {
    fn params(&self) -> Result<InferParams, Failure> {
        let ip = InferParams { alpha: self.infer_alpha, alpha_min: self.infer_min_alpha, epochs: self.infer_epochs };
        ip.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(ip)
    }
}

fn read_input(input: &InputArgs) -> Result<Vec<RawDocument>, Failure> {
    read_documents(&input.input, input.format.into()).map_err(with_path(&input.input))
}

fn load(path: &Path) -> Result<EmbeddingModel, Failure> {
    load_model(path).map_err(with_path(path))
}

/// Opens `path` for writing, or standard output when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(with_path(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn vocab(a: VocabArgs) -> Outcome {
    if a.min_count == 0 || !(a.sample > 0.0) {
        return Err(Failure::Usage("--min-count must be >= 1 and --sample > 0".into()));
    }
    let docs = read_input(&a.input)?;
    let vocab = Vocabulary::build(docs.iter().flat_map(|d| d.tokens.iter()), a.min_count, a.sample).map_err(data)?;
    let mut out = sink(a.output.as_deref())?;
    vocab.write_tsv(&mut out).and_then(|_| out.flush()).map_err(data)
}

fn hyperparams(a: &TrainArgs) -> Hyperparams {
    let defaults = Hyperparams::for_mode(a.mode.into());
    Hyperparams {
        vector_size: a.size.unwrap_or(defaults.vector_size),
        window: a.window.unwrap_or(defaults.window),
        min_count: a.min_count.unwrap_or(defaults.min_count),
        subsample_t: a.sample.unwrap_or(defaults.subsample_t),
        negative: a.negative.unwrap_or(defaults.negative),
        epochs: a.epochs.unwrap_or(defaults.epochs),
        alpha: a.alpha.unwrap_or(defaults.alpha),
        alpha_min: a.min_alpha.unwrap_or(defaults.alpha_min),
        dbow_train_words: a.dbow_words,
        seed: a.seed,
        workers: a.workers,
        ..defaults
    }
}

pub fn train(a: TrainArgs) -> Outcome {
    let params = hyperparams(&a);
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if a.dbow_words && params.mode != Mode::Dbow {
        return Err(Failure::Usage("--dbow-words only applies to --mode dbow".into()));
    }
    let pretrained = match &a.pretrained {
        Some(p) => Some(load_word_vectors(p, a.pretrained_format.into()).map_err(with_path(p))?),
        None => None,
    };
    let docs = read_input(&a.input)?;
    let corpus = Corpus::from_raw(&docs, params.min_count, params.subsample_t).map_err(data)?;
    let empty = corpus.empty_documents().len();
    if empty > 0 && !a.quiet {
        eprintln!("warning: {empty} document(s) have no in-vocabulary tokens and are not trained");
    }
    let outcome = Trainer::new(params).verbose(!a.quiet).fit(&corpus, pretrained.as_ref()).map_err(data)?;
    save_model(&outcome.model, &a.output).map_err(with_path(&a.output))
}

pub fn infer(a: InferArgs) -> Outcome {
    let ip = a.inference.params()?;
    let model = load(&a.model)?;
    if !model.mode().has_doc_vectors() {
        return Err(Failure::Data(format!("{}: {} models have no document vectors", a.model.display(), model.mode())));
    }
    let docs = read_input(&a.input)?;
    let mut out = sink(None)?;
    for (i, doc) in docs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(a.inference.seed);
        rng.set_stream(i as u64);
        match infer_document(&model, &doc.tokens, &ip, &mut rng) {
            Ok(v) => {
                write!(out, "{}", doc.tag).map_err(data)?;
                for x in &v.values {
                    write!(out, " {x}").map_err(data)?;
                }
                writeln!(out).map_err(data)?;
            }
            Err(e) => eprintln!("warning: skipping {:?}: {e}", doc.tag),
        }
    }
    out.flush().map_err(data)
}

fn report(r: &EvalReport, scores: Option<&Path>) -> Outcome {
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = scores {
        let mut f = sink(Some(path))?;
        r.write_scores(&mut f).and_then(|_| f.flush()).map_err(with_path(path))?;
    }
    println!("{}", r.tsv_line());
    Ok(())
}

/// Runs `task` with the scorer selected by `s`, loading a model if needed.
fn with_scorer<F>(s: &ScorerArgs, task: F) -> Outcome
where
    F: FnOnce(&dyn PairScorer) -> Outcome,
{
    let ip = s.inference.params()?;
    if s.scorer == ScorerArg::Ngram {
        return task(&NgramScorer::default());
    }
    let path = s.model.as_deref().ok_or_else(|| Failure::Usage("this scorer needs --model".into()))?;
    let model = load(path)?;
    match s.scorer {
        ScorerArg::Doc2vec => {
            if !model.mode().has_doc_vectors() {
                return Err(Failure::Usage("the doc2vec scorer needs a dbow or dmpv model".into()));
            }
            task(&Doc2VecScorer::with_inference(&model, ip, s.inference.seed))
        }
        _ => task(&AverageScorer { model: &model }),
    }
}

pub fn eval_qdup(a: QdupArgs) -> Outcome {
    let docs = read_input(&a.corpus)?;
    let pairs = read_qdup_pairs(&a.pairs).map_err(with_path(&a.pairs))?;
    with_scorer(&a.scorer, |scorer| {
        let r = run_qdup(scorer, &docs, &pairs).map_err(data)?;
        report(&r, a.scorer.scores.as_deref())
    })
}

pub fn eval_sts(a: StsArgs) -> Outcome {
    let records = read_sts(&a.input).map_err(with_path(&a.input))?;
    with_scorer(&a.scorer, |scorer| {
        let r = run_sts(scorer, &records).map_err(data)?;
        report(&r, a.scorer.scores.as_deref())
    })
}

pub fn nn(a: NnArgs) -> Outcome {
    let model = load(&a.model)?;
    let query = model
        .word_vector(&a.word)
        .ok_or_else(|| Failure::Data(format!("{:?} is not in the vocabulary", a.word)))?;
    let mut hits: Vec<(&str, f64)> = model
        .vocabulary()
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.surface != a.word)
        .filter_map(|(i, e)| cosine(query, model.w_in().row(i)).ok().map(|c| (e.surface.as_str(), c)))
        .collect();
    // Stable sort keeps vocabulary order among equal scores.
    hits.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut out = sink(None)?;
    for (token, c) in hits.into_iter().take(a.top) {
        writeln!(out, "{token}\t{c:.6}").map_err(data)?;
    }
    out.flush().map_err(data)
}

pub fn export(a: ExportArgs) -> Outcome {
    let model = load(&a.model)?;
    let (tokens, vectors) = match a.vectors {
        WhichArg::Words => {
            let wv = WordVectors::from_model(&model);
            (wv.tokens, wv.vectors)
        }
        WhichArg::Docs => {
            if model.doc_tags().is_empty() {
                return Err(Failure::Data(format!("{} model has no document vectors", model.mode())));
            }
            (model.doc_tags().to_vec(), model.docs().clone())
        }
    };
    let mut out = sink(Some(&a.output))?;
    write_word_vectors(&mut out, &tokens, &vectors, a.vector_format.into()).map_err(with_path(&a.output))
}

pub fn synth(a: SynthArgs) -> Outcome {
    if a.topics == 0 || a.docs_per_topic == 0 || a.doc_len == 0 || a.vocab_per_topic == 0 {
        return Err(Failure::Usage("topic, document and vocabulary counts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a.dup_fraction) {
        return Err(Failure::Usage("--dup-fraction must be in [0, 1]".into()));
    }
    let cfg = SynthConfig {
        n_topics: a.topics,
        docs_per_topic: a.docs_per_topic,
        doc_len: a.doc_len,
        vocab_per_topic: a.vocab_per_topic,
        n_function_words: a.function_words,
        dup_fraction: a.dup_fraction,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let data = make_synthetic(&cfg);
    let dir = &a.output_dir;
    fs::create_dir_all(dir).map_err(with_path(dir))?;

    let path = dir.join("corpus.tsv");
    let mut f = sink(Some(&path))?;
    for doc in &data.documents {
        writeln!(f, "{}\t{}", doc.tag, doc.tokens.join(" ")).map_err(with_path(&path))?;
    }
    f.flush().map_err(with_path(&path))?;

    let path = dir.join("qdup.tsv");
    let mut f = sink(Some(&path))?;
    write_qdup_pairs(&mut f, &data.qdup).and_then(|_| f.flush()).map_err(with_path(&path))?;

    let path = dir.join("sts.tsv");
    let mut f = sink(Some(&path))?;
    write_sts(&mut f, &data.sts).and_then(|_| f.flush()).map_err(with_path(&path))
}
