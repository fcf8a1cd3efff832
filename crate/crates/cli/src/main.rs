use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::Failure;

#[derive(Parser)]
#[command(name = "vecforge", version, about = "Train, infer and evaluate word2vec and doc2vec embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count tokens and print the vocabulary as `token<TAB>count`
    Vocab(VocabArgs),
    /// Train a model and save it in the native format
    Train(TrainArgs),
    /// Infer vectors for documents against a frozen dbow or dmpv model
    Infer(InferArgs),
    /// Score a benchmark
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Print the nearest words to a query word
    Nn(NnArgs),
    /// Write word or document vectors in the word2vec interchange format
    Export(ExportArgs),
    /// Generate a synthetic topic corpus with duplicate and similarity pairs
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sg,
    Cbow,
    Dbow,
    Dmpv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusFormatArg {
    /// `tag<TAB>tokens` per line
    Tagged,
    /// One document per line, tagged by line number
    Plain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VectorFormatArg {
    Text,
    Binary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerArg {
    /// Cosine between document vectors
    Doc2vec,
    /// Cosine between averaged word vectors
    Average,
    /// Negated Jensen-Shannon divergence of n-gram profiles
    Ngram,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    Words,
    Docs,
}

#[derive(Args)]
pub struct InputArgs {
    /// Corpus file
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = CorpusFormatArg::Tagged)]
    pub format: CorpusFormatArg,
}

#[derive(Args)]
pub struct VocabArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "N", default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, value_name = "T", default_value_t = 1e-5)]
    pub sample: f64,
    /// Write here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Training settings. Unset values take the defaults for `--mode`.
#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model file to write
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Dbow)]
    pub mode: ModeArg,
    /// Vector dimension
    #[arg(long, value_name = "D")]
    pub size: Option<usize>,
    #[arg(long, value_name = "W")]
    pub window: Option<usize>,
    #[arg(long, value_name = "N")]
    pub min_count: Option<u64>,
    /// Sub-sampling threshold for frequent words
    #[arg(long, value_name = "T")]
    pub sample: Option<f64>,
    /// Noise words per prediction
    #[arg(long, value_name = "K")]
    pub negative: Option<usize>,
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,
    /// Learning rate at the first epoch
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Learning rate at the last epoch
    #[arg(long)]
    pub min_alpha: Option<f64>,
    /// dbow only: also learn word vectors with a skip-gram pass
    #[arg(long)]
    pub dbow_words: bool,
    /// Initialise input word vectors from this file
    #[arg(long, value_name = "FILE")]
    pub pretrained: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VectorFormatArg::Text)]
    pub pretrained_format: VectorFormatArg,
    /// Worker threads; only a single worker is reproducible
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Suppress per-epoch progress on standard error
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Clone, Copy)]
pub struct InferenceArgs {
    /// Inference learning rate at the first epoch
    #[arg(long, default_value_t = 0.01)]
    pub infer_alpha: f64,
    /// Inference learning rate at the last epoch
    #[arg(long, default_value_t = 0.0001)]
    pub infer_min_alpha: f64,
    #[arg(long, value_name = "E", default_value_t = 1000)]
    pub infer_epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args)]
pub struct InferArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub inference: InferenceArgs,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Duplicate-pair ranking scored by ROC AUC
    Qdup(QdupArgs),
    /// Graded sentence similarity scored by Pearson's r
    Sts(StsArgs),
}

#[derive(Args)]
pub struct ScorerArgs {
    #[arg(long, value_enum, default_value_t = ScorerArg::Doc2vec)]
    pub scorer: ScorerArg,
    /// Required by the doc2vec and average scorers
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Also write per-pair scores as TSV
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub inference: InferenceArgs,
}

#[derive(Args)]
pub struct QdupArgs {
    /// Documents referenced by the pairs file
    #[command(flatten)]
    pub corpus: InputArgs,
    /// `tag_a<TAB>tag_b<TAB>label` per line
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Args)]
pub struct StsArgs {
    /// `sentence_a<TAB>sentence_b<TAB>gold` per line
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Args)]
pub struct NnArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub top: usize,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = WhichArg::Words)]
    pub vectors: WhichArg,
    #[arg(long = "vector-format", value_enum, default_value_t = VectorFormatArg::Text)]
    pub vector_format: VectorFormatArg,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Directory for corpus.tsv, qdup.tsv and sts.tsv
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub topics: usize,
    #[arg(long, default_value_t = 200)]
    pub docs_per_topic: usize,
    #[arg(long, default_value_t = 40)]
    pub doc_len: usize,
    #[arg(long, default_value_t = 500)]
    pub vocab_per_topic: usize,
    #[arg(long, default_value_t = 50)]
    pub function_words: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dup_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Vocab(a) => commands::vocab(a),
        Command::Train(a) => commands::train(a),
        Command::Infer(a) => commands::infer(a),
        Command::Eval(EvalCommand::Qdup(a)) => commands::eval_qdup(a),
        Command::Eval(EvalCommand::Sts(a)) => commands::eval_sts(a),
        Command::Nn(a) => commands::nn(a),
        Command::Export(a) => commands::export(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
