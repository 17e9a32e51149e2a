//! Command-line driver: configuration, argument parsing and the subcommands.

pub mod commands;
pub mod config;
pub mod io;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use simulpipe::pipeline::Mode;
use simulpipe::SegmentKind;

use crate::config::{ClockKind, InputFormat};

/// An invocation the user has to fix; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "simulpipe", version, about = "Simultaneous interpretation pipeline: segment, translate, caption")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true, env = "SIMULPIPE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice (overrides `seed`).
    #[arg(long, global = true, env = "SIMULPIPE_SEED")]
    pub seed: Option<u64>,
    /// Run batch work on one thread.
    #[arg(long, global = true, env = "SIMULPIPE_SEQUENTIAL")]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream tokens through the pipeline and write the caption log.
    Run(RunArgs),
    /// Train a boundary model from a chunk-aligned corpus.
    Train(TrainArgs),
    /// Pick the lookahead N with the best development F1.
    #[command(name = "tune-n")]
    TuneN(TuneArgs),
    /// Write a seeded synthetic parallel corpus.
    #[command(name = "gen-corpus")]
    GenCorpus(GenArgs),
    /// Evaluation reports.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Paired chunked vs sentence-only latency over synthetic streams.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Chunk,
    Sentence,
}

impl From<Level> for SegmentKind {
    fn from(l: Level) -> SegmentKind {
        match l {
            Level::Chunk => SegmentKind::Chunk,
            Level::Sentence => SegmentKind::Sentence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Chunked,
    SentenceOnly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Chunked => Mode::Chunked,
            ModeArg::SentenceOnly => Mode::SentenceOnly,
        }
    }
}

/// Model and session overrides shared by the pipeline commands.
#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long, env = "SIMULPIPE_CHUNK_MODEL")]
    pub chunk_model: Option<PathBuf>,
    #[arg(long, env = "SIMULPIPE_SENTENCE_MODEL")]
    pub sentence_model: Option<PathBuf>,
    #[arg(long, value_enum, env = "SIMULPIPE_MODE")]
    pub mode: Option<ModeArg>,
    #[arg(long, env = "SIMULPIPE_SRC")]
    pub src: Option<String>,
    #[arg(long, env = "SIMULPIPE_TGT")]
    pub tgt: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Token stream (`-` for stdin).
    #[arg(long, short, default_value = "-")]
    pub input: String,
    /// Caption log (`-` for stdout).
    #[arg(long, short, default_value = "-")]
    pub output: String,
    /// Also write the chunk and sentence segments as JSON lines.
    #[arg(long)]
    pub segments: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, value_enum, env = "SIMULPIPE_CLOCK")]
    pub clock: Option<ClockKind>,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Chunk-aligned TSV corpus.
    #[arg(long, env = "SIMULPIPE_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Development corpus; without it one is split off `--corpus`.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Utterances concatenated into one stream.
    #[arg(long)]
    pub concat: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "chunk")]
    pub level: Level,
    /// Model file to write; defaults to the configured model path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub max_delay: Option<usize>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, value_enum, default_value = "chunk")]
    pub level: Level,
    /// Comma-separated lookahead values.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Option<Vec<usize>>,
    /// Per-N report (`-` for stdout).
    #[arg(long, default_value = "-")]
    pub report: String,
    /// Write the selected model here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Chunk-aligned TSV (`-` for stdout).
    #[arg(long, short, default_value = "-")]
    pub out: String,
    /// Phrase table that translates the corpus.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// The source side as one JSON-lines token stream.
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    #[arg(long)]
    pub streams: Option<usize>,
    #[arg(long, env = "SIMULPIPE_SRC")]
    pub src: Option<String>,
    #[arg(long, env = "SIMULPIPE_TGT")]
    pub tgt: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Corpus BLEU of a candidate file against a reference file.
    Bleu(BleuArgs),
    /// Mean utterance, sentence-segment and chunk-segment lengths.
    Lengths(LengthsArgs),
    /// BLEU of every configured segmentation/engine combination.
    Compare(CompareArgs),
    /// Per-sentence response times of a caption log.
    Latency(LatencyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothingArg {
    None,
    AddOne,
}

#[derive(Debug, Args)]
pub struct BleuArgs {
    /// One candidate per line.
    #[arg(long)]
    pub candidates: String,
    /// One reference per line.
    #[arg(long)]
    pub references: String,
    /// Tokenization language; defaults to the session target.
    #[arg(long)]
    pub lang: Option<String>,
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long, value_enum)]
    pub smoothing: Option<SmoothingArg>,
}

#[derive(Debug, Args)]
pub struct LengthsArgs {
    /// Segment files written by `run --segments`, one per utterance stream.
    #[arg(long, required = true, num_args = 1..)]
    pub segments: Vec<PathBuf>,
    /// Take utterance lengths from this corpus instead of the runs.
    #[arg(long)]
    pub utterances: Option<PathBuf>,
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Tsv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Chunk-aligned test corpus.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub concat: Option<usize>,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: ReportFormat,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[arg(long, env = "SIMULPIPE_CHUNK_MODEL")]
    pub chunk_model: Option<PathBuf>,
    #[arg(long, env = "SIMULPIPE_SENTENCE_MODEL")]
    pub sentence_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LatencyArgs {
    /// Caption log.
    #[arg(long)]
    pub log: String,
    /// The token stream the log was produced from.
    #[arg(long)]
    pub input: PathBuf,
    /// Segment file written by `run --segments`.
    #[arg(long)]
    pub segments: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub streams: Option<usize>,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[command(flatten)]
    pub session: SessionArgs,
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    commands::dispatch(cli)
}
