//! Corpus formats and tooling: slash-chunked interpretation pairs, dialog
//! blocks, boundary labels for segmenter training, a seeded synthetic
//! generator and train/dev/test splitting.

mod chunk;
mod dialog;
mod labels;
mod split;
mod synthetic;

use thiserror::Error;

pub use chunk::{parse_chunk_corpus, read_chunk_corpus, serialize_chunk_corpus, ChunkAlignedPair};
pub use dialog::{parse_dialog_corpus, read_dialog_corpus, DialogTurn, Speaker};
pub use labels::{concat_streams, derive_labels, LabeledStream};
pub use split::{split, Split};
pub use synthetic::{
    generate_parallel, generate_synthetic, BoundaryPolicy, GeneratorSpec, LengthDist, SyntheticParallel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("line {0}: malformed record: {1}")]
    MalformedRecord(usize, String),
    #[error("line {line}: {src} source chunks but {tgt} target chunks")]
    ChunkCountMismatch { line: usize, src: usize, tgt: usize },
    #[error("corpus file contains no records")]
    EmptyFile,
    #[error("line {0}: unknown speaker code `{1}`")]
    UnknownSpeaker(usize, String),
    #[error("line {0}: unknown domain `{1}`")]
    UnknownDomain(usize, String),
    #[error("empty chunk in record {0}")]
    EmptyChunk(usize),
    #[error("no corpus records given")]
    EmptyInput,
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid labeled stream: {0}")]
    InvalidStream(String),
    #[error("{0}")]
    Io(String),
}
