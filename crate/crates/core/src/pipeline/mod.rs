//! Session orchestration: two online segmenters over one token stream,
//! chunk captions as chunks close, and a sentence retranslation that
//! replaces them.
//!
//! Events are produced in a fixed logical order (a sentence's chunk
//! captions by index, then its terminal event, then the next sentence).
//! Under the simulated clock a chunk or sentence closes at the arrival time
//! of the token that triggered the decision (the last token on flush) and
//! completes one broker round later; `emit_ms` is the completion time,
//! raised where needed so it never decreases along the log.

mod latency;
mod session;
mod simulate;

use thiserror::Error;

use crate::segmenter::SegmenterError;

pub use latency::{latency_report, LatencyReport, SentenceLatency};
pub use session::{
    ChunkRecord, ChunkStatus, ClockMode, Mode, Session, SessionConfig, FALLBACK_ENGINE, PASSTHROUGH_ENGINE,
};
pub use simulate::{logical_view, paired_latency, run_session, simulate_batch, LogicalEvent, SessionOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("expected token index {expected}, got {found}")]
    OutOfOrderToken { expected: usize, found: usize },
    #[error("token {index} arrives earlier than its predecessor")]
    TimeRegression { index: usize },
    #[error("session already flushed")]
    SessionClosed,
    #[error("sentence {0} is not open or has no chunks")]
    UnknownSentence(usize),
    #[error("incomplete caption log: {0}")]
    IncompleteLog(String),
    #[error(transparent)]
    Segmenter(SegmenterError),
}

impl From<SegmenterError> for PipelineError {
    fn from(e: SegmenterError) -> Self {
        match e {
            SegmenterError::OutOfOrderToken { expected, found } => PipelineError::OutOfOrderToken { expected, found },
            SegmenterError::StreamClosed => PipelineError::SessionClosed,
            other => PipelineError::Segmenter(other),
        }
    }
}
