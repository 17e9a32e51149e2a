//! Online multi-shift boundary detection.
//!
//! A segmenter reads one token at a time. The verdict for position `p` may
//! be postponed until up to `max_delay` later tokens have been seen: at every
//! new token each undecided position is re-scored with the extra right
//! context, committing "yes" as soon as the score clears the threshold and
//! "no" once the delay budget is spent. Chunk-level and sentence-level
//! segmenters are separate models with the same machinery.

mod features;
mod model;
mod stream;
mod train;
mod tune;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::SegmentKind;

pub use features::extract_features;
pub use model::{SegmenterModel, MODEL_VERSION};
pub use stream::{decisions_to_segments, segment_tokens, StreamingSegmenter};
pub use train::{train, train_with, TrainOptions};
pub use tune::{evaluate, tune_n, TuneReport, TuneRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmenterError {
    #[error("expected token index {expected}, got {found}")]
    OutOfOrderToken { expected: usize, found: usize },
    #[error("stream already flushed")]
    StreamClosed,
    #[error("no decision for position {0}")]
    IncompleteDecisions(usize),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("no candidate delays given")]
    EmptyCandidates,
    #[error("invalid segmenter config: {0}")]
    InvalidConfig(String),
    #[error("model format `{found}` is not supported (expected `{expected}`)")]
    VersionMismatch { expected: String, found: String },
    #[error("model file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmenterConfig {
    pub level: SegmentKind,
    /// Largest number of following tokens a verdict may wait for.
    pub max_delay: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_window")]
    pub feature_window: usize,
}

fn default_threshold() -> f64 {
    0.5
}

fn default_window() -> usize {
    4
}

impl SegmenterConfig {
    pub fn new(level: SegmentKind, max_delay: usize) -> Self {
        SegmenterConfig {
            level,
            max_delay,
            threshold: default_threshold(),
            feature_window: default_window(),
        }
    }

    pub fn validate(&self) -> Result<(), SegmenterError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(SegmenterError::InvalidConfig(format!(
                "threshold {} outside [0,1]",
                self.threshold
            )));
        }
        if self.feature_window == 0 {
            return Err(SegmenterError::InvalidConfig("feature_window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDecision {
    pub position: usize,
    pub boundary: bool,
    pub decided_at: usize,
    pub score: f64,
}

impl BoundaryDecision {
    pub fn delay(&self) -> usize {
        self.decided_at - self.position
    }
}
