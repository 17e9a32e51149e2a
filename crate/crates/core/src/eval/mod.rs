//! Measurement suite: BLEU, segment lengths, boundary F1 and engine
//! comparison reports.

mod bleu;
mod compare;
mod f1;
mod lengths;

use thiserror::Error;

pub use bleu::{bleu, bleu_tokens, brevity_penalty, modified_precision, BleuConfig, NgramCounts, Smoothing};
pub use compare::{
    compare_engines, delta_points, CompareConfig, CompareInputs, CompareReport, CompareRow, Delta, EngineChoice,
    Segmentation, TSV_HEADER,
};
pub use f1::{boundary_counts, boundary_f1, BoundaryCounts, BoundaryScores};
pub use lengths::{fixed_length_segment, length_stats, reduction, LengthStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("no input")]
    EmptyInput,
    #[error("segment length must be >= 1")]
    InvalidLength,
    #[error("invalid eval config: {0}")]
    InvalidConfig(String),
    #[error("no decision for position {0}")]
    IncompleteDecisions(usize),
    #[error("{0}")]
    InvalidInput(String),
}
