use serde::Serialize;

use super::EvalError;
use crate::segment::{Segment, SegmentKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthStats {
    pub mean_utterance_len: f64,
    pub mean_sentence_seg_len: f64,
    pub mean_chunk_seg_len: f64,
    pub reduction: f64,
}

/// `(sentence - chunk) / sentence`, clamped to [0, 1]; 0 when either mean is 0.
pub fn reduction(mean_sentence: f64, mean_chunk: f64) -> f64 {
    if mean_sentence <= 0.0 || mean_chunk <= 0.0 {
        return 0.0;
    }
    ((mean_sentence - mean_chunk) / mean_sentence).clamp(0.0, 1.0)
}

impl LengthStats {
    pub fn from_means(utterance: f64, sentence: f64, chunk: f64) -> Self {
        LengthStats {
            mean_utterance_len: utterance,
            mean_sentence_seg_len: sentence,
            mean_chunk_seg_len: chunk,
            reduction: reduction(sentence, chunk),
        }
    }

    /// Reduction as a whole percentage, e.g. "39%".
    pub fn reduction_percent(&self) -> String {
        format!("{:.0}%", self.reduction * 100.0)
    }
}

fn mean_len<I: IntoIterator<Item = usize>>(xs: I) -> Result<f64, EvalError> {
    let (mut sum, mut n) = (0usize, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(sum as f64 / n as f64)
}

pub fn length_stats<S: AsRef<str>>(
    utterances: &[Vec<S>],
    sentence_segs: &[Vec<Segment>],
    chunk_segs: &[Vec<Segment>],
) -> Result<LengthStats, EvalError> {
    let u = mean_len(utterances.iter().map(Vec::len))?;
    let s = mean_len(sentence_segs.iter().flatten().map(Segment::len))?;
    let c = mean_len(chunk_segs.iter().flatten().map(Segment::len))?;
    Ok(LengthStats::from_means(u, s, c))
}

/// Consecutive segments of `len` tokens; the last one holds the remainder.
pub fn fixed_length_segment<S: AsRef<str>>(tokens: &[S], len: usize) -> Result<Vec<Segment>, EvalError> {
    if len == 0 {
        return Err(EvalError::InvalidLength);
    }
    Ok(tokens
        .chunks(len)
        .enumerate()
        .map(|(i, c)| {
            Segment::new(
                SegmentKind::Chunk,
                i * len,
                c.iter().map(|t| t.as_ref().to_string()).collect(),
            )
        })
        .collect())
}
