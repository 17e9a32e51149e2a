use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Chunk,
    Sentence,
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentKind::Chunk => "chunk",
            SegmentKind::Sentence => "sentence",
        })
    }
}

/// A contiguous, inclusive span of the token stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<String>,
}

impl Segment {
    /// `tokens` must hold exactly `end - start + 1` surfaces.
    pub fn new(kind: SegmentKind, start: usize, tokens: Vec<String>) -> Self {
        assert!(!tokens.is_empty(), "segment must cover at least one token");
        Segment {
            kind,
            start,
            end: start + tokens.len() - 1,
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// True when the segments cover `0..total` in order, without gaps or overlaps.
pub fn tiles(segments: &[Segment], total: usize) -> bool {
    let mut next = 0;
    for s in segments {
        if s.start != next || s.end < s.start || s.tokens.len() != s.len() {
            return false;
        }
        next = s.end + 1;
    }
    next == total
}
