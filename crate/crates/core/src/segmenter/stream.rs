use std::collections::VecDeque;
use std::sync::Arc;

use super::{extract_features, BoundaryDecision, SegmenterError, SegmenterModel};
use crate::segment::{Segment, SegmentKind};
use crate::token::TokenEvent;

#[derive(Debug, Clone)]
struct Pending {
    position: usize,
    verdict: Option<BoundaryDecision>,
}

/// Incremental decoder for one token stream.
///
/// Decisions are released in position order. A position that commits early
/// is held back until every earlier position has its verdict; its
/// `decided_at` still records the token at which it was committed.
#[derive(Debug, Clone)]
pub struct StreamingSegmenter {
    model: Arc<SegmenterModel>,
    /// Tokens from index `base` onward.
    buf: VecDeque<String>,
    base: usize,
    next_index: usize,
    pending: VecDeque<Pending>,
    flushed: bool,
}

impl StreamingSegmenter {
    pub fn new(model: Arc<SegmenterModel>) -> Self {
        StreamingSegmenter {
            model,
            buf: VecDeque::new(),
            base: 0,
            next_index: 0,
            pending: VecDeque::new(),
            flushed: false,
        }
    }

    pub fn model(&self) -> &SegmenterModel {
        &self.model
    }

    pub fn next_index(&self) -> usize {
        self.next_index
    }

    pub fn feed(&mut self, tok: &TokenEvent) -> Result<Vec<BoundaryDecision>, SegmenterError> {
        self.feed_surface(tok.index, &tok.surface)
    }

    pub fn feed_batch(&mut self, toks: &[TokenEvent]) -> Result<Vec<BoundaryDecision>, SegmenterError> {
        let mut out = Vec::new();
        for t in toks {
            out.extend(self.feed(t)?);
        }
        Ok(out)
    }

    pub fn feed_surface(&mut self, index: usize, surface: &str) -> Result<Vec<BoundaryDecision>, SegmenterError> {
        if self.flushed {
            return Err(SegmenterError::StreamClosed);
        }
        if index != self.next_index {
            return Err(SegmenterError::OutOfOrderToken {
                expected: self.next_index,
                found: index,
            });
        }
        self.buf.push_back(surface.to_string());
        self.next_index += 1;
        self.pending.push_back(Pending {
            position: index,
            verdict: None,
        });

        let cfg = self.model.config;
        let head = index;
        let view: Vec<&str> = self.buf.iter().map(String::as_str).collect();
        for p in self.pending.iter_mut().filter(|p| p.verdict.is_none()) {
            let shift = head - p.position;
            let score = score_at(&self.model, &view, self.base, p.position, shift);
            if score > cfg.threshold {
                p.verdict = Some(BoundaryDecision {
                    position: p.position,
                    boundary: true,
                    decided_at: head,
                    score,
                });
            } else if shift >= cfg.max_delay {
                p.verdict = Some(BoundaryDecision {
                    position: p.position,
                    boundary: false,
                    decided_at: head,
                    score,
                });
            }
        }
        let out = self.release();
        self.trim();
        Ok(out)
    }

    /// Decides every pending position with the context seen so far. The last
    /// consumed position is forced to a boundary when it is still pending.
    pub fn flush(&mut self) -> Vec<BoundaryDecision> {
        if self.flushed {
            return Vec::new();
        }
        self.flushed = true;
        if self.next_index == 0 {
            return Vec::new();
        }
        let head = self.next_index - 1;
        let view: Vec<&str> = self.buf.iter().map(String::as_str).collect();
        let threshold = self.model.config.threshold;
        for p in self.pending.iter_mut().filter(|p| p.verdict.is_none()) {
            let score = score_at(&self.model, &view, self.base, p.position, head - p.position);
            p.verdict = Some(BoundaryDecision {
                position: p.position,
                boundary: p.position == head || score > threshold,
                decided_at: head,
                score,
            });
        }
        self.release()
    }

    fn release(&mut self) -> Vec<BoundaryDecision> {
        let mut out = Vec::new();
        while let Some(d) = self.pending.front().and_then(|p| p.verdict) {
            out.push(d);
            self.pending.pop_front();
        }
        out
    }

    fn trim(&mut self) {
        let oldest = self.pending.front().map_or(self.next_index, |p| p.position);
        let keep_from = oldest.saturating_sub(self.model.config.feature_window);
        while self.base < keep_from {
            self.buf.pop_front();
            self.base += 1;
        }
    }
}

fn score_at(model: &SegmenterModel, view: &[&str], base: usize, position: usize, shift: usize) -> f64 {
    let window = model.config.feature_window;
    let rel = position - base;
    // trimming keeps the full left window, so padding only appears at the true stream start
    debug_assert!(base == 0 || rel >= window);
    model.score(shift, &extract_features(view, rel, shift, window))
}

/// Turns a complete decision list into segments. Every "yes" ends a segment;
/// tokens after the last "yes" (possible only when the final position was
/// decided "no" with zero delay) form a closing segment.
pub fn decisions_to_segments<S: AsRef<str>>(
    decisions: &[BoundaryDecision],
    tokens: &[S],
    kind: SegmentKind,
) -> Result<Vec<Segment>, SegmenterError> {
    let mut verdict: Vec<Option<bool>> = vec![None; tokens.len()];
    for d in decisions {
        if d.position < tokens.len() {
            verdict[d.position] = Some(d.boundary);
        }
    }
    let mut out = Vec::new();
    let mut start = 0;
    for (i, v) in verdict.iter().enumerate() {
        match v {
            None => return Err(SegmenterError::IncompleteDecisions(i)),
            Some(true) => {
                out.push(segment(kind, tokens, start, i));
                start = i + 1;
            }
            Some(false) => {}
        }
    }
    if start < tokens.len() {
        out.push(segment(kind, tokens, start, tokens.len() - 1));
    }
    Ok(out)
}

fn segment<S: AsRef<str>>(kind: SegmentKind, tokens: &[S], start: usize, end: usize) -> Segment {
    Segment::new(
        kind,
        start,
        tokens[start..=end].iter().map(|t| t.as_ref().to_string()).collect(),
    )
}

/// Runs a whole token list through a fresh streaming segmenter.
pub fn segment_tokens<S: AsRef<str>>(
    model: &Arc<SegmenterModel>,
    tokens: &[S],
) -> (Vec<BoundaryDecision>, Vec<Segment>) {
    let mut seg = StreamingSegmenter::new(Arc::clone(model));
    let mut decisions = Vec::with_capacity(tokens.len());
    for (i, t) in tokens.iter().enumerate() {
        decisions.extend(seg.feed_surface(i, t.as_ref()).expect("indices are consecutive"));
    }
    decisions.extend(seg.flush());
    let segments = decisions_to_segments(&decisions, tokens, model.config.level).expect("flush decides every position");
    (decisions, segments)
}
