use serde::Serialize;

use super::PipelineError;
use crate::caption::CaptionEvent;
use crate::segment::{tiles, Segment};
use crate::token::TokenEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SentenceLatency {
    pub sentence_id: usize,
    pub first_token_ms: u64,
    /// Earliest event of the sentence (a chunk caption, or the terminal
    /// event in sentence-only mode) minus the first token time.
    pub first_caption_ms: u64,
    pub final_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    pub sentences: Vec<SentenceLatency>,
    pub mean_first_caption_ms: f64,
    pub max_first_caption_ms: u64,
    pub mean_final_ms: f64,
    pub max_final_ms: u64,
}

impl LatencyReport {
    pub fn summary(&self) -> String {
        format!(
            "sentences={} first_caption_ms mean={:.1} max={} final_ms mean={:.1} max={}",
            self.sentences.len(),
            self.mean_first_caption_ms,
            self.max_first_caption_ms,
            self.mean_final_ms,
            self.max_final_ms
        )
    }
}

/// Per-sentence response times. `sentences` are the sentence segments the
/// session closed (they give each sentence's first token).
pub fn latency_report(
    log: &[CaptionEvent],
    tokens: &[TokenEvent],
    sentences: &[Segment],
) -> Result<LatencyReport, PipelineError> {
    if !tiles(sentences, tokens.len()) {
        return Err(PipelineError::IncompleteLog(format!(
            "sentence segments do not cover the {} input tokens",
            tokens.len()
        )));
    }
    let mut rows = Vec::with_capacity(sentences.len());
    for (id, s) in sentences.iter().enumerate() {
        let events: Vec<&CaptionEvent> = log.iter().filter(|e| e.sentence_id == id).collect();
        let Some(terminal) = events.iter().find(|e| e.kind.is_terminal()) else {
            return Err(PipelineError::IncompleteLog(format!("sentence {id} has no terminal event")));
        };
        let first = events.iter().map(|e| e.emit_ms).min().expect("terminal exists");
        let t0 = tokens[s.start].t_ms;
        rows.push(SentenceLatency {
            sentence_id: id,
            first_token_ms: t0,
            first_caption_ms: first.saturating_sub(t0),
            final_ms: terminal.emit_ms.saturating_sub(t0),
        });
    }
    if let Some(e) = log.iter().find(|e| e.sentence_id >= sentences.len()) {
        return Err(PipelineError::IncompleteLog(format!(
            "event {} refers to unknown sentence {}",
            e.seq, e.sentence_id
        )));
    }
    let mean = |f: fn(&SentenceLatency) -> u64| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<u64>() as f64 / rows.len() as f64
        }
    };
    Ok(LatencyReport {
        mean_first_caption_ms: mean(|r| r.first_caption_ms),
        max_first_caption_ms: rows.iter().map(|r| r.first_caption_ms).max().unwrap_or(0),
        mean_final_ms: mean(|r| r.final_ms),
        max_final_ms: rows.iter().map(|r| r.final_ms).max().unwrap_or(0),
        sentences: rows,
    })
}
