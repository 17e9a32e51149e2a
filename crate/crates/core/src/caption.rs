//! Append/replace caption records and their line encoding.
//!
//! A session's caption log is one JSON object per line with a fixed key
//! order (`seq, kind, sentence_id, chunk_index, engine, replaces, emit_ms,
//! text`), so logs from identical runs are byte-identical and diff cleanly.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptionKind {
    ChunkCaption,
    SentenceFinal,
    FallbackFinal,
}

impl CaptionKind {
    pub fn is_terminal(self) -> bool {
        !matches!(self, CaptionKind::ChunkCaption)
    }
}

/// `(sentence_id, chunk_index)` of a chunk caption.
pub type ChunkRef = (usize, usize);

// Field order here is the wire order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptionEvent {
    pub seq: u64,
    pub kind: CaptionKind,
    pub sentence_id: usize,
    pub chunk_index: Option<usize>,
    pub engine: String,
    pub replaces: Vec<ChunkRef>,
    pub emit_ms: u64,
    pub text: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaptionError {
    #[error("malformed caption line: {0}")]
    Malformed(String),
    #[error("invalid caption event: {0}")]
    Invalid(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CaptionError>,
    },
    #[error("caption log violates protocol at seq {seq}: {reason}")]
    Protocol { seq: u64, reason: String },
    #[error("read failed: {0}")]
    Io(String),
}

impl CaptionEvent {
    pub fn validate(&self) -> Result<(), CaptionError> {
        match self.kind {
            CaptionKind::ChunkCaption => {
                if self.chunk_index.is_none() {
                    return Err(CaptionError::Invalid("chunk_caption without chunk_index".into()));
                }
                if !self.replaces.is_empty() {
                    return Err(CaptionError::Invalid("chunk_caption cannot replace captions".into()));
                }
            }
            CaptionKind::SentenceFinal | CaptionKind::FallbackFinal => {
                if self.chunk_index.is_some() {
                    return Err(CaptionError::Invalid("terminal event carries a chunk_index".into()));
                }
                if self.replaces.iter().any(|&(s, _)| s != self.sentence_id) {
                    return Err(CaptionError::Invalid("replaces refers to another sentence".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn encode_event(e: &CaptionEvent) -> String {
    serde_json::to_string(e).expect("caption events always serialize")
}

pub fn decode_event(line: &str) -> Result<CaptionEvent, CaptionError> {
    let e: CaptionEvent =
        serde_json::from_str(line).map_err(|err| CaptionError::Malformed(err.to_string()))?;
    e.validate()?;
    Ok(e)
}

pub fn read_caption_log<R: BufRead>(reader: R) -> Result<Vec<CaptionEvent>, CaptionError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CaptionError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let e = decode_event(&line).map_err(|source| CaptionError::AtLine {
            line: i + 1,
            source: Box::new(source),
        })?;
        out.push(e);
    }
    Ok(out)
}

/// Checks the session-level ordering rules: gap-free increasing `seq`,
/// chunk captions in index order, one terminal per sentence that replaces
/// exactly the sentence's chunk captions, nothing after a terminal.
pub fn check_protocol(log: &[CaptionEvent]) -> Result<(), CaptionError> {
    let mut chunks: BTreeMap<usize, Vec<ChunkRef>> = BTreeMap::new();
    let mut closed: BTreeSet<usize> = BTreeSet::new();
    for (i, e) in log.iter().enumerate() {
        let fail = |reason: String| CaptionError::Protocol { seq: e.seq, reason };
        e.validate().map_err(|err| fail(err.to_string()))?;
        let expected_seq = log[0].seq + i as u64;
        if e.seq != expected_seq {
            return Err(fail(format!("expected seq {expected_seq}")));
        }
        if closed.contains(&e.sentence_id) {
            return Err(fail(format!("event after terminal of sentence {}", e.sentence_id)));
        }
        let seen = chunks.entry(e.sentence_id).or_default();
        match e.kind {
            CaptionKind::ChunkCaption => {
                let idx = e.chunk_index.unwrap_or_default();
                if idx != seen.len() {
                    return Err(fail(format!("chunk index {idx}, expected {}", seen.len())));
                }
                seen.push((e.sentence_id, idx));
            }
            _ => {
                if e.replaces != *seen {
                    return Err(fail(format!(
                        "replaces {:?} but sentence emitted {:?}",
                        e.replaces, seen
                    )));
                }
                closed.insert(e.sentence_id);
            }
        }
    }
    Ok(())
}
