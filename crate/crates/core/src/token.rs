//! Simulated ASR output: one word per [`TokenEvent`].

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenError {
    #[error("token is empty after trimming")]
    EmptyToken,
    #[error("token `{0}` contains internal whitespace")]
    InternalWhitespace(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: expected index {expected}, found {found}")]
    OutOfOrder {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: arrival time {t_ms} precedes previous token at {prev_ms}")]
    TimeRegression { line: usize, t_ms: u64, prev_ms: u64 },
    #[error("read failed: {0}")]
    Io(String),
}

/// Trims surrounding whitespace and rejects empty or multi-word tokens.
pub fn normalize_token(raw: &str) -> Result<String, TokenError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(TokenError::EmptyToken);
    }
    if trimmed.chars().any(char::is_whitespace) {
        return Err(TokenError::InternalWhitespace(trimmed.to_string()));
    }
    Ok(trimmed.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenEvent {
    pub session_id: String,
    pub index: usize,
    pub surface: String,
    pub t_ms: u64,
}

impl TokenEvent {
    pub fn new(session_id: impl Into<String>, index: usize, surface: impl Into<String>, t_ms: u64) -> Self {
        TokenEvent {
            session_id: session_id.into(),
            index,
            surface: surface.into(),
            t_ms,
        }
    }
}

/// Builds a session stream from bare surfaces with a fixed inter-token gap.
pub fn stream_from_surfaces<S: AsRef<str>>(session_id: &str, surfaces: &[S], gap_ms: u64) -> Vec<TokenEvent> {
    surfaces
        .iter()
        .enumerate()
        .map(|(i, s)| TokenEvent::new(session_id, i, s.as_ref(), i as u64 * gap_ms))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    index: usize,
    surface: String,
    t_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    /// One `{"index","surface","t_ms"}` object per line.
    JsonLines,
    /// One token per line; `t_ms = index * gap_ms`.
    PlainText { gap_ms: u64 },
}

/// Incremental line decoder, usable for live input as well as whole files.
#[derive(Debug)]
pub struct TokenLineDecoder {
    session_id: String,
    format: StreamFormat,
    next_index: usize,
    last_ms: u64,
    line: usize,
}

impl TokenLineDecoder {
    pub fn new(session_id: impl Into<String>, format: StreamFormat) -> Self {
        TokenLineDecoder {
            session_id: session_id.into(),
            format,
            next_index: 0,
            last_ms: 0,
            line: 0,
        }
    }

    /// Returns `Ok(None)` for blank lines.
    pub fn decode_line(&mut self, raw: &str) -> Result<Option<TokenEvent>, TokenError> {
        self.line += 1;
        let line = self.line;
        if raw.trim().is_empty() {
            return Ok(None);
        }
        let (index, surface, t_ms) = match self.format {
            StreamFormat::JsonLines => {
                let rec: TokenRecord = serde_json::from_str(raw).map_err(|e| TokenError::Malformed {
                    line,
                    reason: e.to_string(),
                })?;
                (rec.index, rec.surface, rec.t_ms)
            }
            StreamFormat::PlainText { gap_ms } => {
                (self.next_index, raw.to_string(), self.next_index as u64 * gap_ms)
            }
        };
        if index != self.next_index {
            return Err(TokenError::OutOfOrder {
                line,
                expected: self.next_index,
                found: index,
            });
        }
        if index > 0 && t_ms < self.last_ms {
            return Err(TokenError::TimeRegression {
                line,
                t_ms,
                prev_ms: self.last_ms,
            });
        }
        let surface = normalize_token(&surface).map_err(|e| TokenError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        self.next_index += 1;
        self.last_ms = t_ms;
        Ok(Some(TokenEvent::new(self.session_id.clone(), index, surface, t_ms)))
    }
}

/// Picks JSON lines when the first non-blank line opens an object.
pub fn detect_format(text: &str, gap_ms: u64) -> StreamFormat {
    match text.lines().find(|l| !l.trim().is_empty()) {
        Some(l) if l.trim_start().starts_with('{') => StreamFormat::JsonLines,
        _ => StreamFormat::PlainText { gap_ms },
    }
}

pub fn read_token_stream<R: BufRead>(
    reader: R,
    session_id: &str,
    format: StreamFormat,
) -> Result<Vec<TokenEvent>, TokenError> {
    let mut decoder = TokenLineDecoder::new(session_id, format);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| TokenError::Io(e.to_string()))?;
        if let Some(tok) = decoder.decode_line(&line)? {
            out.push(tok);
        }
    }
    Ok(out)
}

/// JSON-lines encoding of a token stream (session id omitted).
pub fn encode_token_line(tok: &TokenEvent) -> String {
    serde_json::json!({ "index": tok.index, "surface": tok.surface, "t_ms": tok.t_ms }).to_string()
}
