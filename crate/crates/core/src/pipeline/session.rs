use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::caption::{CaptionEvent, CaptionKind, ChunkRef};
use crate::context::{build_request_context, ContextTags, HistoryBuffer, DEFAULT_HISTORY_WINDOW};
use crate::engines::{select_best, Broker, EngineError, Granularity, Selection, TranslationRequest};
use crate::lang::{join_unchecked, LanguageCode};
use crate::par;
use crate::segment::{Segment, SegmentKind};
use crate::segmenter::{BoundaryDecision, SegmenterModel, StreamingSegmenter};
use crate::token::TokenEvent;

/// Engine id reported on a chunk caption whose translation failed everywhere.
pub const PASSTHROUGH_ENGINE: &str = "passthrough";
/// Engine id reported on a fallback_final event.
pub const FALLBACK_ENGINE: &str = "fallback";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClockMode {
    /// Event times derive from token timestamps plus seeded engine latencies.
    Simulated { seed: u64 },
    /// Event times are wall-clock milliseconds since the session started.
    Real,
}

impl Default for ClockMode {
    fn default() -> Self {
        ClockMode::Simulated { seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Translate chunks as they close, then replace them with the sentence.
    #[default]
    Chunked,
    /// Translate whole sentences only.
    SentenceOnly,
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub src: LanguageCode,
    pub tgt: LanguageCode,
    pub chunk_model: Arc<SegmenterModel>,
    pub sentence_model: Arc<SegmenterModel>,
    pub tags: ContextTags,
    pub history_window: usize,
    pub clock: ClockMode,
    pub mode: Mode,
}

impl SessionConfig {
    pub fn new(
        src: LanguageCode,
        tgt: LanguageCode,
        chunk_model: Arc<SegmenterModel>,
        sentence_model: Arc<SegmenterModel>,
    ) -> Self {
        SessionConfig {
            src,
            tgt,
            chunk_model,
            sentence_model,
            tags: ContextTags::default(),
            history_window: DEFAULT_HISTORY_WINDOW,
            clock: ClockMode::default(),
            mode: Mode::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.chunk_model.config.level != SegmentKind::Chunk {
            return Err(PipelineError::InvalidConfig("chunk model is not a chunk-level model".into()));
        }
        if self.sentence_model.config.level != SegmentKind::Sentence {
            return Err(PipelineError::InvalidConfig("sentence model is not a sentence-level model".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkStatus {
    Emitted,
    Superseded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkRecord {
    pub start: usize,
    pub end: usize,
    pub source: String,
    pub caption: String,
    pub status: ChunkStatus,
}

enum Clock {
    Simulated(Box<ChaCha8Rng>),
    Real(Instant),
}

/// One interpretation session over one token stream.
pub struct Session {
    cfg: SessionConfig,
    broker: Arc<Broker>,
    chunk_seg: StreamingSegmenter,
    sent_seg: StreamingSegmenter,
    clock: Clock,
    /// Tokens from index `base` onward (the open sentence and anything after).
    tokens: VecDeque<TokenEvent>,
    base: usize,
    next_index: usize,
    chunk_start: usize,
    sentence_id: usize,
    chunks: Vec<ChunkRecord>,
    seq: u64,
    last_emit: u64,
    history: HistoryBuffer,
    flushed: bool,
    last_t_ms: Option<u64>,
    chunk_segments: Vec<Segment>,
    sentence_segments: Vec<Segment>,
}

impl Session {
    pub fn new(cfg: SessionConfig, broker: Arc<Broker>) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let clock = match cfg.clock {
            ClockMode::Simulated { seed } => Clock::Simulated(Box::new(ChaCha8Rng::seed_from_u64(seed))),
            ClockMode::Real => Clock::Real(Instant::now()),
        };
        Ok(Session {
            chunk_seg: StreamingSegmenter::new(Arc::clone(&cfg.chunk_model)),
            sent_seg: StreamingSegmenter::new(Arc::clone(&cfg.sentence_model)),
            history: HistoryBuffer::new(cfg.history_window),
            cfg,
            broker,
            clock,
            tokens: VecDeque::new(),
            base: 0,
            next_index: 0,
            chunk_start: 0,
            sentence_id: 0,
            chunks: Vec::new(),
            seq: 0,
            last_emit: 0,
            flushed: false,
            last_t_ms: None,
            chunk_segments: Vec::new(),
            sentence_segments: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn next_token_index(&self) -> usize {
        self.next_index
    }

    /// Id the next terminal event will carry.
    pub fn open_sentence_id(&self) -> usize {
        self.sentence_id
    }

    /// Closed chunks of the open sentence.
    pub fn open_chunks(&self) -> &[ChunkRecord] {
        &self.chunks
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.history
    }

    /// Chunks translated so far (empty in sentence-only mode).
    pub fn chunk_segments(&self) -> &[Segment] {
        &self.chunk_segments
    }

    pub fn sentence_segments(&self) -> &[Segment] {
        &self.sentence_segments
    }

    pub fn is_flushed(&self) -> bool {
        self.flushed
    }

    pub fn feed_token(&mut self, tok: &TokenEvent) -> Result<Vec<CaptionEvent>, PipelineError> {
        if self.flushed {
            return Err(PipelineError::SessionClosed);
        }
        if tok.index != self.next_index {
            return Err(PipelineError::OutOfOrderToken {
                expected: self.next_index,
                found: tok.index,
            });
        }
        if self.last_t_ms.is_some_and(|prev| tok.t_ms < prev) {
            return Err(PipelineError::TimeRegression { index: tok.index });
        }
        let chunk = match self.cfg.mode {
            Mode::Chunked => self.chunk_seg.feed(tok)?,
            Mode::SentenceOnly => Vec::new(),
        };
        let sentence = self.sent_seg.feed(tok)?;
        self.tokens.push_back(tok.clone());
        self.next_index += 1;
        self.last_t_ms = Some(tok.t_ms);
        let now = self.now(tok.t_ms);
        let mut out = Vec::new();
        self.apply(merge(chunk, sentence), now, &mut out);
        Ok(out)
    }

    pub fn feed_batch(&mut self, toks: &[TokenEvent]) -> Result<Vec<CaptionEvent>, PipelineError> {
        let mut out = Vec::new();
        for t in toks {
            out.extend(self.feed_token(t)?);
        }
        Ok(out)
    }

    /// Ends the stream: every pending decision is made and the last sentence
    /// is closed. A second call returns nothing.
    pub fn flush_session(&mut self) -> Vec<CaptionEvent> {
        if self.flushed {
            return Vec::new();
        }
        self.flushed = true;
        let Some(last) = self.last_t_ms else {
            return Vec::new();
        };
        let chunk = match self.cfg.mode {
            Mode::Chunked => self.chunk_seg.flush(),
            Mode::SentenceOnly => Vec::new(),
        };
        let sentence = self.sent_seg.flush();
        let now = self.now(last);
        let mut out = Vec::new();
        self.apply(merge(chunk, sentence), now, &mut out);
        if self.chunk_start < self.next_index || !self.chunks.is_empty() {
            self.close_sentence(self.next_index - 1, now, &mut out);
        }
        out
    }

    /// Closes the open sentence with the in-order join of its chunk captions,
    /// replacing them. Used when every engine failed the retranslation.
    pub fn on_retranslation_failure(&mut self, sentence_id: usize) -> Result<CaptionEvent, PipelineError> {
        if sentence_id != self.sentence_id || self.chunks.is_empty() {
            return Err(PipelineError::UnknownSentence(sentence_id));
        }
        let event = self.fallback_event();
        let mut out = Vec::with_capacity(1);
        self.emit(event, self.last_emit, &mut out);
        Ok(out.remove(0))
    }

    fn fallback_event(&mut self) -> CaptionEvent {
        let texts: Vec<&str> = self.chunks.iter().map(|c| c.caption.as_str()).collect();
        let text = join_unchecked(&texts, self.cfg.tgt);
        let source = self.sentence_source(self.chunk_start - 1);
        self.finish_sentence(CaptionKind::FallbackFinal, FALLBACK_ENGINE.into(), text, source)
    }

    fn now(&self, token_ms: u64) -> u64 {
        match &self.clock {
            Clock::Simulated(_) => token_ms,
            Clock::Real(start) => start.elapsed().as_millis() as u64,
        }
    }

    fn apply(&mut self, decisions: Vec<(SegmentKind, BoundaryDecision)>, now: u64, out: &mut Vec<CaptionEvent>) {
        for (kind, d) in decisions {
            if !d.boundary {
                continue;
            }
            match kind {
                SegmentKind::Chunk => {
                    if d.position >= self.chunk_start {
                        self.close_chunk(d.position, now, out);
                    }
                }
                SegmentKind::Sentence => {
                    if d.position >= self.chunk_start {
                        self.close_sentence(d.position, now, out);
                    } else if let Some(last) = self.chunks.last() {
                        // inside already-closed chunks: end at the last of them
                        let end = last.end;
                        self.close_sentence(end, now, out);
                    }
                }
            }
        }
    }

    fn token_range(&self, start: usize, end: usize) -> Vec<String> {
        (start..=end).map(|i| self.tokens[i - self.base].surface.clone()).collect()
    }

    fn request(&self, source: &str, granularity: Granularity) -> TranslationRequest {
        let ctx = build_request_context(&self.cfg.tags, &self.history);
        TranslationRequest::new(self.cfg.src, self.cfg.tgt, source, ctx, granularity)
    }

    /// Runs one selection round. Returns the selection and its completion time.
    fn translate(&mut self, source: &str, granularity: Granularity, start_ms: u64) -> (Result<Selection, EngineError>, u64) {
        let req = self.request(source, granularity);
        let result = select_best(source, &req, &self.broker);
        let done = self.completion(start_ms);
        (result, done)
    }

    fn completion(&mut self, start_ms: u64) -> u64 {
        match &mut self.clock {
            Clock::Simulated(rng) => start_ms + self.broker.sample_round_ms(self.cfg.src, self.cfg.tgt, rng),
            Clock::Real(start) => start.elapsed().as_millis() as u64,
        }
    }

    fn emit(&mut self, mut e: CaptionEvent, done_ms: u64, out: &mut Vec<CaptionEvent>) {
        self.last_emit = self.last_emit.max(done_ms);
        e.seq = self.seq;
        e.emit_ms = self.last_emit;
        self.seq += 1;
        out.push(e);
    }

    fn chunk_event(&self, caption: String, engine: String) -> CaptionEvent {
        CaptionEvent {
            seq: 0,
            kind: CaptionKind::ChunkCaption,
            sentence_id: self.sentence_id,
            chunk_index: Some(self.chunks.len()),
            engine,
            replaces: Vec::new(),
            emit_ms: 0,
            text: caption,
        }
    }

    fn record_chunk(&mut self, end: usize, source: String, selection: Result<Selection, EngineError>, done: u64, out: &mut Vec<CaptionEvent>) {
        let (caption, engine) = match selection {
            Ok(sel) => (sel.winner.forward, sel.winner.engine_id),
            Err(_) => (source.clone(), PASSTHROUGH_ENGINE.to_string()),
        };
        let event = self.chunk_event(caption.clone(), engine);
        self.emit(event, done, out);
        let start = self.chunk_start;
        self.chunk_segments
            .push(Segment::new(SegmentKind::Chunk, start, self.token_range(start, end)));
        self.chunks.push(ChunkRecord {
            start,
            end,
            source,
            caption,
            status: ChunkStatus::Emitted,
        });
        self.chunk_start = end + 1;
    }

    fn close_chunk(&mut self, end: usize, now: u64, out: &mut Vec<CaptionEvent>) {
        let source = join_unchecked(&self.token_range(self.chunk_start, end), self.cfg.src);
        let (sel, done) = self.translate(&source, Granularity::Chunk, now);
        self.record_chunk(end, source, sel, done, out);
    }

    fn sentence_source(&self, end: usize) -> String {
        join_unchecked(&self.token_range(self.base, end), self.cfg.src)
    }

    /// Closes the sentence ending at `end`, force-closing the open chunk when
    /// it reaches that far.
    fn close_sentence(&mut self, end: usize, now: u64, out: &mut Vec<CaptionEvent>) {
        let source = self.sentence_source(end);
        let open_chunk = self.cfg.mode == Mode::Chunked && self.chunk_start <= end;
        let sentence_req = self.request(&source, Granularity::Sentence);
        let (chunk_result, sentence_result) = if open_chunk {
            let chunk_source = join_unchecked(&self.token_range(self.chunk_start, end), self.cfg.src);
            let chunk_req = self.request(&chunk_source, Granularity::Chunk);
            let broker = &self.broker;
            let (c, s) = par::join(
                broker.exec(),
                || select_best(&chunk_source, &chunk_req, broker),
                || select_best(&source, &sentence_req, broker),
            );
            (Some((chunk_source, c)), s)
        } else {
            (None, select_best(&source, &sentence_req, &self.broker))
        };
        if let Some((chunk_source, c)) = chunk_result {
            let done = self.completion(now);
            self.record_chunk(end, chunk_source, c, done, out);
        }
        if self.cfg.mode == Mode::SentenceOnly {
            self.chunk_start = end + 1;
        }
        let done = self.completion(now);
        let event = match sentence_result {
            Ok(sel) => self.finish_sentence(CaptionKind::SentenceFinal, sel.winner.engine_id, sel.winner.forward, source),
            Err(_) if self.chunks.is_empty() => {
                // sentence-only mode has no chunk captions to fall back on
                self.finish_sentence(CaptionKind::FallbackFinal, FALLBACK_ENGINE.into(), source.clone(), source)
            }
            Err(_) => self.fallback_event(),
        };
        self.emit(event, done, out);
    }

    /// Builds the terminal event (seq and emit_ms are set by `emit`) and
    /// advances to the next sentence.
    fn finish_sentence(&mut self, kind: CaptionKind, engine: String, text: String, source: String) -> CaptionEvent {
        let end = self.chunk_start - 1;
        let replaces: Vec<ChunkRef> = (0..self.chunks.len()).map(|i| (self.sentence_id, i)).collect();
        for c in &mut self.chunks {
            c.status = ChunkStatus::Superseded;
        }
        self.history.push(source, text.clone());
        self.sentence_segments
            .push(Segment::new(SegmentKind::Sentence, self.base, self.token_range(self.base, end)));
        let event = CaptionEvent {
            seq: 0,
            kind,
            sentence_id: self.sentence_id,
            chunk_index: None,
            engine,
            replaces,
            emit_ms: 0,
            text,
        };
        self.tokens.drain(..end + 1 - self.base);
        self.base = end + 1;
        self.sentence_id += 1;
        self.chunks.clear();
        event
    }
}

/// Interleaves the two segmenters' decisions by position, chunk decisions
/// first on equal positions.
fn merge(chunk: Vec<BoundaryDecision>, sentence: Vec<BoundaryDecision>) -> Vec<(SegmentKind, BoundaryDecision)> {
    let mut all: Vec<(SegmentKind, BoundaryDecision)> = chunk
        .into_iter()
        .map(|d| (SegmentKind::Chunk, d))
        .chain(sentence.into_iter().map(|d| (SegmentKind::Sentence, d)))
        .collect();
    all.sort_by_key(|(k, d)| (d.position, *k == SegmentKind::Sentence));
    all
}
