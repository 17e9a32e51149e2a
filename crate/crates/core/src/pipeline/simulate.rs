use std::sync::Arc;

use super::{latency_report, LatencyReport, Mode, PipelineError, Session, SessionConfig};
use crate::caption::{CaptionEvent, CaptionKind, ChunkRef};
use crate::engines::Broker;
use crate::par::{self, Exec};
use crate::segment::Segment;
use crate::token::TokenEvent;

/// Everything one session produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub log: Vec<CaptionEvent>,
    pub chunks: Vec<Segment>,
    pub sentences: Vec<Segment>,
}

impl SessionOutcome {
    pub fn latency(&self, tokens: &[TokenEvent]) -> Result<LatencyReport, PipelineError> {
        latency_report(&self.log, tokens, &self.sentences)
    }
}

/// Feeds a whole stream and flushes.
pub fn run_session(cfg: SessionConfig, broker: Arc<Broker>, tokens: &[TokenEvent]) -> Result<SessionOutcome, PipelineError> {
    let mut session = Session::new(cfg, broker)?;
    let mut log = session.feed_batch(tokens)?;
    log.extend(session.flush_session());
    Ok(SessionOutcome {
        log,
        chunks: session.chunk_segments().to_vec(),
        sentences: session.sentence_segments().to_vec(),
    })
}

/// Runs independent sessions, one per stream. `config_for(i)` supplies the
/// configuration of stream `i`. Results are in stream order.
pub fn simulate_batch<F>(
    exec: Exec,
    streams: &[Vec<TokenEvent>],
    broker: &Arc<Broker>,
    config_for: F,
) -> Vec<Result<SessionOutcome, PipelineError>>
where
    F: Fn(usize) -> SessionConfig + Sync + Send,
{
    par::map_indexed(exec, streams.len(), |i| run_session(config_for(i), Arc::clone(broker), &streams[i]))
}

/// Latency of the same stream under the chunked and the sentence-only
/// pipeline, in that order.
pub fn paired_latency(
    cfg: &SessionConfig,
    broker: &Arc<Broker>,
    tokens: &[TokenEvent],
) -> Result<(LatencyReport, LatencyReport), PipelineError> {
    let run = |mode: Mode| -> Result<LatencyReport, PipelineError> {
        let c = SessionConfig { mode, ..cfg.clone() };
        run_session(c, Arc::clone(broker), tokens)?.latency(tokens)
    };
    let (a, b) = par::join(broker.exec(), || run(Mode::Chunked), || run(Mode::SentenceOnly));
    Ok((a?, b?))
}

/// An event without its timing fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalEvent {
    pub kind: CaptionKind,
    pub sentence_id: usize,
    pub chunk_index: Option<usize>,
    pub engine: String,
    pub replaces: Vec<ChunkRef>,
    pub text: String,
}

/// The part of a log that must not depend on engine timing.
pub fn logical_view(log: &[CaptionEvent]) -> Vec<LogicalEvent> {
    log.iter()
        .map(|e| LogicalEvent {
            kind: e.kind,
            sentence_id: e.sentence_id,
            chunk_index: e.chunk_index,
            engine: e.engine.clone(),
            replaces: e.replaces.clone(),
            text: e.text.clone(),
        })
        .collect()
}
