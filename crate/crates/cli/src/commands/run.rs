use std::io::{BufRead, Write};
use std::sync::Arc;

use anyhow::{Context, Result};
use simulpipe::caption::encode_event;
use simulpipe::pipeline::{latency_report, ClockMode, Session};
use simulpipe::token::TokenLineDecoder;

use super::{apply_session, session_config};
use crate::config::{ClockKind, Config};
use crate::io::{open_input, open_output};
use crate::RunArgs;

pub fn run(mut cfg: Config, a: RunArgs) -> Result<()> {
    apply_session(&mut cfg, &a.session)?;
    if let Some(f) = a.format {
        cfg.session.input_format = f;
    }
    let clock = match a.clock.unwrap_or(cfg.session.clock) {
        ClockKind::Simulated => ClockMode::Simulated { seed: cfg.seed },
        ClockKind::Real => ClockMode::Real,
    };
    let session_cfg = session_config(&cfg, clock)?;
    let mut session = Session::new(session_cfg, Arc::new(cfg.broker()?))?;

    let input = open_input(&a.input)?;
    let mut out = open_output(&a.output)?;
    let mut decoder: Option<TokenLineDecoder> = None;
    let mut skipped = 0;
    let mut tokens = Vec::new();
    let mut log = Vec::new();
    for line in BufRead::lines(input) {
        let line = line.with_context(|| format!("reading {}", a.input))?;
        let dec = match &mut decoder {
            Some(d) => d,
            None if line.trim().is_empty() => {
                skipped += 1;
                continue;
            }
            None => {
                let mut d = TokenLineDecoder::new(&cfg.session.session_id, cfg.stream_format(&line));
                for _ in 0..skipped {
                    d.decode_line("")?;
                }
                decoder.insert(d)
            }
        };
        let Some(tok) = dec.decode_line(&line).with_context(|| a.input.clone())? else {
            continue;
        };
        let events = session.feed_token(&tok)?;
        for e in &events {
            writeln!(out, "{}", encode_event(e))?;
        }
        if !events.is_empty() {
            out.flush()?;
        }
        log.extend(events);
        tokens.push(tok);
    }
    for e in session.flush_session() {
        writeln!(out, "{}", encode_event(&e))?;
        log.push(e);
    }
    out.flush()?;

    if let Some(path) = &a.segments {
        let mut f = open_output(&path.to_string_lossy())?;
        for s in session.chunk_segments().iter().chain(session.sentence_segments()) {
            writeln!(f, "{}", serde_json::to_string(s)?)?;
        }
        f.flush()?;
    }
    if tokens.is_empty() {
        eprintln!("no input tokens");
    } else {
        let report = latency_report(&log, &tokens, session.sentence_segments())?;
        eprintln!("latency: {}", report.summary());
    }
    Ok(())
}
