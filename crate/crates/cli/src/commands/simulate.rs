use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::Result;
use simulpipe::corpus::generate_synthetic;
use simulpipe::par;
use simulpipe::pipeline::{paired_latency, ClockMode, LatencyReport, SessionConfig};
use simulpipe::token::stream_from_surfaces;

use super::{apply_session, session_config};
use crate::config::Config;
use crate::io::write_text;
use crate::SimulateArgs;

fn first(r: &LatencyReport) -> u64 {
    r.sentences.first().map_or(0, |s| s.first_caption_ms)
}

pub fn simulate(mut cfg: Config, a: SimulateArgs) -> Result<()> {
    apply_session(&mut cfg, &a.session)?;
    let mut spec = cfg.generator();
    spec.streams = a.streams.unwrap_or(cfg.simulate.streams);
    let base = session_config(&cfg, ClockMode::Simulated { seed: cfg.seed })?;
    let broker = Arc::new(cfg.broker()?);
    let streams: Vec<_> = generate_synthetic(&spec, cfg.seed)?
        .iter()
        .enumerate()
        .map(|(i, s)| stream_from_surfaces(&format!("sim{i}"), &s.tokens, cfg.session.gap_ms))
        .collect();
    let results = par::map_indexed(cfg.exec(), streams.len(), |i| {
        let c = SessionConfig {
            clock: ClockMode::Simulated {
                seed: cfg.seed.wrapping_add(i as u64),
            },
            ..base.clone()
        };
        paired_latency(&c, &broker, &streams[i])
    });

    let mut out = String::from(
        "stream\tsentences\tchunked_first_ms\tsentence_only_first_ms\tchunked_mean_first_ms\tsentence_only_mean_first_ms\tchunked_mean_final_ms\tsentence_only_mean_final_ms\n",
    );
    let (mut faster, mut sum_c, mut sum_s) = (0, 0.0, 0.0);
    for (i, r) in results.into_iter().enumerate() {
        let (c, s) = r?;
        if first(&c) < first(&s) {
            faster += 1;
        }
        sum_c += c.mean_first_caption_ms;
        sum_s += s.mean_first_caption_ms;
        writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{:.1}\t{:.1}\t{:.1}\t{:.1}",
            c.sentences.len(),
            first(&c),
            first(&s),
            c.mean_first_caption_ms,
            s.mean_first_caption_ms,
            c.mean_final_ms,
            s.mean_final_ms
        )?;
    }
    write_text(&a.output, &out)?;
    let n = streams.len().max(1) as f64;
    eprintln!(
        "streams={} mean_first_caption_ms chunked={:.1} sentence_only={:.1} chunked_first_faster={}/{}",
        streams.len(),
        sum_c / n,
        sum_s / n,
        faster,
        streams.len()
    );
    Ok(())
}
