use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use simulpipe::caption::read_caption_log;
use simulpipe::eval::{bleu as corpus_bleu, compare_engines, length_stats, CompareInputs, Smoothing};
use simulpipe::lang::tokenize;
use simulpipe::pipeline::latency_report;
use simulpipe::token::read_token_stream;
use simulpipe::{Segment, SegmentKind};

use super::{optional_model, read_pairs};
use crate::config::{lang, Config};
use crate::io::{open_input, read_jsonl, read_text, write_text};
use crate::{usage, BleuArgs, CompareArgs, LatencyArgs, LengthsArgs, ReportFormat, SmoothingArg};

fn lines(text: &str) -> Vec<&str> {
    text.lines().collect()
}

pub fn bleu(cfg: Config, a: BleuArgs) -> Result<()> {
    let mut bcfg = cfg.eval.bleu();
    if let Some(n) = a.max_n {
        bcfg.max_n = n;
    }
    if let Some(s) = a.smoothing {
        bcfg.smoothing = match s {
            SmoothingArg::None => Smoothing::None,
            SmoothingArg::AddOne => Smoothing::AddOneForNGe2,
        };
    }
    let l = lang(a.lang.as_deref().unwrap_or(&cfg.session.tgt))?;
    let cands = read_text(&a.candidates)?;
    let refs = read_text(&a.references)?;
    let score = corpus_bleu(&lines(&cands), &lines(&refs), l, bcfg)?;
    println!("{score:.4}");
    Ok(())
}

fn of_kind(segs: &[Segment], kind: SegmentKind) -> Vec<Segment> {
    segs.iter().filter(|s| s.kind == kind).cloned().collect()
}

pub fn lengths(cfg: Config, a: LengthsArgs) -> Result<()> {
    let mut sentences = Vec::new();
    let mut chunks = Vec::new();
    let mut utterances: Vec<Vec<String>> = Vec::new();
    for path in &a.segments {
        let segs: Vec<Segment> = read_jsonl(path)?;
        let s = of_kind(&segs, SegmentKind::Sentence);
        utterances.push(s.iter().flat_map(|x| x.tokens.clone()).collect());
        sentences.push(s);
        chunks.push(of_kind(&segs, SegmentKind::Chunk));
    }
    if let Some(p) = &a.utterances {
        let src = cfg.src()?;
        utterances = read_pairs(p)?
            .iter()
            .map(|pair| pair.src_chunks.iter().flat_map(|c| tokenize(c, src)).collect())
            .collect();
    }
    let stats = length_stats(&utterances, &sentences, &chunks).context("length statistics")?;
    let text = format!(
        "mean_utterance_len\tmean_sentence_seg_len\tmean_chunk_seg_len\treduction\treduction_percent\n{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
        stats.mean_utterance_len,
        stats.mean_sentence_seg_len,
        stats.mean_chunk_seg_len,
        stats.reduction,
        stats.reduction_percent()
    );
    write_text(&a.output, &text)
}

pub fn compare(mut cfg: Config, a: CompareArgs) -> Result<()> {
    let n = cfg.eval.compare.len();
    if n < 2 {
        return Err(usage(format!("eval compare needs at least two [[eval.compare]] configurations, got {n}")));
    }
    if let Some(p) = &a.chunk_model {
        cfg.segmenter.chunk_model = Some(p.clone());
    }
    if let Some(p) = &a.sentence_model {
        cfg.segmenter.sentence_model = Some(p.clone());
    }
    let test = a
        .test
        .clone()
        .or_else(|| cfg.corpus.test.clone())
        .ok_or_else(|| usage("no test corpus (--test or corpus.test)"))?;
    let pairs = read_pairs(&test)?;
    let broker = cfg.broker()?;
    let inputs = CompareInputs {
        broker: &broker,
        chunk_model: optional_model(cfg.segmenter.chunk_model.as_deref(), SegmentKind::Chunk)?,
        sentence_model: optional_model(cfg.segmenter.sentence_model.as_deref(), SegmentKind::Sentence)?,
        bleu: cfg.eval.bleu(),
        concat: a.concat.unwrap_or(cfg.eval.concat),
        exec: cfg.exec(),
    };
    let report = compare_engines(&pairs, &cfg.eval.compare, &inputs)?;
    let text = match a.format {
        ReportFormat::Tsv => report.to_tsv(),
        ReportFormat::Jsonl => report.to_jsonl(),
    };
    write_text(&a.output, &text)?;
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        bail!("{failed} of {} comparison rows failed", report.rows.len());
    }
    Ok(())
}

pub fn latency(mut cfg: Config, a: LatencyArgs) -> Result<()> {
    if let Some(f) = a.format {
        cfg.session.input_format = f;
    }
    let log = read_caption_log(open_input(&a.log)?).with_context(|| a.log.clone())?;
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let tokens = read_token_stream(text.as_bytes(), &cfg.session.session_id, cfg.stream_format(first))
        .with_context(|| a.input.display().to_string())?;
    let segs: Vec<Segment> = read_jsonl(&a.segments)?;
    let report = latency_report(&log, &tokens, &of_kind(&segs, SegmentKind::Sentence))?;
    let mut out = String::from("sentence_id\tfirst_token_ms\tfirst_caption_ms\tfinal_ms\n");
    for s in &report.sentences {
        writeln!(out, "{}\t{}\t{}\t{}", s.sentence_id, s.first_token_ms, s.first_caption_ms, s.final_ms)?;
    }
    write_text(&a.output, &out)?;
    eprintln!("latency: {}", report.summary());
    Ok(())
}
