mod eval;
mod gen;
mod run;
mod simulate;
mod train;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use simulpipe::corpus::{concat_streams, derive_labels, read_chunk_corpus, split, ChunkAlignedPair, LabeledStream};
use simulpipe::lang::tokenize;
use simulpipe::pipeline::{ClockMode, SessionConfig};
use simulpipe::segmenter::SegmenterModel;
use simulpipe::SegmentKind;

use crate::config::{load_model, Config};
use crate::{usage, Cli, Command, CorpusArgs, EvalCommand, SessionArgs};

pub fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = Config::load_or_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.sequential {
        cfg.parallel = false;
    }
    match cli.command {
        Command::Run(a) => run::run(cfg, a),
        Command::Train(a) => train::train(cfg, a),
        Command::TuneN(a) => train::tune(cfg, a),
        Command::GenCorpus(a) => gen::gen_corpus(cfg, a),
        Command::Simulate(a) => simulate::simulate(cfg, a),
        Command::Eval(EvalCommand::Bleu(a)) => eval::bleu(cfg, a),
        Command::Eval(EvalCommand::Lengths(a)) => eval::lengths(cfg, a),
        Command::Eval(EvalCommand::Compare(a)) => eval::compare(cfg, a),
        Command::Eval(EvalCommand::Latency(a)) => eval::latency(cfg, a),
    }
}

fn apply_session(cfg: &mut Config, a: &SessionArgs) -> Result<()> {
    if let Some(p) = &a.chunk_model {
        cfg.segmenter.chunk_model = Some(p.clone());
    }
    if let Some(p) = &a.sentence_model {
        cfg.segmenter.sentence_model = Some(p.clone());
    }
    if let Some(m) = a.mode {
        cfg.session.mode = m.into();
    }
    if let Some(s) = &a.src {
        cfg.session.src = s.clone();
    }
    if let Some(t) = &a.tgt {
        cfg.session.tgt = t.clone();
    }
    cfg.validate()
}

fn configured_model(cfg: &Config, level: SegmentKind) -> Result<Arc<SegmenterModel>> {
    let path = cfg
        .segmenter
        .model_path(level)
        .ok_or_else(|| usage(format!("no {level} model given (--{level}-model or segmenter.{level}_model)")))?;
    load_model(path, level)
}

fn optional_model(path: Option<&Path>, level: SegmentKind) -> Result<Option<Arc<SegmenterModel>>> {
    path.map(|p| load_model(p, level)).transpose()
}

/// Session settings from the config, with both models loaded.
fn session_config(cfg: &Config, clock: ClockMode) -> Result<SessionConfig> {
    if cfg.engines.is_empty() {
        bail!("no engines configured");
    }
    Ok(SessionConfig {
        src: cfg.src()?,
        tgt: cfg.tgt()?,
        chunk_model: configured_model(cfg, SegmentKind::Chunk)?,
        sentence_model: configured_model(cfg, SegmentKind::Sentence)?,
        tags: cfg.tags()?,
        history_window: cfg.context.window_k,
        clock,
        mode: cfg.session.mode,
    })
}

fn read_pairs(path: &Path) -> Result<Vec<ChunkAlignedPair>> {
    read_chunk_corpus(path).with_context(|| format!("corpus {}", path.display()))
}

fn labeled(pairs: &[ChunkAlignedPair], concat: usize) -> Result<Vec<LabeledStream>> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    Ok(concat_streams(&derive_labels(pairs, tokenize)?, concat))
}

/// Training and development streams, either from two files or from a
/// seeded split of one.
fn train_dev(cfg: &mut Config, a: &CorpusArgs) -> Result<(Vec<LabeledStream>, Vec<LabeledStream>)> {
    if let Some(p) = &a.corpus {
        cfg.corpus.path = Some(p.clone());
    }
    if let Some(p) = &a.dev {
        cfg.corpus.dev = Some(p.clone());
    }
    if let Some(e) = a.epochs {
        cfg.segmenter.epochs = e;
    }
    if let Some(c) = a.concat {
        cfg.corpus.concat = c;
    }
    cfg.validate()?;
    let path: PathBuf = cfg
        .corpus
        .path
        .clone()
        .ok_or_else(|| usage("no corpus given (--corpus or corpus.path)"))?;
    let pairs = read_pairs(&path)?;
    let (train, dev) = match &cfg.corpus.dev {
        Some(dev) => (pairs, read_pairs(dev)?),
        None => {
            let [tr, dv, ts] = cfg.corpus.split;
            let s = split(&pairs, (tr, dv, ts), cfg.seed)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            (s.train, s.dev)
        }
    };
    Ok((labeled(&train, cfg.corpus.concat)?, labeled(&dev, cfg.corpus.concat)?))
}
