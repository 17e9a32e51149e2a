use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{anyhow, Result};
use simulpipe::segmenter::{evaluate, train_with, tune_n};
use simulpipe::SegmentKind;

use super::train_dev;
use crate::config::Config;
use crate::io::write_text;
use crate::{usage, TrainArgs, TuneArgs};

pub fn train(mut cfg: Config, a: TrainArgs) -> Result<()> {
    let level: SegmentKind = a.level.into();
    let (train, dev) = train_dev(&mut cfg, &a.corpus)?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.segmenter.model_path(level).map(Into::into))
        .ok_or_else(|| usage(format!("no output path (--out or segmenter.{level}_model)")))?;
    if cfg.segmenter.epochs == 0 {
        eprintln!("warning: --epochs 0 writes an untrained model");
    }
    let seg_cfg = cfg.segmenter.config(level, a.max_delay.unwrap_or(cfg.segmenter.max_delay));
    let model = train_with(&train, seg_cfg, cfg.train_options())?;
    model.save(&out)?;
    eprintln!("wrote {}", out.display());
    if dev.is_empty() {
        eprintln!("warning: empty development set, no F1 to report");
        return Ok(());
    }
    let s = evaluate(&Arc::new(model), &dev).scores();
    println!(
        "dev F1={:.4} P={:.4} R={:.4} mean_delay={:.3}",
        s.f1, s.precision, s.recall, s.mean_delay
    );
    Ok(())
}

pub fn tune(mut cfg: Config, a: TuneArgs) -> Result<()> {
    let candidates = a.candidates.clone().unwrap_or_else(|| cfg.segmenter.candidates.clone());
    if candidates.is_empty() {
        return Err(usage("tune-n needs at least one candidate N"));
    }
    let level: SegmentKind = a.level.into();
    let (train, dev) = train_dev(&mut cfg, &a.corpus)?;
    if dev.is_empty() {
        return Err(anyhow!("empty development set"));
    }
    let report = tune_n(&train, &dev, &candidates, cfg.segmenter.config(level, 0), cfg.train_options())?;
    let mut text = String::from("max_delay\tprecision\trecall\tf1\tmean_delay\n");
    for r in &report.rows {
        writeln!(
            text,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.3}",
            r.max_delay, r.precision, r.recall, r.f1, r.mean_delay
        )?;
    }
    write_text(&a.report, &text)?;
    if let Some(out) = &a.out {
        report.model.save(out)?;
        eprintln!("wrote {}", out.display());
    }
    println!("selected N={}", report.selected);
    Ok(())
}
