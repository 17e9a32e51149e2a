use std::sync::Arc;

use serde::Serialize;

use super::{segment_tokens, train_with, SegmenterConfig, SegmenterError, SegmenterModel, TrainOptions};
use crate::corpus::LabeledStream;
use crate::eval::{boundary_counts, BoundaryCounts};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneRow {
    pub max_delay: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub selected: usize,
    /// One row per candidate, in the order given.
    pub rows: Vec<TuneRow>,
    pub model: SegmenterModel,
}

/// Micro-averaged boundary scores of `model` over `streams`.
pub fn evaluate(model: &Arc<SegmenterModel>, streams: &[LabeledStream]) -> BoundaryCounts {
    let mut total = BoundaryCounts::default();
    for s in streams {
        let (decisions, _) = segment_tokens(model, &s.tokens);
        let c = boundary_counts(s.boundaries(model.config.level), &decisions, s.tokens.len())
            .expect("segment_tokens decides every position");
        total.add(c);
    }
    total
}

/// Trains one model per candidate delay on `train`, scores each on `dev`,
/// and keeps the best F1. Ties go to the smaller delay.
pub fn tune_n(
    train: &[LabeledStream],
    dev: &[LabeledStream],
    candidates: &[usize],
    base: SegmenterConfig,
    opts: TrainOptions,
) -> Result<TuneReport, SegmenterError> {
    if candidates.is_empty() {
        return Err(SegmenterError::EmptyCandidates);
    }
    if dev.is_empty() {
        return Err(SegmenterError::EmptyCorpus);
    }
    let runs = par::map(opts.exec, candidates, |&n| -> Result<(TuneRow, SegmenterModel), SegmenterError> {
        let cfg = SegmenterConfig { max_delay: n, ..base };
        let model = Arc::new(train_with(train, cfg, opts)?);
        let s = evaluate(&model, dev).scores();
        let row = TuneRow {
            max_delay: n,
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
            mean_delay: s.mean_delay,
        };
        Ok((row, Arc::try_unwrap(model).unwrap_or_else(|m| (*m).clone())))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let best = runs
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.0.f1.total_cmp(&b.0.f1).then(b.0.max_delay.cmp(&a.0.max_delay)))
        .map(|(i, _)| i)
        .expect("candidates non-empty");
    let selected = runs[best].0.max_delay;
    let mut rows = Vec::with_capacity(runs.len());
    let mut model = None;
    for (i, (row, m)) in runs.into_iter().enumerate() {
        rows.push(row);
        if i == best {
            model = Some(m);
        }
    }
    Ok(TuneReport {
        selected,
        rows,
        model: model.expect("best index is in range"),
    })
}
