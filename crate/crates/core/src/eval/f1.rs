use std::collections::BTreeSet;

use serde::Serialize;

use super::EvalError;
use crate::segmenter::BoundaryDecision;

/// Raw counts, summable across streams (micro-averaging).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoundaryCounts {
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
    pub delay_sum: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean `decided_at - position` over true positives; 0 when there are none.
    pub mean_delay: f64,
}

impl BoundaryCounts {
    pub fn add(&mut self, other: BoundaryCounts) {
        self.true_positives += other.true_positives;
        self.predicted += other.predicted;
        self.gold += other.gold;
        self.delay_sum += other.delay_sum;
    }

    /// Empty prediction sets have precision 1 and empty gold sets recall 1,
    /// so a silent model on a boundary-free stream scores F1 = 1.
    pub fn scores(&self) -> BoundaryScores {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.true_positives, self.predicted);
        let recall = ratio(self.true_positives, self.gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let mean_delay = if self.true_positives == 0 {
            0.0
        } else {
            self.delay_sum as f64 / self.true_positives as f64
        };
        BoundaryScores {
            precision,
            recall,
            f1,
            mean_delay,
        }
    }
}

/// Counts for one stream of `len` tokens. Every position must carry exactly
/// one decision.
pub fn boundary_counts(
    gold: &BTreeSet<usize>,
    decisions: &[BoundaryDecision],
    len: usize,
) -> Result<BoundaryCounts, EvalError> {
    let mut seen = vec![false; len];
    let mut c = BoundaryCounts {
        gold: gold.len(),
        ..BoundaryCounts::default()
    };
    for d in decisions {
        if d.position >= len || seen[d.position] {
            return Err(EvalError::InvalidInput(format!("unexpected decision for position {}", d.position)));
        }
        seen[d.position] = true;
        if d.boundary {
            c.predicted += 1;
            if gold.contains(&d.position) {
                c.true_positives += 1;
                c.delay_sum += d.delay();
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(EvalError::IncompleteDecisions(missing));
    }
    Ok(c)
}

pub fn boundary_f1(
    gold: &BTreeSet<usize>,
    decisions: &[BoundaryDecision],
    len: usize,
) -> Result<BoundaryScores, EvalError> {
    Ok(boundary_counts(gold, decisions, len)?.scores())
}
