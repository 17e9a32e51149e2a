use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::lang::{tokenize, LanguageCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// Add one to numerator and denominator of every order n >= 2.
    AddOneForNGe2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BleuConfig {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default)]
    pub smoothing: Smoothing,
}

fn default_max_n() -> usize {
    4
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_n: default_max_n(),
            smoothing: Smoothing::None,
        }
    }
}

/// Clipped match count and candidate n-gram count for one order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NgramCounts {
    pub matched: usize,
    pub total: usize,
}

fn ngrams<S: AsRef<str>>(toks: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut m = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w.iter().map(|t| t.as_ref()).collect()).or_insert(0) += 1;
        }
    }
    m
}

/// Candidate n-grams, each counted at most as often as it occurs in the reference.
pub fn modified_precision<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> NgramCounts {
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    NgramCounts {
        matched: cand.iter().map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0))).sum(),
        total: cand.values().sum(),
    }
}

/// `min(1, e^(1 - r/c))`; 0 for an empty candidate.
pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len == 0 {
        return 0.0;
    }
    if candidate_len >= reference_len {
        return 1.0;
    }
    (1.0 - reference_len as f64 / candidate_len as f64).exp()
}

/// Corpus BLEU over pre-tokenized segments.
pub fn bleu_tokens<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<S>],
    cfg: BleuConfig,
) -> Result<f64, EvalError> {
    if cfg.max_n == 0 {
        return Err(EvalError::InvalidConfig("max_n must be >= 1".into()));
    }
    if candidates.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut counts = vec![NgramCounts::default(); cfg.max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (c, r) in candidates.iter().zip(references) {
        c_len += c.len();
        r_len += r.len();
        for (n, acc) in counts.iter_mut().enumerate() {
            let k = modified_precision(c, r, n + 1);
            acc.matched += k.matched;
            acc.total += k.total;
        }
    }
    let mut log_sum = 0.0;
    for (i, k) in counts.iter().enumerate() {
        let (num, den) = match cfg.smoothing {
            Smoothing::AddOneForNGe2 if i >= 1 => (k.matched as f64 + 1.0, k.total as f64 + 1.0),
            _ => (k.matched as f64, k.total as f64),
        };
        if num == 0.0 || den == 0.0 {
            return Ok(0.0);
        }
        log_sum += (num / den).ln();
    }
    let score = brevity_penalty(c_len, r_len) * (log_sum / cfg.max_n as f64).exp();
    Ok(score.clamp(0.0, 1.0))
}

/// Corpus BLEU with the language-aware tokenizer.
pub fn bleu<S: AsRef<str>>(
    candidates: &[S],
    references: &[S],
    lang: LanguageCode,
    cfg: BleuConfig,
) -> Result<f64, EvalError> {
    let tok = |xs: &[S]| xs.iter().map(|x| tokenize(x.as_ref(), lang)).collect::<Vec<_>>();
    bleu_tokens(&tok(candidates), &tok(references), cfg)
}
