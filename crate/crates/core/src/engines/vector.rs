use std::collections::BTreeMap;

use crate::lang::{tokenize, LanguageCode};

/// Sparse term-frequency vector over language-aware tokens.
pub type TermVector = BTreeMap<String, f64>;

pub fn vectorize(text: &str, lang: LanguageCode) -> TermVector {
    let mut v = TermVector::new();
    for t in tokenize(text, lang) {
        *v.entry(t).or_insert(0.0) += 1.0;
    }
    v
}

/// Cosine of two non-negative vectors; 0 when either is the zero vector.
pub fn cosine(u: &TermVector, v: &TermVector) -> f64 {
    let sq = |x: &TermVector| x.values().map(|c| c * c).sum::<f64>();
    let (nu, nv) = (sq(u), sq(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, a)| large.get(k).map(|b| a * b))
        .sum();
    // one sqrt over the product keeps cos(u, u) exactly 1 for integer counts
    (dot / (nu * nv).sqrt()).clamp(0.0, 1.0)
}

pub fn similarity(a: &str, b: &str, lang: LanguageCode) -> f64 {
    cosine(&vectorize(a, lang), &vectorize(b, lang))
}
