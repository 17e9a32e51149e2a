use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CorpusError;

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
    pub warnings: Vec<String>,
}

/// Seeded shuffle, then `floor(n * train)` items to train and the remainder
/// divided between dev and test in proportion to their ratios (rounded).
pub fn split<T: Clone>(items: &[T], ratios: (f64, f64, f64), seed: u64) -> Result<Split<T>, CorpusError> {
    let (tr, dv, ts) = ratios;
    if [tr, dv, ts].iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(CorpusError::InvalidRatios("ratios must be non-negative".into()));
    }
    if ((tr + dv + ts) - 1.0).abs() > 1e-6 {
        return Err(CorpusError::InvalidRatios(format!("ratios sum to {}", tr + dv + ts)));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let n = items.len();
    let n_train = ((n as f64 * tr) + 1e-9).floor() as usize;
    let rest = n - n_train.min(n);
    let n_dev = if dv + ts > 0.0 {
        ((rest as f64 * dv / (dv + ts)) + 1e-9).round() as usize
    } else {
        0
    };
    let n_dev = n_dev.min(rest);

    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    let train = pick(&order[..n_train]);
    let dev = pick(&order[n_train..n_train + n_dev]);
    let test = pick(&order[n_train + n_dev..]);

    let mut warnings = Vec::new();
    for (name, part) in [("train", &train), ("dev", &dev), ("test", &test)] {
        if part.is_empty() {
            warnings.push(format!("{name} split is empty"));
        }
    }
    Ok(Split { train, dev, test, warnings })
}
