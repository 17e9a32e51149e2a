use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::sigmoid;
use super::{extract_features, SegmenterConfig, SegmenterError, SegmenterModel};
use crate::corpus::LabeledStream;
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub seed: u64,
    pub learning_rate: f64,
    /// Strength of the Gaussian weight prior, applied once per epoch.
    pub l2: f64,
    pub exec: Exec,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 10,
            seed: 0,
            learning_rate: 0.5,
            l2: 1.0,
            exec: Exec::default(),
        }
    }
}

struct Instance {
    features: Vec<u32>,
    label: bool,
}

/// Training instances of the head for `shift`: every position that has
/// `shift` tokens to its right, labelled with the gold verdict there.
fn head_instances(stream: &LabeledStream, config: &SegmenterConfig, shift: usize) -> Vec<(Vec<String>, bool)> {
    let gold = stream.boundaries(config.level);
    let n = stream.tokens.len();
    (0..n.saturating_sub(shift))
        .map(|p| (extract_features(&stream.tokens, p, shift, config.feature_window), gold.contains(&p)))
        .collect()
}

pub fn train(
    corpus: &[LabeledStream],
    config: SegmenterConfig,
    epochs: usize,
    seed: u64,
) -> Result<SegmenterModel, SegmenterError> {
    train_with(
        corpus,
        config,
        TrainOptions {
            epochs,
            seed,
            ..TrainOptions::default()
        },
    )
}

/// Trains one logistic head per shift `0..=max_delay` by shuffled, averaged
/// SGD. Heads are independent: head `s` sees the same instances and random
/// stream whatever `max_delay` is, so models for different delays agree on
/// their common heads. The same corpus, config and seed give bit-identical
/// weights in either execution mode.
pub fn train_with(
    corpus: &[LabeledStream],
    config: SegmenterConfig,
    opts: TrainOptions,
) -> Result<SegmenterModel, SegmenterError> {
    config.validate()?;
    if corpus.iter().all(|s| s.tokens.is_empty()) {
        return Err(SegmenterError::EmptyCorpus);
    }
    let mut model = SegmenterModel::untrained(config);
    if opts.epochs == 0 {
        return Ok(model);
    }
    model.heads = par::map_indexed(opts.exec, config.max_delay + 1, |shift| train_head(corpus, &config, shift, &opts));
    Ok(model)
}

fn train_head(
    corpus: &[LabeledStream],
    config: &SegmenterConfig,
    shift: usize,
    opts: &TrainOptions,
) -> BTreeMap<String, f64> {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut data: Vec<Instance> = Vec::new();
    for stream in corpus {
        for (feats, label) in head_instances(stream, config, shift) {
            let features = feats
                .into_iter()
                .map(|f| {
                    *ids.entry(f).or_insert_with_key(|k| {
                        names.push(k.clone());
                        (names.len() - 1) as u32
                    })
                })
                .collect();
            data.push(Instance { features, label });
        }
    }

    // averaged SGD: `w` is the running iterate, `u` accumulates step-weighted
    // updates so that the mean iterate is `w - u / c`
    let mut w = vec![0.0f64; names.len()];
    let mut u = vec![0.0f64; names.len()];
    let mut c = 1.0f64;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(shift as u64);
    for epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let lr = opts.learning_rate / (1.0 + epoch as f64).sqrt();
        for &i in &order {
            let inst = &data[i];
            let z: f64 = inst.features.iter().map(|&f| w[f as usize]).sum();
            let g = (if inst.label { 1.0 } else { 0.0 }) - sigmoid(z);
            for &f in &inst.features {
                let f = f as usize;
                let step = lr * g;
                w[f] += step;
                u[f] += c * step;
            }
            c += 1.0;
        }
        // Gaussian prior: one epoch's worth of the gradient of (l2 / 2) * |w|^2
        let shrink = (lr * opts.l2).min(1.0);
        for (wf, uf) in w.iter_mut().zip(u.iter_mut()) {
            let step = -shrink * *wf;
            *wf += step;
            *uf += c * step;
        }
    }
    names
        .into_iter()
        .zip(w.iter().zip(&u).map(|(w, u)| w - u / c))
        .filter(|(_, v)| *v != 0.0)
        .collect()
}
