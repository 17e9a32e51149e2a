//! Seeded synthetic corpora with controllable chunk structure.
//!
//! Every generated sentence is a list of chunks; how a chunk boundary can be
//! recognised is fixed by the [`BoundaryPolicy`]:
//!
//! * `Marker`: each chunk ends with a marker token (`sentence` marker on the
//!   last chunk of a sentence, `chunk` marker otherwise). Boundary iff the
//!   token is a marker.
//! * `Follower`: each chunk starts with a designated word that occurs nowhere
//!   else. Position `t` is a boundary iff token `t + 1` is that word, so the
//!   verdict needs one token of lookahead.
//! * `Distributional`: chunk-final tokens come from a separate vocabulary
//!   that also leaks into chunk-internal positions with probability `leak`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use super::{ChunkAlignedPair, CorpusError, LabeledStream};
use crate::engines::DictionaryEntry;
use crate::lang::LanguageCode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthDist {
    Fixed { value: usize },
    Uniform { min: usize, max: usize },
    /// `1 + Poisson(mean - 1)`.
    Poisson { mean: f64 },
    /// `1 + Geometric(1 / mean)`; memoryless, so the elapsed length says
    /// nothing about the next boundary.
    Geometric { mean: f64 },
    Categorical { weights: Vec<(usize, f64)> },
}

impl LengthDist {
    fn validate(&self, what: &str) -> Result<(), CorpusError> {
        let bad = |m: &str| Err(CorpusError::InvalidSpec(format!("{what}: {m}")));
        match self {
            LengthDist::Fixed { value } if *value == 0 => bad("fixed length must be >= 1"),
            LengthDist::Uniform { min, max } if *min == 0 || min > max => bad("need 1 <= min <= max"),
            LengthDist::Poisson { mean } | LengthDist::Geometric { mean } if !(*mean >= 1.0 && mean.is_finite()) => {
                bad("mean must be >= 1")
            }
            LengthDist::Categorical { weights } => {
                if weights.is_empty() {
                    return bad("no categories");
                }
                if weights.iter().any(|&(n, w)| n == 0 || !(w > 0.0 && w.is_finite())) {
                    return bad("categories need length >= 1 and positive weight");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            LengthDist::Fixed { value } => *value,
            LengthDist::Uniform { min, max } => rng.random_range(*min..=*max),
            LengthDist::Poisson { mean } => {
                if *mean <= 1.0 {
                    1
                } else {
                    let d = Poisson::new(mean - 1.0).expect("validated mean");
                    1 + d.sample(rng) as usize
                }
            }
            LengthDist::Geometric { mean } => {
                let d = Geometric::new(1.0 / mean).expect("validated mean");
                1 + d.sample(rng) as usize
            }
            LengthDist::Categorical { weights } => {
                let total: f64 = weights.iter().map(|w| w.1).sum();
                let mut x = rng.random::<f64>() * total;
                for &(n, w) in weights {
                    if x < w {
                        return n;
                    }
                    x -= w;
                }
                weights[weights.len() - 1].0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryPolicy {
    Marker { chunk: String, sentence: String },
    Follower { word: String },
    Distributional { final_vocab: usize, leak: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub streams: usize,
    pub vocab_size: usize,
    pub chunk_len: LengthDist,
    pub sentence_chunks: LengthDist,
    pub sentences_per_stream: usize,
    pub policy: BoundaryPolicy,
}

impl GeneratorSpec {
    /// Chunks end in "," and sentences in ".".
    pub fn marker(streams: usize, chunk_len: LengthDist, sentence_chunks: LengthDist) -> Self {
        GeneratorSpec {
            streams,
            vocab_size: 40,
            chunk_len,
            sentence_chunks,
            sentences_per_stream: 3,
            policy: BoundaryPolicy::Marker {
                chunk: ",".into(),
                sentence: ".".into(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.vocab_size == 0 {
            return Err(CorpusError::InvalidSpec("vocab_size must be >= 1".into()));
        }
        if self.sentences_per_stream == 0 {
            return Err(CorpusError::InvalidSpec("sentences_per_stream must be >= 1".into()));
        }
        self.chunk_len.validate("chunk_len")?;
        self.sentence_chunks.validate("sentence_chunks")?;
        let vocab = |t: &str| t.starts_with('w') && t[1..].parse::<usize>().is_ok();
        let token_ok = |t: &str| !t.is_empty() && !t.chars().any(char::is_whitespace) && !t.contains('/');
        match &self.policy {
            BoundaryPolicy::Marker { chunk, sentence } => {
                if !token_ok(chunk) || !token_ok(sentence) || vocab(chunk) || vocab(sentence) {
                    return Err(CorpusError::InvalidSpec("markers must be single tokens outside the vocabulary".into()));
                }
            }
            BoundaryPolicy::Follower { word } => {
                if !token_ok(word) || vocab(word) {
                    return Err(CorpusError::InvalidSpec("follower word must be a single token outside the vocabulary".into()));
                }
            }
            BoundaryPolicy::Distributional { final_vocab, leak } => {
                if *final_vocab == 0 || !(0.0..=1.0).contains(leak) {
                    return Err(CorpusError::InvalidSpec("need final_vocab >= 1 and leak in [0,1]".into()));
                }
            }
        }
        Ok(())
    }
}

type Sentence = Vec<Vec<String>>;

fn gen_sentence(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Sentence {
    let n_chunks = spec.sentence_chunks.sample(rng);
    let word = |rng: &mut ChaCha8Rng| format!("w{}", rng.random_range(0..spec.vocab_size));
    (0..n_chunks)
        .map(|ci| {
            let len = spec.chunk_len.sample(rng);
            let last = ci + 1 == n_chunks;
            match &spec.policy {
                BoundaryPolicy::Marker { chunk, sentence } => {
                    let mut toks: Vec<String> = (1..len).map(|_| word(rng)).collect();
                    toks.push(if last { sentence.clone() } else { chunk.clone() });
                    toks
                }
                BoundaryPolicy::Follower { word: lead } => {
                    let mut toks = vec![lead.clone()];
                    toks.extend((1..len).map(|_| word(rng)));
                    toks
                }
                BoundaryPolicy::Distributional { final_vocab, leak } => {
                    let mut toks: Vec<String> = (1..len)
                        .map(|_| {
                            if rng.random::<f64>() < *leak {
                                format!("f{}", rng.random_range(0..*final_vocab))
                            } else {
                                word(rng)
                            }
                        })
                        .collect();
                    toks.push(format!("f{}", rng.random_range(0..*final_vocab)));
                    toks
                }
            }
        })
        .collect()
}

/// `streams` groups of `sentences_per_stream` sentences.
fn gen_sentences(spec: &GeneratorSpec, seed: u64) -> Result<Vec<Vec<Sentence>>, CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..spec.streams)
        .map(|_| (0..spec.sentences_per_stream).map(|_| gen_sentence(spec, &mut rng)).collect())
        .collect())
}

pub fn generate_synthetic(spec: &GeneratorSpec, seed: u64) -> Result<Vec<LabeledStream>, CorpusError> {
    Ok(gen_sentences(spec, seed)?
        .into_iter()
        .map(|sentences| {
            let mut s = LabeledStream {
                tokens: Vec::new(),
                chunk_ends: BTreeSet::new(),
                sentence_ends: BTreeSet::new(),
            };
            for sentence in sentences {
                for chunk in sentence {
                    s.tokens.extend(chunk);
                    s.chunk_ends.insert(s.tokens.len() - 1);
                }
                s.sentence_ends.insert(s.tokens.len() - 1);
            }
            s
        })
        .collect())
}

/// Parallel version of the synthetic corpus plus the phrase table that
/// translates it.
#[derive(Debug, Clone)]
pub struct SyntheticParallel {
    /// One pair per sentence, in generation order.
    pub pairs: Vec<ChunkAlignedPair>,
    /// Whole-chunk phrase entries followed by word entries.
    pub dictionary: Vec<DictionaryEntry>,
}

fn is_content(tok: &str) -> bool {
    (tok.starts_with('w') || tok.starts_with('f')) && tok[1..].parse::<usize>().is_ok()
}

fn target_word(tok: &str) -> String {
    if is_content(tok) {
        format!("t{tok}")
    } else {
        tok.to_string()
    }
}

/// Target chunk: content words mapped and reversed in place, structural
/// tokens (markers, follower word) kept where they are. A word-by-word
/// translation therefore gets the unigrams right but the order wrong.
fn target_chunk(chunk: &[String]) -> Vec<String> {
    let mut content: Vec<String> = chunk.iter().filter(|t| is_content(t)).map(|t| target_word(t)).collect();
    chunk
        .iter()
        .map(|t| if is_content(t) { content.pop().expect("same count") } else { t.clone() })
        .collect()
}

pub fn generate_parallel(
    spec: &GeneratorSpec,
    seed: u64,
    src: LanguageCode,
    tgt: LanguageCode,
) -> Result<SyntheticParallel, CorpusError> {
    let mut phrases: BTreeMap<String, String> = BTreeMap::new();
    let mut words: BTreeMap<String, String> = BTreeMap::new();
    let mut pairs = Vec::new();
    for sentence in gen_sentences(spec, seed)?.into_iter().flatten() {
        let mut src_chunks = Vec::new();
        let mut tgt_chunks = Vec::new();
        for chunk in &sentence {
            let s = chunk.join(" ");
            let t = target_chunk(chunk).join(" ");
            for w in chunk {
                words.entry(w.clone()).or_insert_with(|| target_word(w));
            }
            phrases.entry(s.clone()).or_insert_with(|| t.clone());
            src_chunks.push(s);
            tgt_chunks.push(t);
        }
        pairs.push(ChunkAlignedPair {
            src_lang: src,
            tgt_lang: tgt,
            src_chunks,
            tgt_chunks,
            sentence_translation: None,
        });
    }
    let dictionary = phrases
        .into_iter()
        .chain(words)
        .map(|(src, tgt)| DictionaryEntry { src, tgt, back: None })
        .collect();
    Ok(SyntheticParallel { pairs, dictionary })
}
