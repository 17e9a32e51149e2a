//! Deterministic in-process engines.
//!
//! All mocks translate the request body (tag prefix stripped) and are pure
//! functions of the request, so they can serve concurrent callers.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EngineDescriptor, EngineError, TranslationEngine, TranslationRequest};
use crate::lang::{join_unchecked, tokenize, LanguageCode};

/// Echoes its input.
#[derive(Debug, Clone)]
pub struct IdentityEngine {
    descriptor: EngineDescriptor,
}

impl IdentityEngine {
    pub fn new(descriptor: EngineDescriptor) -> Self {
        IdentityEngine { descriptor }
    }
}

impl TranslationEngine for IdentityEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError> {
        Ok(req.body().to_string())
    }
}

/// Reverses the characters of every whitespace-separated token. The map is
/// its own inverse, so back-translation always recovers the input.
#[derive(Debug, Clone)]
pub struct CipherEngine {
    descriptor: EngineDescriptor,
}

impl CipherEngine {
    pub fn new(descriptor: EngineDescriptor) -> Self {
        CipherEngine { descriptor }
    }

    pub fn encipher(text: &str) -> String {
        text.split(' ')
            .map(|t| t.chars().rev().collect::<String>())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl TranslationEngine for CipherEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError> {
        Ok(CipherEngine::encipher(req.body()))
    }
}

/// One phrase-table line. `back` overrides what `tgt` back-translates to;
/// by default it is `src`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub src: String,
    pub tgt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub back: Option<String>,
}

impl DictionaryEntry {
    pub fn new(src: &str, tgt: &str) -> Self {
        DictionaryEntry {
            src: src.to_string(),
            tgt: tgt.to_string(),
            back: None,
        }
    }

    /// Parses `src<TAB>tgt[<TAB>back]` lines; `#` starts a comment line.
    pub fn parse_table(text: &str) -> Result<Vec<DictionaryEntry>, String> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            match cols.as_slice() {
                [s, t] if !s.is_empty() && !t.is_empty() => out.push(DictionaryEntry::new(s, t)),
                [s, t, b] if !s.is_empty() && !t.is_empty() && !b.is_empty() => out.push(DictionaryEntry {
                    src: s.to_string(),
                    tgt: t.to_string(),
                    back: Some(b.to_string()),
                }),
                _ => return Err(format!("line {}: expected 2 or 3 non-empty columns", i + 1)),
            }
        }
        Ok(out)
    }

    pub fn to_table(entries: &[DictionaryEntry]) -> String {
        let mut out = String::new();
        for e in entries {
            out.push_str(&e.src);
            out.push('\t');
            out.push_str(&e.tgt);
            if let Some(b) = &e.back {
                out.push('\t');
                out.push_str(b);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct PhraseTable {
    entries: HashMap<Vec<String>, String>,
    longest: usize,
}

impl PhraseTable {
    fn insert(&mut self, key: Vec<String>, value: String) {
        if key.is_empty() {
            return;
        }
        self.longest = self.longest.max(key.len());
        self.entries.entry(key).or_insert(value);
    }

    /// Whole-input hit first; otherwise greedy longest match left to right,
    /// copying tokens that match nothing.
    fn apply(&self, text: &str, from: LanguageCode, to: LanguageCode) -> String {
        let toks = tokenize(text, from);
        if let Some(hit) = self.entries.get(&toks) {
            return hit.clone();
        }
        let mut pieces: Vec<String> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let max = self.longest.min(toks.len() - i);
            let found = (1..=max)
                .rev()
                .find_map(|n| self.entries.get(&toks[i..i + n]).map(|v| (n, v)));
            match found {
                Some((n, v)) => {
                    pieces.push(v.clone());
                    i += n;
                }
                None => {
                    pieces.push(toks[i].clone());
                    i += 1;
                }
            }
        }
        join_unchecked(&pieces, to)
    }
}

/// Phrase-table engine for one language pair.
#[derive(Debug, Clone)]
pub struct DictionaryEngine {
    descriptor: EngineDescriptor,
    src: LanguageCode,
    tgt: LanguageCode,
    forward: PhraseTable,
    reverse: PhraseTable,
}

impl DictionaryEngine {
    pub fn new(
        id: impl Into<String>,
        src: LanguageCode,
        tgt: LanguageCode,
        entries: &[DictionaryEntry],
        reverse_capable: bool,
        priority: u32,
    ) -> Self {
        let mut forward = PhraseTable::default();
        let mut reverse = PhraseTable::default();
        for e in entries {
            forward.insert(tokenize(&e.src, src), e.tgt.clone());
            reverse.insert(tokenize(&e.tgt, tgt), e.back.clone().unwrap_or_else(|| e.src.clone()));
        }
        DictionaryEngine {
            descriptor: EngineDescriptor::new(id, [(src, tgt)], reverse_capable, priority),
            src,
            tgt,
            forward,
            reverse,
        }
    }
}

impl TranslationEngine for DictionaryEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError> {
        if req.src == self.src {
            Ok(self.forward.apply(req.body(), self.src, self.tgt))
        } else {
            Ok(self.reverse.apply(req.body(), self.tgt, self.src))
        }
    }
}

/// Wraps another engine and drops each output token with probability
/// `dropout`. The dropout pattern is seeded by `(seed, direction, input)`,
/// so equal requests always get equal output. At least one token survives.
pub struct NoisyEngine {
    descriptor: EngineDescriptor,
    inner: Box<dyn TranslationEngine>,
    dropout: f64,
    seed: u64,
}

impl NoisyEngine {
    pub fn new(descriptor: EngineDescriptor, inner: Box<dyn TranslationEngine>, dropout: f64, seed: u64) -> Self {
        NoisyEngine {
            descriptor,
            inner,
            dropout: dropout.clamp(0.0, 1.0),
            seed,
        }
    }
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

impl TranslationEngine for NoisyEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError> {
        let out = self.inner.translate_raw(req)?;
        let mut h = fnv1a(&self.seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
        h = fnv1a(req.src.code().as_bytes(), h);
        h = fnv1a(req.tgt.code().as_bytes(), h);
        h = fnv1a(req.body().as_bytes(), h);
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let toks = tokenize(&out, req.tgt);
        let mut kept: Vec<&String> = toks.iter().filter(|_| rng.random::<f64>() >= self.dropout).collect();
        if kept.is_empty() {
            if let Some(first) = toks.first() {
                kept.push(first);
            }
        }
        Ok(join_unchecked(&kept, req.tgt))
    }
}

/// Fails every request; stands in for a backend that is down.
#[derive(Debug, Clone)]
pub struct UnavailableEngine {
    descriptor: EngineDescriptor,
}

impl UnavailableEngine {
    pub fn new(descriptor: EngineDescriptor) -> Self {
        UnavailableEngine { descriptor }
    }
}

impl TranslationEngine for UnavailableEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, _req: &TranslationRequest) -> Result<String, EngineError> {
        Err(EngineError::EngineUnavailable(
            self.descriptor.id.clone(),
            "backend offline".into(),
        ))
    }
}
