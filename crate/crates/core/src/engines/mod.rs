//! Translation engines behind one adapter contract, and back-translation
//! based selection among them.

mod broker;
mod mock;
mod remote;
mod vector;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::RequestContext;
use crate::lang::LanguageCode;

pub use broker::{pick_winner, select_best, Broker, CandidateOutcome, LatencyModel, Selection};
pub use mock::{CipherEngine, DictionaryEngine, DictionaryEntry, IdentityEngine, NoisyEngine, UnavailableEngine};
pub use remote::RemoteEngine;
pub use vector::{cosine, similarity, vectorize, TermVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("engine `{engine}` does not support {src}->{tgt}")]
    UnsupportedPair {
        engine: String,
        src: LanguageCode,
        tgt: LanguageCode,
    },
    #[error("engine `{0}` unavailable: {1}")]
    EngineUnavailable(String, String),
    #[error("engine `{0}` returned an empty translation")]
    EmptyResponse(String),
    #[error("engine `{0}` cannot back-translate")]
    NotReverseCapable(String),
    #[error("no engine supports {0}->{1}")]
    NoEngineAvailable(LanguageCode, LanguageCode),
    #[error("all engines failed")]
    AllEnginesFailed(Vec<(String, EngineError)>),
    #[error("invalid engine roster: {0}")]
    InvalidRoster(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Chunk,
    Sentence,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Chunk => "chunk",
            Granularity::Sentence => "sentence",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineDescriptor {
    pub id: String,
    pub supports: BTreeSet<(LanguageCode, LanguageCode)>,
    pub reverse_capable: bool,
    /// Lower wins ties.
    pub priority: u32,
}

impl EngineDescriptor {
    pub fn new(
        id: impl Into<String>,
        pairs: impl IntoIterator<Item = (LanguageCode, LanguageCode)>,
        reverse_capable: bool,
        priority: u32,
    ) -> Self {
        EngineDescriptor {
            id: id.into(),
            supports: pairs.into_iter().collect(),
            reverse_capable,
            priority,
        }
    }

    /// Forward direction; back-translation of a supported pair is allowed
    /// when `reverse_capable` is set.
    pub fn supports(&self, src: LanguageCode, tgt: LanguageCode) -> bool {
        self.supports.contains(&(src, tgt))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRequest {
    pub src: LanguageCode,
    pub tgt: LanguageCode,
    /// Source text with the tag prefix already prepended.
    pub text: String,
    pub context: RequestContext,
    pub granularity: Granularity,
}

impl TranslationRequest {
    pub fn new(
        src: LanguageCode,
        tgt: LanguageCode,
        source: &str,
        context: RequestContext,
        granularity: Granularity,
    ) -> Self {
        TranslationRequest {
            src,
            tgt,
            text: format!("{}{}", context.tag_prefix, source),
            context,
            granularity,
        }
    }

    /// Text with any leading tag prefix removed.
    pub fn body(&self) -> &str {
        crate::context::split_prefix(&self.text)
            .map(|(_, body)| body)
            .unwrap_or(&self.text)
    }

    fn reversed(&self, text: &str) -> TranslationRequest {
        TranslationRequest {
            src: self.tgt,
            tgt: self.src,
            text: text.to_string(),
            context: self.context.clone(),
            granularity: self.granularity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationCandidate {
    pub engine_id: String,
    pub forward: String,
    pub back: String,
    pub similarity: f64,
}

/// The adapter contract. Implementations translate `req.text` from
/// `req.src` to `req.tgt`; back-translation arrives as an ordinary request
/// with the languages swapped.
pub trait TranslationEngine: Send + Sync {
    fn descriptor(&self) -> &EngineDescriptor;

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError>;
}

fn checked(engine: &dyn TranslationEngine, req: &TranslationRequest) -> Result<String, EngineError> {
    let out = engine.translate_raw(req)?;
    if out.trim().is_empty() {
        return Err(EngineError::EmptyResponse(engine.descriptor().id.clone()));
    }
    Ok(out)
}

pub fn translate(engine: &dyn TranslationEngine, req: &TranslationRequest) -> Result<String, EngineError> {
    let d = engine.descriptor();
    if !d.supports(req.src, req.tgt) {
        return Err(EngineError::UnsupportedPair {
            engine: d.id.clone(),
            src: req.src,
            tgt: req.tgt,
        });
    }
    checked(engine, req)
}

/// Translates `tgt_text` from `req.tgt` back to `req.src` with the same
/// engine's reverse model.
pub fn back_translate(
    engine: &dyn TranslationEngine,
    tgt_text: &str,
    req: &TranslationRequest,
) -> Result<String, EngineError> {
    let d = engine.descriptor();
    if !d.reverse_capable {
        return Err(EngineError::NotReverseCapable(d.id.clone()));
    }
    if !d.supports(req.src, req.tgt) {
        return Err(EngineError::UnsupportedPair {
            engine: d.id.clone(),
            src: req.tgt,
            tgt: req.src,
        });
    }
    checked(engine, &req.reversed(tgt_text))
}
