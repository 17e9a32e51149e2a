//! Dialog context attached to every translation request: categorical tags
//! rendered as a source-side prefix, and a bounded window of previous
//! (utterance, translation) pairs.
//!
//! Prefix grammar, categories in fixed order and unset ones omitted:
//!
//! ```text
//! <spk:V> <scn:V> <subj:V> <gen:V>␠
//! ```
//!
//! Every pseudo-token is followed by one space, so an empty tag set renders
//! as the empty string and the prefix can be prepended to any input.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::LanguageCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContextError {
    #[error("unknown tag category `{0}`")]
    UnknownCategory(String),
    #[error("`{value}` is not a valid {category} tag")]
    UnknownValue { category: String, value: String },
    #[error("{0}")]
    LanguageRestriction(String),
    #[error("malformed tag prefix: {0}")]
    MalformedPrefix(String),
}

macro_rules! tag_enum {
    ($name:ident, $category:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ContextError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(ContextError::UnknownValue {
                        category: $category.to_string(),
                        value: s.to_string(),
                    }),
                }
            }
        }
    };
}

tag_enum!(SpeakerTag, "speaker", { Japanese => "japanese", Foreigner => "foreigner" });
tag_enum!(Scene, "scene", {
    Business => "business",
    Disaster => "disaster",
    Education => "education",
    Medical => "medical",
    Municipality => "municipality",
    Shopping => "shopping",
    Sightseeing => "sightseeing",
    Sports => "sports",
    Transportation => "transportation",
    Others => "others",
});
tag_enum!(Subject, "subject", { Watashi => "watashi", Anata => "anata" });
tag_enum!(Gender, "gender", { Female => "female", Male => "male" });

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextTags {
    pub speaker: Option<SpeakerTag>,
    pub scene: Option<Scene>,
    pub subject: Option<Subject>,
    pub gender: Option<Gender>,
}

fn check_languages(tags: &ContextTags, src: LanguageCode, tgt: LanguageCode) -> Result<(), ContextError> {
    if tags.subject.is_some() && src.code() != "ja" {
        return Err(ContextError::LanguageRestriction(format!(
            "subject tags need Japanese source, got {src}"
        )));
    }
    if tags.gender.is_some() && tgt.code() != "th" {
        return Err(ContextError::LanguageRestriction(format!(
            "gender tags need Thai target, got {tgt}"
        )));
    }
    Ok(())
}

/// Builds tags from `category -> value` pairs, enforcing the vocabulary and
/// the language restrictions of `subject` (ja source) and `gender` (th target).
pub fn validate_tags<K, V>(
    raw: &BTreeMap<K, V>,
    src: LanguageCode,
    tgt: LanguageCode,
) -> Result<ContextTags, ContextError>
where
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut tags = ContextTags::default();
    for (k, v) in raw {
        let v = v.as_ref();
        match k.as_ref() {
            "speaker" => tags.speaker = Some(v.parse()?),
            "scene" => tags.scene = Some(v.parse()?),
            "subject" => tags.subject = Some(v.parse()?),
            "gender" => tags.gender = Some(v.parse()?),
            other => return Err(ContextError::UnknownCategory(other.to_string())),
        }
    }
    check_languages(&tags, src, tgt)?;
    Ok(tags)
}

pub fn serialize_tags(tags: &ContextTags) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: Option<&str>| {
        if let Some(v) = value {
            out.push('<');
            out.push_str(key);
            out.push(':');
            out.push_str(v);
            out.push_str("> ");
        }
    };
    push("spk", tags.speaker.map(SpeakerTag::as_str));
    push("scn", tags.scene.map(Scene::as_str));
    push("subj", tags.subject.map(Subject::as_str));
    push("gen", tags.gender.map(Gender::as_str));
    out
}

/// Splits a leading tag prefix off `text`. Returns the parsed tags and the
/// remaining body. Text without a prefix yields default tags and the input.
pub fn split_prefix(text: &str) -> Result<(ContextTags, &str), ContextError> {
    let mut tags = ContextTags::default();
    let mut rest = text;
    let mut last_rank = 0;
    while rest.starts_with('<') {
        let close = rest
            .find("> ")
            .ok_or_else(|| ContextError::MalformedPrefix(rest.to_string()))?;
        let inner = &rest[1..close];
        let (key, value) = inner
            .split_once(':')
            .ok_or_else(|| ContextError::MalformedPrefix(inner.to_string()))?;
        let rank = match key {
            "spk" => {
                tags.speaker = Some(value.parse()?);
                1
            }
            "scn" => {
                tags.scene = Some(value.parse()?);
                2
            }
            "subj" => {
                tags.subject = Some(value.parse()?);
                3
            }
            "gen" => {
                tags.gender = Some(value.parse()?);
                4
            }
            _ => return Err(ContextError::MalformedPrefix(inner.to_string())),
        };
        if rank <= last_rank {
            return Err(ContextError::MalformedPrefix(format!("`{key}` out of order")));
        }
        last_rank = rank;
        rest = &rest[close + 2..];
    }
    Ok((tags, rest))
}

/// Inverse of [`serialize_tags`]; the whole input must be a prefix.
pub fn parse_tags(prefix: &str) -> Result<ContextTags, ContextError> {
    let (tags, rest) = split_prefix(prefix)?;
    if !rest.is_empty() {
        return Err(ContextError::MalformedPrefix(rest.to_string()));
    }
    Ok(tags)
}

pub const DEFAULT_HISTORY_WINDOW: usize = 3;

/// FIFO of the last `window` (source, translation) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryBuffer {
    window: usize,
    entries: VecDeque<(String, String)>,
}

impl HistoryBuffer {
    pub fn new(window: usize) -> Self {
        HistoryBuffer {
            window,
            entries: VecDeque::with_capacity(window),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn push(&mut self, src_utt: impl Into<String>, translation: impl Into<String>) {
        if self.window == 0 {
            return;
        }
        if self.entries.len() == self.window {
            self.entries.pop_front();
        }
        self.entries.push_back((src_utt.into(), translation.into()));
    }

    pub fn entries(&self) -> impl Iterator<Item = &(String, String)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for HistoryBuffer {
    fn default() -> Self {
        HistoryBuffer::new(DEFAULT_HISTORY_WINDOW)
    }
}

/// Value-returning form of [`HistoryBuffer::push`].
pub fn push_history(mut buf: HistoryBuffer, src_utt: &str, translation: &str) -> HistoryBuffer {
    buf.push(src_utt, translation);
    buf
}

/// What an engine receives besides the source text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestContext {
    pub tag_prefix: String,
    /// Oldest first.
    pub history: Vec<(String, String)>,
}

pub fn build_request_context(tags: &ContextTags, buf: &HistoryBuffer) -> RequestContext {
    RequestContext {
        tag_prefix: serialize_tags(tags),
        history: buf.entries().cloned().collect(),
    }
}
