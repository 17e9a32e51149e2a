//! Language-code registry and the single tokenization policy shared by
//! segmentation, similarity scoring and BLEU.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// `(code, spaceless)` for every supported language.
const REGISTRY: [(&str, bool); 15] = [
    ("ja", true),
    ("en", false),
    ("es", false),
    ("fp", false),
    ("fr", false),
    ("id", false),
    ("km", true),
    ("ko", false),
    ("mn", false),
    ("my", true),
    ("ne", false),
    ("pt", false),
    ("th", true),
    ("vi", false),
    ("zh", true),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("unknown language code `{0}`")]
    UnknownCode(String),
    #[error("cannot join an empty token list")]
    EmptyInput,
}

/// A registry language code.
///
/// Equality and hashing look at the code only; the `spaceless` flag is data
/// that callers may override with [`LanguageCode::with_spaceless`].
#[derive(Debug, Clone, Copy)]
pub struct LanguageCode {
    code: &'static str,
    spaceless: bool,
}

impl LanguageCode {
    pub fn parse(code: &str) -> Result<Self, LangError> {
        REGISTRY
            .iter()
            .find(|(c, _)| *c == code)
            .map(|&(code, spaceless)| LanguageCode { code, spaceless })
            .ok_or_else(|| LangError::UnknownCode(code.to_string()))
    }

    pub fn all() -> impl Iterator<Item = LanguageCode> {
        REGISTRY
            .iter()
            .map(|&(code, spaceless)| LanguageCode { code, spaceless })
    }

    pub fn code(&self) -> &'static str {
        self.code
    }

    pub fn spaceless(&self) -> bool {
        self.spaceless
    }

    pub fn with_spaceless(mut self, spaceless: bool) -> Self {
        self.spaceless = spaceless;
        self
    }

    pub fn separator(&self) -> &'static str {
        if self.spaceless {
            ""
        } else {
            " "
        }
    }
}

impl PartialEq for LanguageCode {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
    }
}

impl Eq for LanguageCode {}

impl Hash for LanguageCode {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl PartialOrd for LanguageCode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LanguageCode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.code.cmp(other.code)
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code)
    }
}

impl FromStr for LanguageCode {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageCode::parse(s)
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code)
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        LanguageCode::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Joins normalized tokens with a single space, or with nothing for
/// spaceless languages.
pub fn join_tokens<S: AsRef<str>>(tokens: &[S], lang: LanguageCode) -> Result<String, LangError> {
    if tokens.is_empty() {
        return Err(LangError::EmptyInput);
    }
    Ok(join_unchecked(tokens, lang))
}

pub(crate) fn join_unchecked<S: AsRef<str>>(tokens: &[S], lang: LanguageCode) -> String {
    let sep = lang.separator();
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        out.push_str(t.as_ref());
    }
    out
}

/// Whitespace split for spaced languages, character unigrams (whitespace
/// dropped) for spaceless ones.
pub fn tokenize(text: &str, lang: LanguageCode) -> Vec<String> {
    if lang.spaceless() {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect()
    } else {
        text.split_whitespace().map(str::to_string).collect()
    }
}
