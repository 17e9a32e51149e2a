use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::lang::LanguageCode;

/// One interpretation record: source and target split into aligned chunks.
///
/// File form is a TSV row `src_lang, tgt_lang, src_text, tgt_text
/// [, sentence_translation]` where `/` inside the text columns marks chunk
/// boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkAlignedPair {
    pub src_lang: LanguageCode,
    pub tgt_lang: LanguageCode,
    pub src_chunks: Vec<String>,
    pub tgt_chunks: Vec<String>,
    pub sentence_translation: Option<String>,
}

impl ChunkAlignedPair {
    /// Target side as one text, chunks joined per the target language.
    pub fn joined_target(&self) -> String {
        crate::lang::join_unchecked(&self.tgt_chunks, self.tgt_lang)
    }
}

fn split_chunks(field: &str) -> Vec<String> {
    field.split('/').map(|c| c.trim().to_string()).collect()
}

pub fn parse_chunk_corpus(text: &str) -> Result<Vec<ChunkAlignedPair>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if !(4..=5).contains(&cols.len()) {
            return Err(CorpusError::MalformedRecord(
                line,
                format!("expected 4 or 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let lang = |s: &str| {
            LanguageCode::parse(s.trim()).map_err(|e| CorpusError::MalformedRecord(line, e.to_string()))
        };
        let src_lang = lang(cols[0])?;
        let tgt_lang = lang(cols[1])?;
        let src_chunks = split_chunks(cols[2]);
        let tgt_chunks = split_chunks(cols[3]);
        if src_chunks.iter().chain(&tgt_chunks).any(String::is_empty) {
            return Err(CorpusError::MalformedRecord(line, "empty chunk".into()));
        }
        if src_chunks.len() != tgt_chunks.len() {
            return Err(CorpusError::ChunkCountMismatch {
                line,
                src: src_chunks.len(),
                tgt: tgt_chunks.len(),
            });
        }
        let sentence_translation = cols
            .get(4)
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty());
        out.push(ChunkAlignedPair {
            src_lang,
            tgt_lang,
            src_chunks,
            tgt_chunks,
            sentence_translation,
        });
    }
    if out.is_empty() {
        return Err(CorpusError::EmptyFile);
    }
    Ok(out)
}

pub fn read_chunk_corpus(path: &Path) -> Result<Vec<ChunkAlignedPair>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CorpusError::Io(format!("{}: {e}", path.display())))?;
    parse_chunk_corpus(&text)
}

/// Normalized TSV form: chunks re-joined with ` / `, LF line endings.
pub fn serialize_chunk_corpus(pairs: &[ChunkAlignedPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(p.src_lang.code());
        out.push('\t');
        out.push_str(p.tgt_lang.code());
        out.push('\t');
        out.push_str(&p.src_chunks.join(" / "));
        out.push('\t');
        out.push_str(&p.tgt_chunks.join(" / "));
        if let Some(s) = &p.sentence_translation {
            out.push('\t');
            out.push_str(s);
        }
        out.push('\n');
    }
    out
}
