use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::context::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Speaker {
    /// Japanese speaker.
    J,
    /// Foreign speaker.
    F,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogTurn {
    pub speaker: Speaker,
    pub domain: Scene,
    pub src_text: String,
    pub tgt_text: String,
}

fn header<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let line = line.trim_start();
    for (open, close) in [("【", "】"), ("[", "]")] {
        let tag = format!("{open}{name}{close}");
        if let Some(rest) = line.strip_prefix(tag.as_str()) {
            return Some(rest.trim());
        }
    }
    None
}

/// The first word of the header naming a scene, e.g. "Medical Care / ..." → medical.
fn domain_scene(text: &str) -> Option<Scene> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .find_map(|w| w.to_lowercase().parse::<Scene>().ok())
}

/// Parses dialog blocks: a `【Domain】` header, an optional `【Speaker】`
/// legend, then `speaker<TAB>source<TAB>target` turns. Rows whose speaker
/// column is blank (column captions) are skipped.
pub fn parse_dialog_corpus(text: &str) -> Result<Vec<DialogTurn>, CorpusError> {
    let mut domain: Option<Scene> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        if let Some(d) = header(raw, "Domain") {
            domain = Some(domain_scene(d).ok_or_else(|| CorpusError::UnknownDomain(line, d.to_string()))?);
            continue;
        }
        if header(raw, "Speaker").is_some() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(CorpusError::MalformedRecord(
                line,
                format!("expected speaker, source and target columns, found {}", cols.len()),
            ));
        }
        if cols[0].is_empty() {
            continue;
        }
        let speaker = match cols[0] {
            "J" => Speaker::J,
            "F" => Speaker::F,
            other => return Err(CorpusError::UnknownSpeaker(line, other.to_string())),
        };
        let domain = domain.ok_or_else(|| CorpusError::MalformedRecord(line, "turn before any domain header".into()))?;
        if cols[1].is_empty() || cols[2].is_empty() {
            return Err(CorpusError::MalformedRecord(line, "empty utterance".into()));
        }
        out.push(DialogTurn {
            speaker,
            domain,
            src_text: cols[1].to_string(),
            tgt_text: cols[2].to_string(),
        });
    }
    Ok(out)
}

pub fn read_dialog_corpus(path: &Path) -> Result<Vec<DialogTurn>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CorpusError::Io(format!("{}: {e}", path.display())))?;
    parse_dialog_corpus(&text)
}
