use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ChunkAlignedPair, CorpusError};
use crate::lang::LanguageCode;
use crate::segment::SegmentKind;

/// A token stream with gold chunk and sentence boundaries.
///
/// An index `i` in a boundary set means a segment ends after token `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledStream {
    pub tokens: Vec<String>,
    pub chunk_ends: BTreeSet<usize>,
    pub sentence_ends: BTreeSet<usize>,
}

impl LabeledStream {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(CorpusError::InvalidStream("no tokens".into()));
        }
        if !self.sentence_ends.is_subset(&self.chunk_ends) {
            return Err(CorpusError::InvalidStream("sentence end without chunk end".into()));
        }
        if self.chunk_ends.iter().any(|&i| i >= n) {
            return Err(CorpusError::InvalidStream("boundary beyond last token".into()));
        }
        if !self.sentence_ends.contains(&(n - 1)) {
            return Err(CorpusError::InvalidStream("last token does not end a sentence".into()));
        }
        Ok(())
    }

    pub fn boundaries(&self, kind: SegmentKind) -> &BTreeSet<usize> {
        match kind {
            SegmentKind::Chunk => &self.chunk_ends,
            SegmentKind::Sentence => &self.sentence_ends,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn append(&mut self, other: &LabeledStream) {
        let off = self.tokens.len();
        self.tokens.extend(other.tokens.iter().cloned());
        self.chunk_ends.extend(other.chunk_ends.iter().map(|i| i + off));
        self.sentence_ends.extend(other.sentence_ends.iter().map(|i| i + off));
    }
}

/// One stream per pair: every chunk's last token ends a chunk, the pair's
/// last token ends the sentence.
pub fn derive_labels<T>(pairs: &[ChunkAlignedPair], tokenizer: T) -> Result<Vec<LabeledStream>, CorpusError>
where
    T: Fn(&str, LanguageCode) -> Vec<String>,
{
    if pairs.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    pairs
        .iter()
        .enumerate()
        .map(|(rec, p)| {
            let mut s = LabeledStream {
                tokens: Vec::new(),
                chunk_ends: BTreeSet::new(),
                sentence_ends: BTreeSet::new(),
            };
            for chunk in &p.src_chunks {
                let toks = tokenizer(chunk, p.src_lang);
                if toks.is_empty() {
                    return Err(CorpusError::EmptyChunk(rec));
                }
                s.tokens.extend(toks);
                s.chunk_ends.insert(s.tokens.len() - 1);
            }
            if s.tokens.is_empty() {
                return Err(CorpusError::EmptyChunk(rec));
            }
            s.sentence_ends.insert(s.tokens.len() - 1);
            Ok(s)
        })
        .collect()
}

/// Concatenates consecutive groups of `per_stream` streams (the last group
/// may be shorter), simulating unsegmented multi-utterance input.
pub fn concat_streams(streams: &[LabeledStream], per_stream: usize) -> Vec<LabeledStream> {
    let per_stream = per_stream.max(1);
    streams
        .chunks(per_stream)
        .map(|group| {
            let mut acc = group[0].clone();
            for s in &group[1..] {
                acc.append(s);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_chunk_corpus;
    use crate::lang::tokenize;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn pair(chunks: &[&str]) -> ChunkAlignedPair {
        ChunkAlignedPair {
            src_lang: LanguageCode::parse("en").unwrap(),
            tgt_lang: LanguageCode::parse("es").unwrap(),
            src_chunks: chunks.iter().map(|s| s.to_string()).collect(),
            tgt_chunks: chunks.iter().map(|s| s.to_string()).collect(),
            sentence_translation: None,
        }
    }

    #[test]
    fn two_chunk_pair() {
        let s = &derive_labels(&[pair(&["a b", "c"])], tokenize).unwrap()[0];
        assert_eq!(s.tokens, vec!["a", "b", "c"]);
        assert_eq!(s.chunk_ends, set(&[1, 2]));
        assert_eq!(s.sentence_ends, set(&[2]));
        s.validate().unwrap();
    }

    #[test]
    fn single_chunk_pair() {
        let s = &derive_labels(&[pair(&["x y z"])], tokenize).unwrap()[0];
        assert_eq!(s.chunk_ends, set(&[2]));
        assert_eq!(s.sentence_ends, set(&[2]));
    }

    #[test]
    fn interpretation_record_has_four_chunk_ends() {
        let pairs = parse_chunk_corpus(
            "ja\ten\t先ご紹介した商品同様、/ 20 年未満の積立期間だと、/ 途中解約した場合、/ 戻ってくるお金は積立金の 0.8 倍になります。\ta / b / c / d\n",
        )
        .unwrap();
        let s = &derive_labels(&pairs, tokenize).unwrap()[0];
        assert_eq!(s.chunk_ends.len(), 4);
        assert_eq!(s.sentence_ends.len(), 1);
        s.validate().unwrap();
    }

    #[test]
    fn errors() {
        assert_eq!(derive_labels(&[], tokenize), Err(CorpusError::EmptyInput));
        assert_eq!(
            derive_labels(&[pair(&["a", "   "])], tokenize),
            Err(CorpusError::EmptyChunk(0))
        );
    }

    #[test]
    fn concat_offsets_labels() {
        let streams = derive_labels(&[pair(&["a b", "c"]), pair(&["d"]), pair(&["e f"])], tokenize).unwrap();
        let joined = concat_streams(&streams, 2);
        assert_eq!(joined.len(), 2);
        assert_eq!(joined[0].tokens, vec!["a", "b", "c", "d"]);
        assert_eq!(joined[0].chunk_ends, set(&[1, 2, 3]));
        assert_eq!(joined[0].sentence_ends, set(&[2, 3]));
        assert_eq!(joined[1].sentence_ends, set(&[1]));
        joined.iter().for_each(|s| s.validate().unwrap());
    }
}
