use anyhow::Result;
use simulpipe::corpus::{generate_parallel, serialize_chunk_corpus};
use simulpipe::engines::DictionaryEntry;
use simulpipe::lang::tokenize;
use simulpipe::token::{encode_token_line, stream_from_surfaces};

use crate::config::{lang, Config};
use crate::io::write_text;
use crate::GenArgs;

pub fn gen_corpus(cfg: Config, a: GenArgs) -> Result<()> {
    let mut spec = cfg.generator();
    if let Some(n) = a.streams {
        spec.streams = n;
    }
    let src = lang(a.src.as_deref().unwrap_or(&cfg.session.src))?;
    let tgt = lang(a.tgt.as_deref().unwrap_or(&cfg.session.tgt))?;
    let data = generate_parallel(&spec, cfg.seed, src, tgt)?;
    write_text(&a.out, &serialize_chunk_corpus(&data.pairs))?;
    if let Some(p) = &a.dictionary {
        write_text(&p.to_string_lossy(), &DictionaryEntry::to_table(&data.dictionary))?;
    }
    if let Some(p) = &a.tokens {
        let surfaces: Vec<String> = data
            .pairs
            .iter()
            .flat_map(|pair| pair.src_chunks.iter().flat_map(|c| tokenize(c, src)))
            .collect();
        let mut text = String::new();
        for tok in stream_from_surfaces(&cfg.session.session_id, &surfaces, cfg.session.gap_ms) {
            text.push_str(&encode_token_line(&tok));
            text.push('\n');
        }
        write_text(&p.to_string_lossy(), &text)?;
    }
    eprintln!("generated {} sentence pairs", data.pairs.len());
    Ok(())
}
