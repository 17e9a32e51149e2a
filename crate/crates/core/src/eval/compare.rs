use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bleu_tokens, fixed_length_segment, BleuConfig, EvalError};
use crate::context::RequestContext;
use crate::corpus::ChunkAlignedPair;
use crate::engines::{select_best, translate, Broker, EngineError, Granularity, TranslationRequest};
use crate::lang::{join_unchecked, tokenize, LanguageCode};
use crate::par::{self, Exec};
use crate::segment::Segment;
use crate::segmenter::{segment_tokens, SegmenterModel};

/// How a configuration splits its input before translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segmentation {
    /// The trained chunk model.
    Chunk,
    /// The trained sentence model.
    Sentence,
    /// Fixed-length windows (the BASE baseline).
    Fixed { len: usize },
}

impl Segmentation {
    fn granularity(self) -> Granularity {
        match self {
            Segmentation::Sentence => Granularity::Sentence,
            _ => Granularity::Chunk,
        }
    }
}

/// Which engine translates the segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum EngineChoice {
    /// One engine of the roster, by id.
    Engine(String),
    /// Back-translation selection over the whole roster.
    Select,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub name: String,
    pub segmentation: Segmentation,
    pub engine: EngineChoice,
}

pub struct CompareInputs<'a> {
    pub broker: &'a Broker,
    pub chunk_model: Option<Arc<SegmenterModel>>,
    pub sentence_model: Option<Arc<SegmenterModel>>,
    pub bleu: BleuConfig,
    /// Consecutive test pairs joined into one input stream.
    pub concat: usize,
    pub exec: Exec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub config: String,
    pub direction: String,
    pub bleu: Option<f64>,
    pub inputs: usize,
    pub segments: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub direction: String,
    pub a: String,
    pub b: String,
    /// `100 * (bleu(a) - bleu(b))`.
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    /// Sorted by configuration name, then direction.
    pub rows: Vec<CompareRow>,
    pub deltas: Vec<Delta>,
}

pub const TSV_HEADER: &str = "config\tdirection\tbleu\tinputs\tsegments\tstatus";

impl CompareReport {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn row(&self, config: &str, direction: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.config == config && r.direction == direction)
    }

    /// Rows under [`TSV_HEADER`], then a blank line and the deltas as
    /// `direction  a  b  points`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TSV_HEADER}").unwrap();
        for r in &self.rows {
            let bleu = r.bleu.map_or("-".to_string(), |b| format!("{b:.4}"));
            let status = r.error.as_deref().map_or("ok".to_string(), |e| format!("failed: {e}"));
            writeln!(out, "{}\t{}\t{bleu}\t{}\t{}\t{status}", r.config, r.direction, r.inputs, r.segments).unwrap();
        }
        if !self.deltas.is_empty() {
            writeln!(out).unwrap();
            writeln!(out, "direction\ta\tb\tdelta_points").unwrap();
            for d in &self.deltas {
                writeln!(out, "{}\t{}\t{}\t{:+.2}", d.direction, d.a, d.b, d.points).unwrap();
            }
        }
        out
    }

    /// One JSON object per row, then one per delta (tagged by `"record"`).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut v = serde_json::to_value(r).expect("row serializes");
            v["record"] = "row".into();
            writeln!(out, "{v}").unwrap();
        }
        for d in &self.deltas {
            let mut v = serde_json::to_value(d).expect("delta serializes");
            v["record"] = "delta".into();
            writeln!(out, "{v}").unwrap();
        }
        out
    }
}

/// `100 * (a - b)`, the points difference between two BLEU scores.
pub fn delta_points(a: f64, b: f64) -> f64 {
    100.0 * (a - b)
}

struct Input {
    tokens: Vec<String>,
    reference: String,
}

fn direction_inputs(pairs: &[&ChunkAlignedPair], concat: usize) -> Vec<Input> {
    pairs
        .chunks(concat.max(1))
        .map(|group| {
            let tgt = group[0].tgt_lang;
            let tokens = group
                .iter()
                .flat_map(|p| p.src_chunks.iter().flat_map(move |c| tokenize(c, p.src_lang)))
                .collect();
            let refs: Vec<String> = group
                .iter()
                .map(|p| p.sentence_translation.clone().unwrap_or_else(|| p.joined_target()))
                .collect();
            Input {
                tokens,
                reference: join_unchecked(&refs, tgt),
            }
        })
        .collect()
}

fn segment(cfg: &CompareConfig, inputs: &CompareInputs, tokens: &[String]) -> Result<Vec<Segment>, String> {
    let model = |m: &Option<Arc<SegmenterModel>>, what: &str| m.clone().ok_or_else(|| format!("no {what} model given"));
    match cfg.segmentation {
        Segmentation::Chunk => Ok(segment_tokens(&model(&inputs.chunk_model, "chunk")?, tokens).1),
        Segmentation::Sentence => Ok(segment_tokens(&model(&inputs.sentence_model, "sentence")?, tokens).1),
        Segmentation::Fixed { len } => fixed_length_segment(tokens, len).map_err(|e| e.to_string()),
    }
}

fn translate_segment(
    cfg: &CompareConfig,
    broker: &Broker,
    src: LanguageCode,
    tgt: LanguageCode,
    text: &str,
) -> Result<String, EngineError> {
    let req = TranslationRequest::new(src, tgt, text, RequestContext::default(), cfg.segmentation.granularity());
    match &cfg.engine {
        EngineChoice::Select => select_best(text, &req, broker).map(|s| s.winner.forward),
        EngineChoice::Engine(id) => {
            let engine = broker
                .engines()
                .find(|e| e.descriptor().id == *id)
                .ok_or_else(|| EngineError::InvalidRoster(format!("unknown engine `{id}`")))?;
            translate(engine.as_ref(), &req)
        }
    }
}

fn run_row(
    cfg: &CompareConfig,
    (src, tgt): (LanguageCode, LanguageCode),
    data: &[Input],
    inputs: &CompareInputs,
) -> CompareRow {
    let mut row = CompareRow {
        config: cfg.name.clone(),
        direction: format!("{}-{}", src.code(), tgt.code()),
        bleu: None,
        inputs: data.len(),
        segments: 0,
        error: None,
    };
    let mut cands = Vec::with_capacity(data.len());
    let mut refs = Vec::with_capacity(data.len());
    for input in data {
        let segs = match segment(cfg, inputs, &input.tokens) {
            Ok(s) => s,
            Err(e) => {
                row.error = Some(e);
                return row;
            }
        };
        row.segments += segs.len();
        let mut out = Vec::with_capacity(segs.len());
        for s in &segs {
            match translate_segment(cfg, inputs.broker, src, tgt, &join_unchecked(&s.tokens, src)) {
                Ok(t) => out.push(t),
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            }
        }
        cands.push(tokenize(&join_unchecked(&out, tgt), tgt));
        refs.push(tokenize(&input.reference, tgt));
    }
    match bleu_tokens(&cands, &refs, inputs.bleu) {
        Ok(b) => row.bleu = Some(b),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// BLEU of every configuration on every direction present in `pairs`,
/// plus pairwise deltas between successful rows of the same direction.
pub fn compare_engines(
    pairs: &[ChunkAlignedPair],
    configs: &[CompareConfig],
    inputs: &CompareInputs,
) -> Result<CompareReport, EvalError> {
    if configs.len() < 2 {
        return Err(EvalError::InvalidConfig("comparison needs at least two configurations".into()));
    }
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(EvalError::InvalidConfig("configuration names must be unique".into()));
    }
    let mut by_direction: BTreeMap<(LanguageCode, LanguageCode), Vec<&ChunkAlignedPair>> = BTreeMap::new();
    for p in pairs {
        by_direction.entry((p.src_lang, p.tgt_lang)).or_default().push(p);
    }
    let data: Vec<((LanguageCode, LanguageCode), Vec<Input>)> = by_direction
        .into_iter()
        .map(|(dir, ps)| (dir, direction_inputs(&ps, inputs.concat)))
        .collect();
    let jobs: Vec<(&CompareConfig, usize)> = configs
        .iter()
        .flat_map(|c| (0..data.len()).map(move |d| (c, d)))
        .collect();
    let mut rows = par::map(inputs.exec, &jobs, |&(cfg, d)| run_row(cfg, data[d].0, &data[d].1, inputs));
    rows.sort_by(|a, b| (&a.config, &a.direction).cmp(&(&b.config, &b.direction)));

    let mut deltas = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if let (true, Some(x), Some(y)) = (a.direction == b.direction, a.bleu, b.bleu) {
                deltas.push(Delta {
                    direction: a.direction.clone(),
                    a: a.config.clone(),
                    b: b.config.clone(),
                    points: delta_points(x, y),
                });
            }
        }
    }
    deltas.sort_by(|x, y| (&x.direction, &x.a, &x.b).cmp(&(&y.direction, &y.a, &y.b)));
    Ok(CompareReport { rows, deltas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_parallel, generate_synthetic, GeneratorSpec, LengthDist};
    use crate::engines::{DictionaryEngine, EngineDescriptor, IdentityEngine, LatencyModel};
    use crate::segmenter::{train, SegmenterConfig};
    use crate::SegmentKind;

    fn lang(c: &str) -> LanguageCode {
        LanguageCode::parse(c).unwrap()
    }

    fn spec(streams: usize) -> GeneratorSpec {
        GeneratorSpec::marker(streams, LengthDist::Uniform { min: 2, max: 5 }, LengthDist::Uniform { min: 2, max: 4 })
    }

    fn models() -> (Arc<SegmenterModel>, Arc<SegmenterModel>) {
        let corpus = generate_synthetic(&spec(150), 11).unwrap();
        let chunk = train(&corpus, SegmenterConfig::new(SegmentKind::Chunk, 1), 5, 0).unwrap();
        let sentence = train(&corpus, SegmenterConfig::new(SegmentKind::Sentence, 1), 5, 0).unwrap();
        (Arc::new(chunk), Arc::new(sentence))
    }

    fn config(name: &str, segmentation: Segmentation, engine: EngineChoice) -> CompareConfig {
        CompareConfig {
            name: name.into(),
            segmentation,
            engine,
        }
    }

    fn inputs(broker: &Broker, exec: Exec) -> CompareInputs<'_> {
        let (chunk, sentence) = models();
        CompareInputs {
            broker,
            chunk_model: Some(chunk),
            sentence_model: Some(sentence),
            bleu: BleuConfig::default(),
            concat: 3,
            exec,
        }
    }

    #[test]
    fn delta_arithmetic() {
        assert!((delta_points(0.30, 0.27) - 3.0).abs() < 1e-9);
        assert!((delta_points(0.27, 0.30) + 3.0).abs() < 1e-9);
    }

    #[test]
    fn identity_copy_scores_one_everywhere() {
        let en = lang("en");
        let mut pairs = generate_parallel(&spec(12), 3, en, en).unwrap().pairs;
        for p in &mut pairs {
            p.tgt_chunks = p.src_chunks.clone();
        }
        let broker = Broker::new()
            .with(IdentityEngine::new(EngineDescriptor::new("id", [(en, en)], true, 0)), LatencyModel::Fixed { ms: 0 })
            .unwrap();
        let configs = [
            config("base", Segmentation::Fixed { len: 4 }, EngineChoice::Engine("id".into())),
            config("chunk", Segmentation::Chunk, EngineChoice::Select),
            config("sentence", Segmentation::Sentence, EngineChoice::Engine("id".into())),
        ];
        let report = compare_engines(&pairs, &configs, &inputs(&broker, Exec::Parallel)).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(!report.any_failed());
        for r in &report.rows {
            assert_eq!(r.bleu, Some(1.0), "{r:?}");
            assert_eq!(r.inputs, pairs.len().div_ceil(3));
        }
        assert_eq!(report.deltas.len(), 3);
        assert!(report.deltas.iter().all(|d| d.points == 0.0));
        assert!(report.to_tsv().starts_with(TSV_HEADER));
        assert_eq!(report.to_jsonl().lines().count(), 6);
    }

    #[test]
    fn learned_chunks_beat_fixed_windows() {
        let (en, es) = (lang("en"), lang("es"));
        let data = generate_parallel(&spec(60), 5, en, es).unwrap();
        let broker = Broker::new()
            .with(DictionaryEngine::new("dict", en, es, &data.dictionary, true, 0), LatencyModel::Fixed { ms: 0 })
            .unwrap();
        let configs = [
            config("base", Segmentation::Fixed { len: 7 }, EngineChoice::Engine("dict".into())),
            config("chunk", Segmentation::Chunk, EngineChoice::Engine("dict".into())),
        ];
        let par = compare_engines(&data.pairs, &configs, &inputs(&broker, Exec::Parallel)).unwrap();
        let seq = compare_engines(&data.pairs, &configs, &inputs(&broker, Exec::Sequential)).unwrap();
        assert_eq!(par, seq);
        let base = par.row("base", "en-es").unwrap().bleu.unwrap();
        let chunk = par.row("chunk", "en-es").unwrap().bleu.unwrap();
        assert!((chunk - 1.0).abs() < 1e-12, "{chunk}");
        assert!(base < chunk, "{base} {chunk}");
        assert!((par.deltas[0].points - delta_points(base, chunk)).abs() < 1e-12);
    }

    #[test]
    fn failures_are_reported_per_row() {
        let en = lang("en");
        let pairs = generate_parallel(&spec(3), 1, en, lang("fr")).unwrap().pairs;
        let broker = Broker::new()
            .with(IdentityEngine::new(EngineDescriptor::new("id", [(en, en)], true, 0)), LatencyModel::Fixed { ms: 0 })
            .unwrap();
        let configs = [
            config("a", Segmentation::Fixed { len: 2 }, EngineChoice::Select),
            config("b", Segmentation::Fixed { len: 2 }, EngineChoice::Engine("missing".into())),
        ];
        let report = compare_engines(&pairs, &configs, &inputs(&broker, Exec::Sequential)).unwrap();
        assert!(report.any_failed());
        assert!(report.rows.iter().all(|r| r.bleu.is_none() && r.error.is_some()));
        assert!(report.deltas.is_empty());
    }

    #[test]
    fn config_errors() {
        let broker = Broker::new();
        let inp = inputs(&broker, Exec::Sequential);
        let pairs = generate_parallel(&spec(2), 1, lang("en"), lang("es")).unwrap().pairs;
        let one = [config("a", Segmentation::Chunk, EngineChoice::Select)];
        assert!(matches!(compare_engines(&pairs, &one, &inp), Err(EvalError::InvalidConfig(_))));
        let dup = [one[0].clone(), one[0].clone()];
        assert!(matches!(compare_engines(&pairs, &dup, &inp), Err(EvalError::InvalidConfig(_))));
        let two = [one[0].clone(), config("b", Segmentation::Sentence, EngineChoice::Select)];
        assert_eq!(compare_engines(&[], &two, &inp), Err(EvalError::EmptyInput));
    }
}
