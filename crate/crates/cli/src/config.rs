//! TOML configuration. Relative paths resolve against the directory of the
//! config file; input files must exist when the config is loaded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use simulpipe::context::{validate_tags, ContextTags};
use simulpipe::corpus::{GeneratorSpec, LengthDist};
use simulpipe::engines::{
    Broker, CipherEngine, DictionaryEngine, DictionaryEntry, EngineDescriptor, IdentityEngine, LatencyModel,
    NoisyEngine, RemoteEngine, TranslationEngine, UnavailableEngine,
};
use simulpipe::eval::{BleuConfig, CompareConfig, Smoothing};
use simulpipe::par::Exec;
use simulpipe::pipeline::Mode;
use simulpipe::segmenter::{SegmenterConfig, SegmenterModel, TrainOptions};
use simulpipe::token::StreamFormat;
use simulpipe::{LanguageCode, SegmentKind};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    /// Fan batch work out over threads.
    pub parallel: bool,
    pub session: SessionSection,
    pub context: ContextSection,
    pub segmenter: SegmenterSection,
    pub engines: Vec<EngineSpec>,
    pub corpus: CorpusSection,
    pub eval: EvalSection,
    pub generator: Option<GeneratorSpec>,
    pub simulate: SimulateSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            parallel: true,
            session: SessionSection::default(),
            context: ContextSection::default(),
            segmenter: SegmenterSection::default(),
            engines: Vec::new(),
            corpus: CorpusSection::default(),
            eval: EvalSection::default(),
            generator: None,
            simulate: SimulateSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClockKind {
    Simulated,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// JSON lines if the first record opens an object, else plain text.
    Auto,
    Jsonl,
    Text,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionSection {
    pub src: String,
    pub tgt: String,
    pub mode: Mode,
    pub clock: ClockKind,
    pub session_id: String,
    pub input_format: InputFormat,
    /// Inter-token gap for plain-text input.
    pub gap_ms: u64,
}

impl Default for SessionSection {
    fn default() -> Self {
        SessionSection {
            src: "en".into(),
            tgt: "ja".into(),
            mode: Mode::Chunked,
            clock: ClockKind::Simulated,
            session_id: "s0".into(),
            input_format: InputFormat::Auto,
            gap_ms: 300,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContextSection {
    pub window_k: usize,
    pub tags: BTreeMap<String, String>,
}

impl Default for ContextSection {
    fn default() -> Self {
        ContextSection {
            window_k: 3,
            tags: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterSection {
    pub chunk_model: Option<PathBuf>,
    pub sentence_model: Option<PathBuf>,
    pub max_delay: usize,
    pub threshold: f64,
    pub feature_window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub candidates: Vec<usize>,
}

impl Default for SegmenterSection {
    fn default() -> Self {
        let opts = TrainOptions::default();
        let cfg = SegmenterConfig::new(SegmentKind::Chunk, 1);
        SegmenterSection {
            chunk_model: None,
            sentence_model: None,
            max_delay: cfg.max_delay,
            threshold: cfg.threshold,
            feature_window: cfg.feature_window,
            epochs: opts.epochs,
            learning_rate: opts.learning_rate,
            l2: opts.l2,
            candidates: vec![0, 1, 2, 3],
        }
    }
}

impl SegmenterSection {
    pub fn config(&self, level: SegmentKind, max_delay: usize) -> SegmenterConfig {
        SegmenterConfig {
            level,
            max_delay,
            threshold: self.threshold,
            feature_window: self.feature_window,
        }
    }

    pub fn model_path(&self, level: SegmentKind) -> Option<&Path> {
        match level {
            SegmentKind::Chunk => self.chunk_model.as_deref(),
            SegmentKind::Sentence => self.sentence_model.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Identity,
    Cipher,
    Dictionary,
    Noisy,
    Unavailable,
    Remote,
}

/// One roster entry. Kind-specific keys are rejected on other kinds.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    pub id: String,
    pub kind: EngineKind,
    #[serde(default)]
    pub priority: u32,
    /// `[src, tgt]` code pairs.
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "yes")]
    pub reverse: bool,
    #[serde(default)]
    pub latency: LatencyModel,
    /// Dictionary table (`src<TAB>tgt[<TAB>back]`); also the inner table of a noisy engine.
    pub table: Option<PathBuf>,
    /// Noisy engines: per-token drop probability.
    pub dropout: Option<f64>,
    /// Noisy engines: hash seed.
    pub noise_seed: Option<u64>,
    pub url: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_connections: Option<usize>,
}

fn yes() -> bool {
    true
}

impl EngineSpec {
    fn check(&self) -> Result<()> {
        let ctx = || format!("engine `{}`", self.id);
        if self.pairs.is_empty() {
            bail!("{}: no language pairs", ctx());
        }
        for [s, t] in &self.pairs {
            lang(s).with_context(ctx)?;
            lang(t).with_context(ctx)?;
        }
        let given = |name: &str, present: bool| -> Result<()> {
            if present {
                bail!("{}: `{name}` does not apply to {:?} engines", ctx(), self.kind);
            }
            Ok(())
        };
        let remote = self.kind == EngineKind::Remote;
        let noisy = self.kind == EngineKind::Noisy;
        given("url", !remote && self.url.is_some())?;
        given("timeout_ms", !remote && self.timeout_ms.is_some())?;
        given("max_connections", !remote && self.max_connections.is_some())?;
        given("dropout", !noisy && self.dropout.is_some())?;
        given("noise_seed", !noisy && self.noise_seed.is_some())?;
        given("table", !matches!(self.kind, EngineKind::Dictionary | EngineKind::Noisy) && self.table.is_some())?;
        match self.kind {
            EngineKind::Remote if self.url.is_none() => bail!("{}: remote engines need `url`", ctx()),
            EngineKind::Dictionary if self.table.is_none() => bail!("{}: dictionary engines need `table`", ctx()),
            EngineKind::Dictionary | EngineKind::Noisy if self.table.is_some() && self.pairs.len() != 1 => {
                bail!("{}: a dictionary table serves exactly one pair", ctx())
            }
            EngineKind::Noisy if !self.dropout.is_some_and(|d| (0.0..=1.0).contains(&d)) => {
                bail!("{}: noisy engines need `dropout` in [0,1]", ctx())
            }
            _ => Ok(()),
        }
    }

    fn descriptor(&self) -> Result<EngineDescriptor> {
        let pairs = self
            .pairs
            .iter()
            .map(|[s, t]| Ok((lang(s)?, lang(t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(EngineDescriptor::new(&self.id, pairs, self.reverse, self.priority))
    }

    fn dictionary(&self, d: &EngineDescriptor, path: &Path) -> Result<DictionaryEngine> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let entries = DictionaryEntry::parse_table(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let (src, tgt) = *d.supports.iter().next().expect("checked non-empty");
        Ok(DictionaryEngine::new(&self.id, src, tgt, &entries, self.reverse, self.priority))
    }

    pub fn build(&self) -> Result<Arc<dyn TranslationEngine>> {
        let d = self.descriptor()?;
        Ok(match self.kind {
            EngineKind::Identity => Arc::new(IdentityEngine::new(d)),
            EngineKind::Cipher => Arc::new(CipherEngine::new(d)),
            EngineKind::Unavailable => Arc::new(UnavailableEngine::new(d)),
            EngineKind::Dictionary => Arc::new(self.dictionary(&d, self.table.as_deref().expect("checked"))?),
            EngineKind::Noisy => {
                let inner: Box<dyn TranslationEngine> = match &self.table {
                    Some(path) => Box::new(self.dictionary(&d, path)?),
                    None => Box::new(IdentityEngine::new(d.clone())),
                };
                Arc::new(NoisyEngine::new(d, inner, self.dropout.unwrap_or(0.0), self.noise_seed.unwrap_or(0)))
            }
            EngineKind::Remote => Arc::new(RemoteEngine::new(
                d,
                self.url.clone().expect("checked"),
                Duration::from_millis(self.timeout_ms.unwrap_or(5_000)),
                self.max_connections.unwrap_or(4),
            )),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    /// Chunk-aligned TSV used for training and tuning.
    pub path: Option<PathBuf>,
    /// Explicit development set; otherwise `split` carves one out of `path`.
    pub dev: Option<PathBuf>,
    /// Test set for `eval compare`.
    pub test: Option<PathBuf>,
    pub split: [f64; 3],
    /// Utterances concatenated into one training stream.
    pub concat: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            path: None,
            dev: None,
            test: None,
            split: [0.8, 0.1, 0.1],
            concat: 3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub max_n: usize,
    pub smoothing: Smoothing,
    /// Test pairs concatenated into one compare input.
    pub concat: usize,
    pub compare: Vec<CompareConfig>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            max_n: 4,
            smoothing: Smoothing::None,
            concat: 3,
            compare: Vec::new(),
        }
    }
}

impl EvalSection {
    pub fn bleu(&self) -> BleuConfig {
        BleuConfig {
            max_n: self.max_n,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub streams: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { streams: 100 }
    }
}

pub fn lang(code: &str) -> Result<LanguageCode> {
    LanguageCode::parse(code).map_err(|e| anyhow::anyhow!("{e}"))
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn must_exist(p: &Option<PathBuf>, what: &str) -> Result<()> {
    match p {
        Some(path) if !path.is_file() => bail!("{what} {} not found", path.display()),
        _ => Ok(()),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("config {}: {}", path.display(), e.message()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Config> {
        match path {
            Some(p) => Config::load(p),
            None => {
                let cfg = Config::default();
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.segmenter.chunk_model);
        resolve(base, &mut self.segmenter.sentence_model);
        resolve(base, &mut self.corpus.path);
        resolve(base, &mut self.corpus.dev);
        resolve(base, &mut self.corpus.test);
        for e in &mut self.engines {
            resolve(base, &mut e.table);
        }
    }

    /// Model paths are outputs of `train`, so they are checked when read.
    pub fn validate(&self) -> Result<()> {
        self.src()?;
        self.tgt()?;
        self.tags()?;
        let mut ids: Vec<&str> = self.engines.iter().map(|e| e.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            bail!("duplicate engine id `{}`", w[0]);
        }
        for e in &self.engines {
            e.check()?;
            must_exist(&e.table, &format!("engine `{}` table", e.id))?;
        }
        must_exist(&self.corpus.path, "corpus")?;
        must_exist(&self.corpus.dev, "dev corpus")?;
        must_exist(&self.corpus.test, "test corpus")?;
        if let Some(g) = &self.generator {
            g.validate().map_err(|e| anyhow::anyhow!("generator: {e}"))?;
        }
        Ok(())
    }

    pub fn src(&self) -> Result<LanguageCode> {
        lang(&self.session.src).context("session.src")
    }

    pub fn tgt(&self) -> Result<LanguageCode> {
        lang(&self.session.tgt).context("session.tgt")
    }

    pub fn tags(&self) -> Result<ContextTags> {
        validate_tags(&self.context.tags, self.src()?, self.tgt()?).map_err(|e| anyhow::anyhow!("context.tags: {e}"))
    }

    pub fn exec(&self) -> Exec {
        if self.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.segmenter.epochs,
            seed: self.seed,
            learning_rate: self.segmenter.learning_rate,
            l2: self.segmenter.l2,
            exec: self.exec(),
        }
    }

    pub fn stream_format(&self, first_line: &str) -> StreamFormat {
        match self.session.input_format {
            InputFormat::Jsonl => StreamFormat::JsonLines,
            InputFormat::Text => StreamFormat::PlainText {
                gap_ms: self.session.gap_ms,
            },
            InputFormat::Auto => simulpipe::token::detect_format(first_line, self.session.gap_ms),
        }
    }

    /// The configured generator, or a marker language with 2-6 token
    /// chunks and 2-4 chunks per sentence.
    pub fn generator(&self) -> GeneratorSpec {
        self.generator.clone().unwrap_or_else(|| {
            GeneratorSpec::marker(
                1000,
                LengthDist::Uniform { min: 2, max: 6 },
                LengthDist::Uniform { min: 2, max: 4 },
            )
        })
    }

    pub fn broker(&self) -> Result<Broker> {
        let mut broker = Broker::new().with_exec(self.exec());
        for e in &self.engines {
            broker
                .add(e.build()?, e.latency)
                .map_err(|err| anyhow::anyhow!("engine `{}`: {err}", e.id))?;
        }
        Ok(broker)
    }
}

pub fn load_model(path: &Path, level: SegmentKind) -> Result<Arc<SegmenterModel>> {
    let model = SegmenterModel::load(path).map_err(|e| anyhow::anyhow!("{level} model: {e}"))?;
    if model.config.level != level {
        bail!(
            "{} holds a {} model, expected {level}",
            path.display(),
            model.config.level
        );
    }
    Ok(Arc::new(model))
}
