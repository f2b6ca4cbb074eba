//! End-to-end runs: corpus → vocabulary → pseudo-bilingual documents →
//! training → model file plus run manifest, and seed sweeps on top of that.
//! A run may also start from already shuffled pseudo-documents (`pseudo=`
//! instead of `corpus=`).
//!
//! Run configuration is a flat `key=value` file whose keys mirror the CLI
//! flags:
//!
//! ```text
//! corpus = data/es-en.tsv
//! strategy = ratio
//! dim = 300
//! window = 48
//! out = model.vec
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::context::{ContextMethod, ContextScorerConfig};
use crate::corpus::{
    build_vocabulary, filter_corpus, load_corpus, AlignedCorpus, CorpusFormat, LangTag, Vocabulary,
};
use crate::error::{Error, Result};
use crate::eval::{ble_evaluate, load_swtc, swtc_evaluate, BleTestSet, SwtcInstance};
use crate::fsutil;
use crate::shuffle::{parse_pseudo_docs, shuffle_corpus, PseudoBilingualDocument, ShuffleSeed, ShuffleStrategy};
use crate::space::EmbeddingSpace;
use crate::trainer::{self, TrainingConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineInput {
    /// Aligned corpus, shuffled as part of the run.
    Corpus(PathBuf),
    /// Pseudo-bilingual documents, one per line.
    Pseudo(PathBuf),
}

impl PipelineInput {
    pub fn path(&self) -> &Path {
        match self {
            PipelineInput::Corpus(p) | PipelineInput::Pseudo(p) => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub input: PipelineInput,
    pub format: CorpusFormat,
    pub source_lang: Option<String>,
    pub strategy: ShuffleStrategy,
    /// Seeds both the shuffle and the trainer.
    pub seed: u64,
    pub min_count: u64,
    pub training: TrainingConfig,
    pub out: Option<PathBuf>,
    pub sweep: SweepSettings,
}

/// Extra keys read by `sweep`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSettings {
    pub seeds: Vec<u64>,
    pub ble_test: Option<PathBuf>,
    pub swtc_test: Option<PathBuf>,
    pub method: Option<ContextMethod>,
    pub lambda: Option<f64>,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        Self::with_input(PipelineInput::Corpus(corpus.into()))
    }

    pub fn from_pseudo(path: impl Into<PathBuf>) -> Self {
        Self::with_input(PipelineInput::Pseudo(path.into()))
    }

    fn with_input(input: PipelineInput) -> Self {
        PipelineConfig {
            input,
            format: CorpusFormat::DapcTsv,
            source_lang: None,
            strategy: ShuffleStrategy::LengthRatio,
            seed: 1,
            min_count: 5,
            training: TrainingConfig::default(),
            out: None,
            sweep: SweepSettings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got {line:?}")))?;
            if values.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate key {:?}", key.trim())));
            }
        }
        Self::from_map(&values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fsutil::read_to_string(path)?)
    }

    pub fn from_map(values: &BTreeMap<String, String>) -> Result<Self> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
        }
        let mut cfg = match (values.get("corpus"), values.get("pseudo")) {
            (Some(corpus), None) => PipelineConfig::new(corpus),
            (None, Some(pseudo)) => PipelineConfig::from_pseudo(pseudo),
            _ => return Err(Error::Config("exactly one of `corpus` or `pseudo` is required".into())),
        };
        let t = &mut cfg.training;
        for (key, v) in values {
            match key.as_str() {
                "corpus" | "pseudo" => {}
                "format" => cfg.format = v.parse()?,
                "source-lang" => cfg.source_lang = Some(v.clone()),
                "strategy" => cfg.strategy = v.parse()?,
                "seed" => cfg.seed = num(key, v)?,
                "min-count" => cfg.min_count = num(key, v)?,
                "dim" => t.dim = num(key, v)?,
                "window" => t.window = num(key, v)?,
                "negatives" => t.negatives = num(key, v)?,
                "epochs" => t.epochs = num(key, v)?,
                "lr" => t.lr0 = num(key, v)?,
                "lr-min" => t.lr_min = Some(num(key, v)?),
                "subsample" => t.subsample = num(key, v)?,
                "unigram-power" => t.unigram_power = num(key, v)?,
                "workers" => t.workers = num(key, v)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                "seeds" => {
                    cfg.sweep.seeds = v
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| num(key, s.trim()))
                        .collect::<Result<_>>()?
                }
                "test-ble" => cfg.sweep.ble_test = Some(PathBuf::from(v)),
                "test-swtc" => cfg.sweep.swtc_test = Some(PathBuf::from(v)),
                "method" => cfg.sweep.method = Some(v.parse()?),
                "lambda" => cfg.sweep.lambda = Some(num(key, v)?),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.training.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let t = &self.training;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match &self.input {
            PipelineInput::Corpus(p) => put("corpus", p.display().to_string()),
            PipelineInput::Pseudo(p) => put("pseudo", p.display().to_string()),
        }
        put("format", "dapc-tsv".into());
        if let Some(lang) = &self.source_lang {
            put("source-lang", lang.clone());
        }
        put("strategy", self.strategy.to_string());
        put("seed", self.seed.to_string());
        put("min-count", self.min_count.to_string());
        put("dim", t.dim.to_string());
        put("window", t.window.to_string());
        put("negatives", t.negatives.to_string());
        put("epochs", t.epochs.to_string());
        put("lr", t.lr0.to_string());
        if let Some(lr_min) = t.lr_min {
            put("lr-min", lr_min.to_string());
        }
        put("subsample", t.subsample.to_string());
        put("unigram-power", t.unigram_power.to_string());
        put("workers", t.workers.to_string());
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        let s = &self.sweep;
        if !s.seeds.is_empty() {
            put("seeds", s.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        }
        if let Some(p) = &s.ble_test {
            put("test-ble", p.display().to_string());
        }
        if let Some(p) = &s.swtc_test {
            put("test-swtc", p.display().to_string());
        }
        if let Some(method) = s.method {
            put("method", method.to_string());
        }
        if let Some(lambda) = s.lambda {
            put("lambda", lambda.to_string());
        }
        m
    }

    pub fn to_text(&self) -> String {
        self.to_map().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut t = self.training.clone();
        t.seed = self.seed;
        t.validate()?;
        if self.min_count == 0 {
            return Err(Error::Config("min-count must be at least 1".into()));
        }
        if let Some(lambda) = self.sweep.lambda {
            ContextScorerConfig::interpolated(lambda).validate()?;
        }
        Ok(())
    }

    fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            seed: self.seed,
            ..self.training.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub vocabulary_size: usize,
    pub documents: usize,
    pub skipped_pairs: usize,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&fsutil::read_to_string(path)?)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// The configuration recorded in the manifest, after checking that the
    /// recorded inputs are unchanged.
    pub fn replay_config(&self) -> Result<PipelineConfig> {
        for input in &self.inputs {
            let digest = sha256_file(Path::new(&input.path))?;
            if digest != input.sha256 {
                return Err(Error::Config(format!(
                    "input {} changed since the manifest was written",
                    input.path
                )));
            }
        }
        PipelineConfig::from_map(&self.config)
    }
}

pub fn manifest_path(model: &Path) -> PathBuf {
    let mut name = model.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    model.with_file_name(name)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub space: EmbeddingSpace,
    pub documents: usize,
    pub skipped_pairs: usize,
    pub timings_ms: BTreeMap<String, f64>,
}

struct Clock(BTreeMap<String, f64>, Instant);

impl Clock {
    fn start() -> Self {
        Clock(BTreeMap::new(), Instant::now())
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        self.0.insert(phase.to_string(), (now - self.1).as_secs_f64() * 1e3);
        self.1 = now;
    }
}

/// Builds the vocabulary from pseudo-documents, drops rare tokens and then
/// empty documents, and trains.
pub fn train_pseudo(
    docs: &[PseudoBilingualDocument],
    min_count: u64,
    training: &TrainingConfig,
) -> Result<TrainedModel> {
    let mut clock = Clock::start();
    let vocab = Vocabulary::from_tokens(docs.iter().flat_map(|d| &d.tokens), min_count)?;
    let kept: Vec<PseudoBilingualDocument> = docs
        .iter()
        .map(|d| PseudoBilingualDocument {
            tokens: d.tokens.iter().filter(|t| vocab.contains(t)).cloned().collect(),
            ..d.clone()
        })
        .filter(|d| !d.is_empty())
        .collect();
    clock.lap("vocabulary");
    let space = trainer::train(&kept, &vocab, training)?;
    clock.lap("train");
    Ok(TrainedModel {
        space,
        documents: kept.len(),
        skipped_pairs: docs.len() - kept.len(),
        timings_ms: clock.0,
    })
}

/// Vocabulary filtering, pseudo-document construction and training on an
/// already loaded corpus.
pub fn train_corpus(
    corpus: &AlignedCorpus,
    strategy: ShuffleStrategy,
    seed: u64,
    min_count: u64,
    training: &TrainingConfig,
) -> Result<TrainedModel> {
    let mut clock = Clock::start();
    let vocab = build_vocabulary(corpus, min_count)?;
    let filtered = filter_corpus(corpus, &vocab);
    clock.lap("vocabulary");
    let shuffled = shuffle_corpus(&filtered, strategy, ShuffleSeed(seed));
    clock.lap("shuffle");
    let cfg = TrainingConfig {
        seed,
        ..training.clone()
    };
    let space = trainer::train(&shuffled.docs, &vocab, &cfg)?;
    clock.lap("train");
    Ok(TrainedModel {
        space,
        documents: shuffled.docs.len(),
        skipped_pairs: shuffled.skipped,
        timings_ms: clock.0,
    })
}

fn load_configured_corpus(cfg: &PipelineConfig) -> Result<AlignedCorpus> {
    let PipelineInput::Corpus(path) = &cfg.input else {
        return Err(Error::Config("this command needs an aligned corpus, not pseudo-documents".into()));
    };
    let corpus = load_corpus(path, cfg.format)?;
    match &cfg.source_lang {
        Some(lang) => corpus.with_source(&LangTag::new(lang)?),
        None => Ok(corpus),
    }
}

/// Loads, trains and writes the model and its manifest. Both files are
/// written atomically.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(TrainedModel, RunManifest)> {
    cfg.validate()?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("missing key `out`".into()))?;
    let started = Instant::now();
    let mut model = match &cfg.input {
        PipelineInput::Corpus(_) => {
            let corpus = load_configured_corpus(cfg)?;
            let load_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut model =
                train_corpus(&corpus, cfg.strategy, cfg.seed, cfg.min_count, &cfg.training_config())?;
            model.timings_ms.insert("load".into(), load_ms);
            model
        }
        PipelineInput::Pseudo(path) => {
            let docs = parse_pseudo_docs(&fsutil::read_to_string(path)?)?;
            let load_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut model = train_pseudo(&docs, cfg.min_count, &cfg.training_config())?;
            model.timings_ms.insert("load".into(), load_ms);
            model
        }
    };

    let write_start = Instant::now();
    model.space.save(&out)?;
    model
        .timings_ms
        .insert("write".into(), write_start.elapsed().as_secs_f64() * 1e3);

    let manifest = RunManifest {
        tool: "bwesg".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.to_map(),
        inputs: vec![InputDigest {
            path: cfg.input.path().display().to_string(),
            sha256: sha256_file(cfg.input.path())?,
        }],
        vocabulary_size: model.space.len(),
        documents: model.documents,
        skipped_pairs: model.skipped_pairs,
        timings_ms: model.timings_ms.clone(),
    };
    fsutil::write_atomic(&manifest_path(&out), manifest.to_json().as_bytes())?;
    Ok((model, manifest))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<(u64, f64)>,
}

impl SweepReport {
    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn avg(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum::<f64>() / self.rows.len() as f64
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed\tacc1")?;
        for (seed, acc) in &self.rows {
            writeln!(f, "{seed}\t{acc:.4}")?;
        }
        writeln!(f, "MIN\t{:.4}", self.min())?;
        writeln!(f, "AVG\t{:.4}", self.avg())?;
        writeln!(f, "MAX\t{:.4}", self.max())
    }
}

pub enum SweepTest {
    Ble(BleTestSet),
    Swtc(Vec<SwtcInstance>, ContextScorerConfig),
}

impl SweepTest {
    fn score(&self, space: &EmbeddingSpace) -> Result<f64> {
        Ok(match self {
            SweepTest::Ble(test) => ble_evaluate(space, test)?.acc1,
            SweepTest::Swtc(instances, cfg) => swtc_evaluate(space, instances, cfg)?.acc1,
        })
    }
}

/// One merge-and-shuffle run plus evaluation per seed.
pub fn sweep_corpus(
    corpus: &AlignedCorpus,
    min_count: u64,
    training: &TrainingConfig,
    seeds: &[u64],
    test: &SweepTest,
) -> Result<SweepReport> {
    if seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one seed".into()));
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let model = train_corpus(corpus, ShuffleStrategy::MergeShuffle, seed, min_count, training)?;
        rows.push((seed, test.score(&model.space)?));
    }
    Ok(SweepReport { rows })
}

pub fn sweep(cfg: &PipelineConfig) -> Result<SweepReport> {
    cfg.validate()?;
    if cfg.strategy != ShuffleStrategy::MergeShuffle {
        return Err(Error::Config(format!(
            "sweep varies the shuffle seed and needs strategy=merge, not {}",
            cfg.strategy
        )));
    }
    let test = match (&cfg.sweep.ble_test, &cfg.sweep.swtc_test) {
        (Some(path), None) => SweepTest::Ble(BleTestSet::load(path)?),
        (None, Some(path)) => SweepTest::Swtc(
            load_swtc(path)?,
            ContextScorerConfig {
                method: cfg.sweep.method.unwrap_or(ContextMethod::InterpolatedAdd),
                lambda: cfg.sweep.lambda.unwrap_or(1.0),
            },
        ),
        _ => return Err(Error::Config("sweep needs exactly one of test-ble or test-swtc".into())),
    };
    let seeds = if cfg.sweep.seeds.is_empty() {
        vec![cfg.seed]
    } else {
        cfg.sweep.seeds.clone()
    };
    let corpus = load_configured_corpus(cfg)?;
    sweep_corpus(&corpus, cfg.min_count, &cfg.training_config(), &seeds, &test)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "d1\ten\tdog cat dog sun\nd1\tes\tperro gato perro\n\
                       d2\ten\tcat sun moon\nd2\tes\tgato sol luna sol\n\
                       d3\ten\tdog moon sun\nd3\tes\tperro luna sol\n";

    fn toy_config(dir: &Path) -> PipelineConfig {
        let corpus = dir.join("toy.tsv");
        std::fs::write(&corpus, TOY).unwrap();
        let mut cfg = PipelineConfig::new(corpus);
        cfg.min_count = 1;
        cfg.training = TrainingConfig {
            dim: 6,
            window: 2,
            negatives: 2,
            epochs: 2,
            ..Default::default()
        };
        cfg.out = Some(dir.join("model.vec"));
        cfg
    }

    #[test]
    fn config_text_round_trip() {
        let text = "# comment\ncorpus = c.tsv\nstrategy = merge\nseed = 7\ndim = 40\nwindow = 16\n\
                    lr = 0.05\nseeds = 1,2,3\ntest-ble = ble.tsv\nout = m.vec\n";
        let cfg = PipelineConfig::parse(text).unwrap();
        assert_eq!(cfg.strategy, ShuffleStrategy::MergeShuffle);
        assert_eq!(cfg.training.dim, 40);
        assert_eq!(cfg.training.seed, 7);
        assert_eq!(cfg.sweep.seeds, [1, 2, 3]);
        assert_eq!(PipelineConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(PipelineConfig::parse("strategy=merge\n"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("corpus=x\nbogus=1\n"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("corpus=x\ndim=abc\n"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("corpus=x\nnot a pair\n"), Err(Error::Parse { line: 2, .. })));
        let cfg = PipelineConfig::parse("corpus=x\nwindow=0\nout=m.vec\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn window_zero_fails_before_touching_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = toy_config(dir.path());
        cfg.training.window = 0;
        cfg.input = PipelineInput::Corpus(dir.path().join("does-not-exist.tsv"));
        assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
        assert!(!dir.path().join("model.vec").exists());
    }

    #[test]
    fn toy_run_writes_model_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(dir.path());
        let (model, manifest) = run_pipeline(&cfg).unwrap();
        let corpus = AlignedCorpus::parse(TOY).unwrap();
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(model.space.len(), vocab.len());
        assert_eq!(model.space.dim(), 6);

        let loaded = EmbeddingSpace::load(&dir.path().join("model.vec")).unwrap();
        assert_eq!(loaded.len(), vocab.len());
        let on_disk = RunManifest::load(&manifest_path(&dir.path().join("model.vec"))).unwrap();
        assert_eq!(on_disk, manifest);
        assert_eq!(on_disk.inputs[0].sha256, sha256_file(cfg.input.path()).unwrap());
        assert_eq!(on_disk.replay_config().unwrap(), cfg);
    }

    #[test]
    fn replay_detects_changed_input() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(dir.path());
        let (_, manifest) = run_pipeline(&cfg).unwrap();
        std::fs::write(cfg.input.path(), TOY.replace("moon", "star")).unwrap();
        assert!(matches!(manifest.replay_config(), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_requires_merge_and_a_test() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = toy_config(dir.path());
        assert!(matches!(sweep(&cfg), Err(Error::Config(_))));
        cfg.strategy = ShuffleStrategy::MergeShuffle;
        assert!(matches!(sweep(&cfg), Err(Error::Config(_))));
        let ble = dir.path().join("ble.tsv");
        std::fs::write(&ble, "es:perro\ten:dog\nes:gato\ten:cat\n").unwrap();
        cfg.sweep.ble_test = Some(ble);
        cfg.sweep.seeds = vec![4];
        let report = sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.min(), report.max());
        assert_eq!(report.min(), report.avg());
    }

    #[test]
    fn pseudo_input_drops_rare_tokens_and_empty_documents() {
        let dir = tempfile::tempdir().unwrap();
        let pseudo = dir.path().join("pseudo.txt");
        std::fs::write(&pseudo, "en:a es:b en:a es:b\nen:rare\nes:b en:a\n").unwrap();
        let mut cfg = PipelineConfig::from_pseudo(&pseudo);
        cfg.min_count = 2;
        cfg.training = TrainingConfig { dim: 4, window: 2, negatives: 1, epochs: 1, ..Default::default() };
        cfg.out = Some(dir.path().join("m.vec"));
        let (model, manifest) = run_pipeline(&cfg).unwrap();
        assert_eq!(model.space.len(), 2);
        assert_eq!(model.documents, 2);
        assert_eq!(model.skipped_pairs, 1);
        assert_eq!(manifest.config.get("pseudo").map(String::as_str), Some(pseudo.to_str().unwrap()));
        assert_eq!(manifest.replay_config().unwrap(), cfg);
        assert!(matches!(sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_summary_order_statistics() {
        let r = SweepReport { rows: vec![(1, 0.5), (2, 0.7), (3, 0.6)] };
        assert_eq!(r.min(), 0.5);
        assert_eq!(r.max(), 0.7);
        assert!((r.avg() - 0.6).abs() < 1e-12);
        let text = r.to_string();
        assert!(text.contains("AVG\t0.6000"));
    }
}
