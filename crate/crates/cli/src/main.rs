use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bwesg_core::eval::{load_swtc, parse_bits};
use bwesg_core::pipeline::{manifest_path, RunManifest};
use bwesg_core::shuffle::write_pseudo_docs;
use bwesg_core::{
    ble_evaluate, build_vocabulary, filter_corpus, load_corpus, mcnemar, no_context_baseline,
    rank_candidates, ranked_list, run_pipeline, shuffle_corpus, sweep, swtc_evaluate, write_atomic,
    BleTestSet, ContextMethod, ContextScorerConfig, CorpusFormat, EmbeddingSpace, EvalResult,
    LangTag, PipelineConfig, QueryMode, ShuffleSeed, ShuffleStrategy, Token, TrainingConfig,
};

/// Bilingual word embeddings from document-aligned comparable corpora.
#[derive(Parser)]
#[command(name = "bwesg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build pseudo-bilingual documents from an aligned corpus.
    Shuffle(ShuffleArgs),
    /// Train embeddings on pseudo-bilingual documents.
    Train(TrainArgs),
    /// Run shuffle and training from a config file, or replay a manifest.
    Run(RunArgs),
    /// Print the nearest neighbours of a word.
    Nn(NnArgs),
    /// Bilingual lexicon extraction accuracy.
    Ble(BleArgs),
    /// Word translation in context accuracy.
    Swtc(SwtcArgs),
    /// Print per-instance candidate rankings.
    SwtcScore(SwtcScoreArgs),
    /// Train and evaluate once per shuffle seed.
    Sweep(SweepArgs),
    /// Write the model with language tags in their own column.
    Export(ExportArgs),
}

#[derive(Args)]
struct ShuffleArgs {
    #[arg(long, default_value = "ratio")]
    strategy: ShuffleStrategy,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long, default_value = "dapc-tsv")]
    format: CorpusFormat,
    /// Language to treat as the source side (default: first record's).
    #[arg(long)]
    source_lang: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 48)]
    window: usize,
    #[arg(long, default_value_t = 25)]
    negatives: usize,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long)]
    lr_min: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    subsample: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct NnArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value = "cross")]
    mode: QueryMode,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct BleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    bits: BitsArgs,
}

#[derive(Args)]
struct BitsArgs {
    /// McNemar test against a saved per-item bit file.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Save this run's per-item bits.
    #[arg(long)]
    bits_out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Baseline {
    NoContext,
}

#[derive(Args)]
struct SwtcArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "interp")]
    method: ContextMethod,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Score the context-free baseline instead.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    #[command(flatten)]
    bits: BitsArgs,
}

#[derive(Args)]
struct SwtcScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "interp")]
    method: ContextMethod,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, overriding the config's `seeds`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Also write the table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("bwesg: error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Shuffle(a) => shuffle(a),
        Command::Train(a) => train(a),
        Command::Run(a) => run_config(a),
        Command::Nn(a) => nn(a),
        Command::Ble(a) => ble(a),
        Command::Swtc(a) => swtc(a),
        Command::SwtcScore(a) => swtc_score(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Export(a) => export(a),
    }
}

fn load_model(path: &Path) -> Result<EmbeddingSpace> {
    EmbeddingSpace::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn shuffle(a: ShuffleArgs) -> Result<()> {
    let mut corpus = load_corpus(&a.input, a.format)?;
    if let Some(lang) = &a.source_lang {
        corpus = corpus.with_source(&LangTag::new(lang)?)?;
    }
    let vocab = build_vocabulary(&corpus, a.min_count)?;
    let shuffled = shuffle_corpus(&filter_corpus(&corpus, &vocab), a.strategy, ShuffleSeed(a.seed));
    write_atomic(&a.out, write_pseudo_docs(&shuffled.docs).as_bytes())?;
    if shuffled.skipped > 0 {
        eprintln!("skipped {} pairs with an empty side after filtering", shuffled.skipped);
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = PipelineConfig::from_pseudo(a.input);
    cfg.seed = a.seed;
    cfg.min_count = a.min_count;
    cfg.training = TrainingConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        subsample: a.subsample,
        epochs: a.epochs,
        lr0: a.lr,
        lr_min: a.lr_min,
        seed: a.seed,
        workers: a.workers,
        ..TrainingConfig::default()
    };
    cfg.out = Some(a.out);
    report_run(&cfg)
}

fn report_run(cfg: &PipelineConfig) -> Result<()> {
    let (model, _) = run_pipeline(cfg)?;
    let out = cfg.out.as_deref().expect("validated by run_pipeline");
    eprintln!(
        "wrote {} ({} words, d={}) and {}",
        out.display(),
        model.space.len(),
        model.space.dim(),
        manifest_path(out).display()
    );
    Ok(())
}

fn run_config(a: RunArgs) -> Result<()> {
    let cfg = match (a.config, a.manifest) {
        (Some(path), _) => PipelineConfig::load(&path)?,
        (None, Some(path)) => RunManifest::load(&path)?.replay_config()?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    report_run(&cfg)
}

fn nn(a: NnArgs) -> Result<()> {
    let space = load_model(&a.model)?;
    let query = Token::parse(&a.query)?;
    print!("{}", ranked_list(&space, &query, a.mode, a.top)?);
    Ok(())
}

fn print_result(name: &str, r: &EvalResult) {
    let correct = r.correct.iter().filter(|&&c| c).count();
    println!("{name}\tacc1\t{:.4}\t{correct}/{}", r.acc1, r.len());
    println!("{name}\tcoverage\t{:.4}", r.coverage);
}

fn handle_bits(r: &EvalResult, bits: &BitsArgs) -> Result<()> {
    if let Some(path) = &bits.bits_out {
        write_atomic(path, r.bits_text().as_bytes())?;
    }
    if let Some(path) = &bits.compare {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let other = parse_bits(&text)?;
        let m = mcnemar(&r.correct, &other)?;
        println!(
            "mcnemar\tb10={}\tb01={}\tchi2={:.4}\t{}",
            m.b10,
            m.b01,
            m.chi2,
            if m.significant { "significant at p<0.05" } else { "not significant" }
        );
    }
    Ok(())
}

fn ble(a: BleArgs) -> Result<()> {
    let space = load_model(&a.model)?;
    let test = BleTestSet::load(&a.test)?;
    let r = ble_evaluate(&space, &test)?;
    print_result("ble", &r);
    handle_bits(&r, &a.bits)
}

fn swtc(a: SwtcArgs) -> Result<()> {
    let space = load_model(&a.model)?;
    let instances = load_swtc(&a.test)?;
    let (name, r) = match a.baseline {
        Some(Baseline::NoContext) => ("no-context".to_string(), no_context_baseline(&space, &instances)?),
        None => {
            let cfg = ContextScorerConfig { method: a.method, lambda: a.lambda };
            (a.method.to_string(), swtc_evaluate(&space, &instances, &cfg)?)
        }
    };
    print_result(&name, &r);
    let oov: usize = instances.iter().map(|inst| inst.bag().oov_count(&space)).sum();
    println!("{name}\toov-context-words\t{oov}");
    handle_bits(&r, &a.bits)
}

fn swtc_score(a: SwtcScoreArgs) -> Result<()> {
    let space = load_model(&a.model)?;
    let instances = load_swtc(&a.input)?;
    let cfg = ContextScorerConfig { method: a.method, lambda: a.lambda };
    cfg.validate()?;
    for (i, inst) in instances.iter().enumerate() {
        match rank_candidates(&space, &inst.pivot, &inst.bag(), &inst.candidates, &cfg) {
            Ok(ranked) => {
                let cells: Vec<String> = ranked.iter().map(|(t, s)| format!("{t}:{s:.6}")).collect();
                println!("{}\t{}\t{}\t{}", i + 1, inst.pivot, inst.gold, cells.join(" "));
            }
            Err(e) => println!("{}\t{}\t{}\tunscored: {e}", i + 1, inst.pivot, inst.gold),
        }
    }
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if !a.seeds.is_empty() {
        cfg.sweep.seeds = a.seeds;
    }
    let table = sweep(&cfg)?.to_string();
    print!("{table}");
    if let Some(out) = &a.out {
        write_atomic(out, table.as_bytes())?;
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let space = load_model(&a.model)?;
    if a.out == a.model {
        bail!("refusing to overwrite the input model");
    }
    write_atomic(&a.out, space.to_export_text().as_bytes())?;
    Ok(())
}
