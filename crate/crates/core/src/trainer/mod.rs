//! Skip-gram with negative sampling over pseudo-bilingual documents.
//!
//! Documents are encoded to vocabulary indices once, then processed for
//! `epochs` passes. Each (epoch, document) gets its own ChaCha8 stream derived
//! from the run seed, so the random choices made for a document do not depend
//! on how documents are spread across workers. With `workers > 1` threads
//! update the shared matrices without locking and the result is no longer
//! bit-reproducible.

mod config;
mod sampling;
mod sgd;

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::TrainingConfig;
pub use sampling::{
    encode_document, exact_sigmoid, for_each_window, generate_pairs, keep_probability,
    pair_probability, subsample, NegativeTable, PairLabel, Sigmoid, Subsampler, TrainingPair,
    NEGATIVE_TABLE_SIZE, SIGMOID_BINS, SIGMOID_BOUND,
};
pub use sgd::{ModelParams, Scratch};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::shuffle::PseudoBilingualDocument;
use crate::space::EmbeddingSpace;

pub struct Trainer<'a> {
    vocab: &'a Vocabulary,
    cfg: TrainingConfig,
    negatives: NegativeTable,
    subsampler: Subsampler,
    sigmoid: Sigmoid,
}

impl<'a> Trainer<'a> {
    pub fn new(vocab: &'a Vocabulary, cfg: TrainingConfig) -> Result<Self> {
        cfg.validate()?;
        if vocab.is_empty() {
            return Err(Error::Config("empty vocabulary".into()));
        }
        Ok(Trainer {
            negatives: NegativeTable::new(vocab, cfg.unigram_power),
            subsampler: Subsampler::new(vocab, cfg.subsample),
            sigmoid: Sigmoid::table(),
            vocab,
            cfg,
        })
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.cfg
    }

    pub fn encode(&self, docs: &[PseudoBilingualDocument]) -> Result<Vec<Vec<u32>>> {
        if docs.is_empty() {
            return Err(Error::Config("no documents to train on".into()));
        }
        docs.iter()
            .map(|d| Ok(encode_document(d, self.vocab)?.into_iter().map(|i| i as u32).collect()))
            .collect()
    }

    pub fn init_params(&self) -> ModelParams<f32> {
        ModelParams::init(self.vocab.len(), self.cfg.dim, self.cfg.seed)
    }

    /// Runs every epoch over `docs`, calling `on_epoch(epoch, params)` after
    /// each pass.
    pub fn run(
        &self,
        docs: &[Vec<u32>],
        params: &mut ModelParams<f32>,
        mut on_epoch: impl FnMut(usize, &ModelParams<f32>),
    ) {
        assert_eq!(params.rows(), self.vocab.len());
        assert_eq!(params.dim(), self.cfg.dim);
        let words_per_epoch: u64 = docs.iter().map(|d| d.len() as u64).sum();
        let schedule = LrSchedule {
            lr0: self.cfg.lr0,
            lr_min: self.cfg.lr_min(),
            total: self.cfg.epochs as u64 * words_per_epoch,
        };
        let processed = AtomicU64::new(0);
        let workers = self.cfg.workers.min(docs.len()).max(1);

        for epoch in 0..self.cfg.epochs {
            let shared = SharedParams::new(params);
            if workers == 1 {
                let mut worker = Worker::new(self, &shared);
                for (i, doc) in docs.iter().enumerate() {
                    worker.process(doc, self.doc_rng(epoch, i, docs.len()), &schedule, &processed);
                }
            } else {
                std::thread::scope(|scope| {
                    for w in 0..workers {
                        let shared = &shared;
                        let schedule = &schedule;
                        let processed = &processed;
                        scope.spawn(move || {
                            let mut worker = Worker::new(self, shared);
                            for i in (w..docs.len()).step_by(workers) {
                                let rng = self.doc_rng(epoch, i, docs.len());
                                worker.process(&docs[i], rng, schedule, processed);
                            }
                        });
                    }
                });
            }
            on_epoch(epoch, params);
        }
    }

    fn doc_rng(&self, epoch: usize, doc: usize, docs: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream((epoch * docs + doc) as u64);
        rng
    }
}

/// Trains on `docs` and returns the pivot vectors as the embedding space.
pub fn train(
    docs: &[PseudoBilingualDocument],
    vocab: &Vocabulary,
    cfg: &TrainingConfig,
) -> Result<EmbeddingSpace> {
    let trainer = Trainer::new(vocab, cfg.clone())?;
    let encoded = trainer.encode(docs)?;
    let mut params = trainer.init_params();
    trainer.run(&encoded, &mut params, |_, _| {});
    space_from_params(vocab, &params)
}

pub fn space_from_params(vocab: &Vocabulary, params: &ModelParams<f32>) -> Result<EmbeddingSpace> {
    EmbeddingSpace::new(params.dim(), vocab.tokens().to_vec(), params.pivot.clone())
}

/// Linear decay from `lr0` to `lr_min` over all words of all epochs.
struct LrSchedule {
    lr0: f64,
    lr_min: f64,
    total: u64,
}

impl LrSchedule {
    fn at(&self, processed: u64) -> f32 {
        let lr = self.lr0 * (1.0 - processed as f64 / (self.total as f64 + 1.0));
        lr.max(self.lr_min) as f32
    }
}

/// Raw views of the parameter matrices shared by all workers of one epoch.
struct SharedParams {
    pivot: *mut f32,
    context: *mut f32,
    rows: usize,
    dim: usize,
}

// SAFETY: workers write rows concurrently without synchronisation
// (Hogwild-style). Lost or torn updates are accepted; the matrices outlive
// every worker because they are borrowed for the scope of one epoch.
unsafe impl Sync for SharedParams {}

impl SharedParams {
    fn new(params: &mut ModelParams<f32>) -> Self {
        SharedParams {
            rows: params.rows(),
            dim: params.dim(),
            pivot: params.pivot.as_mut_ptr(),
            context: params.context.as_mut_ptr(),
        }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn pivot_row(&self, i: usize) -> &mut [f32] {
        std::slice::from_raw_parts_mut(self.pivot.add(i * self.dim), self.dim)
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn context(&self) -> &mut [f32] {
        std::slice::from_raw_parts_mut(self.context, self.rows * self.dim)
    }
}

struct Worker<'t> {
    trainer: &'t Trainer<'t>,
    shared: &'t SharedParams,
    kept: Vec<u32>,
    negatives: Vec<usize>,
    scratch: Scratch<f32>,
}

impl<'t> Worker<'t> {
    fn new(trainer: &'t Trainer<'t>, shared: &'t SharedParams) -> Self {
        Worker {
            trainer,
            shared,
            kept: Vec::new(),
            negatives: Vec::with_capacity(trainer.cfg.negatives),
            scratch: Scratch::new(trainer.cfg.dim, trainer.cfg.negatives),
        }
    }

    fn process(&mut self, doc: &[u32], mut rng: ChaCha8Rng, schedule: &LrSchedule, processed: &AtomicU64) {
        let base = processed.fetch_add(doc.len() as u64, Ordering::Relaxed);
        let t = self.trainer;
        t.subsampler.apply(doc, &mut self.kept, &mut rng);
        let kept = std::mem::take(&mut self.kept);
        let len = kept.len();
        let dim = t.cfg.dim;
        for pivot_pos in 0..len {
            // lr tracks the position within the original document
            let lr = schedule.at(base + (pivot_pos * doc.len() / len.max(1)) as u64);
            let window = rng.random_range(1..=t.cfg.window);
            let lo = pivot_pos.saturating_sub(window);
            let hi = (pivot_pos + window).min(len - 1);
            let pivot = kept[pivot_pos] as usize;
            for (ctx_pos, &ctx) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                if ctx_pos == pivot_pos {
                    continue;
                }
                self.negatives.clear();
                for _ in 0..t.cfg.negatives {
                    self.negatives.push(t.negatives.sample(&mut rng));
                }
                // SAFETY: see `SharedParams`.
                let (pivot_row, context) = unsafe { (self.shared.pivot_row(pivot), self.shared.context()) };
                sgd::sgd_update(
                    pivot_row,
                    context,
                    dim,
                    ctx as usize,
                    &self.negatives,
                    lr,
                    &t.sigmoid,
                    &mut self.scratch,
                );
            }
        }
        self.kept = kept;
    }
}
