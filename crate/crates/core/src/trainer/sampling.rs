//! Sigmoid evaluation, negative sampling, frequent-word subsampling and
//! dynamic-window pair generation.

use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::Result;
use crate::shuffle::PseudoBilingualDocument;

pub const SIGMOID_BOUND: f64 = 6.0;
pub const SIGMOID_BINS: usize = 1000;
pub const NEGATIVE_TABLE_SIZE: usize = 10_000_000;

/// How `1 / (1 + e^-x)` is evaluated.
#[derive(Clone, Debug)]
pub enum Sigmoid {
    /// Lookup over `[-6, 6]` in 1000 bins, saturating outside.
    Table(Box<[f64]>),
    Exact,
}

impl Sigmoid {
    pub fn table() -> Self {
        let table = (0..=SIGMOID_BINS)
            .map(|i| {
                let x = -SIGMOID_BOUND + 2.0 * SIGMOID_BOUND * i as f64 / SIGMOID_BINS as f64;
                exact_sigmoid(x)
            })
            .collect();
        Sigmoid::Table(table)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Sigmoid::Exact => exact_sigmoid(x),
            Sigmoid::Table(table) => {
                if x >= SIGMOID_BOUND {
                    table[SIGMOID_BINS]
                } else if x <= -SIGMOID_BOUND || x.is_nan() {
                    table[0]
                } else {
                    let pos = (x + SIGMOID_BOUND) * (SIGMOID_BINS as f64 / (2.0 * SIGMOID_BOUND));
                    table[pos.round() as usize]
                }
            }
        }
    }
}

#[inline]
pub fn exact_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that `(w, v)` is an observed pair: `σ(w · v_c)`.
pub fn pair_probability<T: Copy + Into<f64>>(pivot: &[T], context: &[T], sigmoid: &Sigmoid) -> f64 {
    assert_eq!(pivot.len(), context.len(), "dimension mismatch");
    let dot: f64 = pivot
        .iter()
        .zip(context)
        .map(|(&a, &b)| a.into() * b.into())
        .sum();
    sigmoid.eval(dot)
}

/// Precomputed unigram^power table: slot counts are proportional to each
/// word's share of `Σ count^power`.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    slots: Vec<u32>,
    probabilities: Vec<f64>,
}

impl NegativeTable {
    pub fn new(vocab: &Vocabulary, power: f64) -> Self {
        Self::with_size(vocab.counts(), power, NEGATIVE_TABLE_SIZE)
    }

    pub fn with_size(counts: &[u64], power: f64, size: usize) -> Self {
        assert!(!counts.is_empty() && size > 0);
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let mut slots = Vec::with_capacity(size);
        let mut word = 0usize;
        let mut cumulative = probabilities[0];
        for a in 0..size {
            slots.push(word as u32);
            if (a + 1) as f64 / size as f64 > cumulative && word + 1 < probabilities.len() {
                word += 1;
                cumulative += probabilities[word];
            }
        }
        NegativeTable {
            slots,
            probabilities,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.slots[rng.random_range(0..self.slots.len())] as usize
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// The closed-form probability the table approximates.
    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    /// Fraction of slots holding `index`.
    pub fn slot_share(&self, index: usize) -> f64 {
        self.slots.iter().filter(|&&s| s as usize == index).count() as f64 / self.len() as f64
    }
}

/// Keep probability `min(1, (sqrt(f/t) + 1) * t/f)` where `f` is a word's
/// share of all retained tokens, both languages pooled.
pub fn keep_probability(frequency: f64, threshold: f64) -> f64 {
    if threshold <= 0.0 || frequency <= 0.0 {
        return 1.0;
    }
    (((frequency / threshold).sqrt() + 1.0) * threshold / frequency).min(1.0)
}

#[derive(Clone, Debug)]
pub struct Subsampler {
    keep: Vec<f64>,
}

impl Subsampler {
    pub fn new(vocab: &Vocabulary, threshold: f64) -> Self {
        let total = vocab.total() as f64;
        let keep = vocab
            .counts()
            .iter()
            .map(|&c| keep_probability(c as f64 / total, threshold))
            .collect();
        Subsampler { keep }
    }

    pub fn keep_probability(&self, index: usize) -> f64 {
        self.keep[index]
    }

    #[inline]
    pub fn keeps<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> bool {
        let p = self.keep[index];
        p >= 1.0 || rng.random::<f64>() < p
    }

    /// Filters `doc` (vocabulary indices) into `out`, preserving order.
    pub fn apply<R: Rng + ?Sized>(&self, doc: &[u32], out: &mut Vec<u32>, rng: &mut R) {
        out.clear();
        out.extend(doc.iter().copied().filter(|&w| self.keeps(w as usize, rng)));
    }
}

/// Token-level subsampling of a pseudo-bilingual document. Tokens missing
/// from `vocab` have no frequency and are always kept.
pub fn subsample<R: Rng + ?Sized>(
    doc: &PseudoBilingualDocument,
    vocab: &Vocabulary,
    threshold: f64,
    rng: &mut R,
) -> PseudoBilingualDocument {
    let sampler = Subsampler::new(vocab, threshold);
    let tokens = doc
        .tokens
        .iter()
        .filter(|t| match vocab.index_of(t) {
            Some(i) => sampler.keeps(i, rng),
            None => true,
        })
        .cloned()
        .collect();
    PseudoBilingualDocument {
        tokens,
        origin_id: doc.origin_id.clone(),
        strategy: doc.strategy,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrainingPair {
    pub pivot_index: usize,
    pub context_index: usize,
    pub label: PairLabel,
}

/// Visits every `(pivot position, context position)` of a document: each
/// pivot draws `t` uniformly from `1..=max_window` and pairs with the
/// positions up to `t` away on either side, clipped at the document edges.
#[inline]
pub fn for_each_window<R, F>(len: usize, max_window: usize, rng: &mut R, mut f: F)
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize),
{
    for pivot in 0..len {
        let t = rng.random_range(1..=max_window);
        let lo = pivot.saturating_sub(t);
        let hi = (pivot + t).min(len - 1);
        for ctx in lo..=hi {
            if ctx != pivot {
                f(pivot, ctx);
            }
        }
    }
}

pub fn generate_pairs<R: Rng + ?Sized>(doc: &[usize], max_window: usize, rng: &mut R) -> Vec<TrainingPair> {
    let mut pairs = Vec::new();
    for_each_window(doc.len(), max_window, rng, |p, c| {
        pairs.push(TrainingPair {
            pivot_index: doc[p],
            context_index: doc[c],
            label: PairLabel::Positive,
        })
    });
    pairs
}

/// Index form of a pseudo-document; tokens must all be in `vocab`.
pub fn encode_document(doc: &PseudoBilingualDocument, vocab: &Vocabulary) -> Result<Vec<usize>> {
    doc.tokens
        .iter()
        .map(|t| {
            vocab
                .index_of(t)
                .ok_or_else(|| crate::error::Error::UnknownWord(t.to_string()))
        })
        .collect()
}
