//! Synthetic document-aligned corpora with a known translation lexicon.
//!
//! Every concept `i` has a source word `es:s{i}` and a target word `en:t{i}`.
//! Each aligned pair draws a sparse random mixture over concepts and both
//! sides sample their tokens from that same mixture, so translation
//! equivalents share exactly the same document-level distribution.
//!
//! Optionally a set of two-sense source words is added. Sense `a` of pivot
//! `k` is translated `en:p{k}a` and co-occurs with one group of concepts,
//! sense `b` (`en:p{k}b`) with a disjoint group. The first sense is the more
//! frequent one, so a context-blind choice favours it.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AlignedCorpus, DocumentPair, LangTag, Token};
use crate::eval::{BleTestSet, SwtcInstance};

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub concepts: usize,
    pub pairs: usize,
    /// Inclusive range of tokens per document side.
    pub side_len: (usize, usize),
    pub concepts_per_doc: usize,
    pub polysemous: usize,
    pub context_group: usize,
    /// Share of pivot occurrences using the first sense.
    pub majority_share: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            concepts: 200,
            pairs: 500,
            side_len: (100, 300),
            concepts_per_doc: 12,
            polysemous: 0,
            context_group: 5,
            majority_share: 0.7,
            seed: 2016,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sense {
    pub translation: Token,
    /// Concepts co-occurring with this sense.
    pub context: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Polyseme {
    pub pivot: Token,
    pub senses: [Sense; 2],
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub corpus: AlignedCorpus,
    pub lexicon: BleTestSet,
    pub polysemes: Vec<Polyseme>,
    source: Vec<Token>,
}

fn source_lang() -> LangTag {
    LangTag::new("es").unwrap()
}

fn target_lang() -> LangTag {
    LangTag::new("en").unwrap()
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticData {
    assert!(cfg.concepts_per_doc <= cfg.concepts);
    assert!(cfg.polysemous * 2 * cfg.context_group <= cfg.concepts);
    let (es, en) = (source_lang(), target_lang());
    let source: Vec<Token> = (0..cfg.concepts)
        .map(|i| Token::new(es.clone(), format!("s{i:03}")).unwrap())
        .collect();
    let target: Vec<Token> = (0..cfg.concepts)
        .map(|i| Token::new(en.clone(), format!("t{i:03}")).unwrap())
        .collect();
    let polysemes: Vec<Polyseme> = (0..cfg.polysemous)
        .map(|k| {
            let group = |g: usize| (g * cfg.context_group..(g + 1) * cfg.context_group).collect();
            Polyseme {
                pivot: Token::new(es.clone(), format!("p{k:02}")).unwrap(),
                senses: [
                    Sense {
                        translation: Token::new(en.clone(), format!("p{k:02}a")).unwrap(),
                        context: group(2 * k),
                    },
                    Sense {
                        translation: Token::new(en.clone(), format!("p{k:02}b")).unwrap(),
                        context: group(2 * k + 1),
                    },
                ],
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(cfg.pairs);
    for d in 0..cfg.pairs {
        // (source token, target token, weight)
        let mut mixture: Vec<(Token, Token, f64)> = Vec::new();
        for c in rand::seq::index::sample(&mut rng, cfg.concepts, cfg.concepts_per_doc) {
            mixture.push((source[c].clone(), target[c].clone(), rng.random_range(0.5..1.5)));
        }
        if !polysemes.is_empty() {
            let poly = &polysemes[rng.random_range(0..polysemes.len())];
            let sense = &poly.senses[usize::from(rng.random::<f64>() >= cfg.majority_share)];
            mixture.push((poly.pivot.clone(), sense.translation.clone(), 2.0));
            for &c in &sense.context {
                mixture.push((source[c].clone(), target[c].clone(), 2.0));
            }
        }
        let weights = WeightedIndex::new(mixture.iter().map(|m| m.2)).unwrap();
        let side = |pick: fn(&(Token, Token, f64)) -> &Token, rng: &mut ChaCha8Rng| {
            let len = rng.random_range(cfg.side_len.0..=cfg.side_len.1);
            (0..len)
                .map(|_| pick(&mixture[weights.sample(rng)]).clone())
                .collect::<Vec<_>>()
        };
        let src = side(|m| &m.0, &mut rng);
        let tgt = side(|m| &m.1, &mut rng);
        pairs.push(DocumentPair {
            id: format!("doc{d:04}"),
            source: src,
            target: tgt,
        });
    }

    let lexicon = BleTestSet::new(
        source
            .iter()
            .cloned()
            .zip(target.iter().cloned())
            .collect(),
    )
    .unwrap();
    SyntheticData {
        corpus: AlignedCorpus::new(pairs, es, en).unwrap(),
        lexicon,
        polysemes,
        source,
    }
}

impl SyntheticData {
    /// Test sentences for the polysemous pivots, senses drawn 50/50. Each
    /// sentence holds the pivot and `context_len` words from the sense's
    /// context group.
    pub fn swtc_instances(&self, count: usize, context_len: usize, seed: u64) -> Vec<SwtcInstance> {
        assert!(!self.polysemes.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let poly = &self.polysemes[i % self.polysemes.len()];
                let sense = &poly.senses[rng.random_range(0..2)];
                let mut sentence: Vec<Token> = (0..context_len)
                    .map(|_| self.source[sense.context[rng.random_range(0..sense.context.len())]].clone())
                    .collect();
                let at = rng.random_range(0..=sentence.len());
                sentence.insert(at, poly.pivot.clone());
                SwtcInstance::new(
                    poly.pivot.clone(),
                    sense.translation.clone(),
                    poly.senses.iter().map(|s| s.translation.clone()).collect(),
                    sentence,
                )
                .unwrap()
            })
            .collect()
    }
}
