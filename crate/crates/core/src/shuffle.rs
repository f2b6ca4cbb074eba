//! Pseudo-bilingual document construction.
//!
//! Three ways to turn an aligned pair into one mixed-language token sequence:
//! a seeded random permutation of the concatenated sides, a deterministic
//! interleaving driven by the ratio of side lengths, and plain concatenation
//! (the no-shuffle baseline).
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, whose output stream is fixed across platforms. Every pair
//! gets its own generator seeded with `seed ^ ordinal`, so a pair's
//! permutation does not depend on which other pairs are processed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AlignedCorpus, DocumentPair, Token};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuffleStrategy {
    MergeShuffle,
    LengthRatio,
    Concat,
}

impl ShuffleStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            ShuffleStrategy::MergeShuffle => "merge",
            ShuffleStrategy::LengthRatio => "ratio",
            ShuffleStrategy::Concat => "concat",
        }
    }
}

impl fmt::Display for ShuffleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShuffleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "merge" => Ok(ShuffleStrategy::MergeShuffle),
            "ratio" => Ok(ShuffleStrategy::LengthRatio),
            "concat" => Ok(ShuffleStrategy::Concat),
            other => Err(Error::Config(format!(
                "unknown strategy {other:?} (expected merge, ratio or concat)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ShuffleSeed(pub u64);

impl ShuffleSeed {
    /// Seed for the pair at position `ordinal` of a corpus.
    pub fn for_pair(self, ordinal: usize) -> ShuffleSeed {
        ShuffleSeed(self.0 ^ ordinal as u64)
    }

    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoBilingualDocument {
    pub tokens: Vec<Token>,
    pub origin_id: String,
    /// `None` for documents read back from a pseudo-document file.
    pub strategy: Option<ShuffleStrategy>,
}

impl PseudoBilingualDocument {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// In-place Fisher–Yates shuffle.
pub fn fisher_yates<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Emits `ratio = longer.len() / shorter.len()` items of `longer` followed by
/// one item of `shorter` until `shorter` runs out, then the remainder of
/// `longer`. `shorter` must be non-empty.
pub fn interleave_by_ratio<T: Clone>(longer: &[T], shorter: &[T]) -> Vec<T> {
    assert!(!shorter.is_empty() && longer.len() >= shorter.len());
    let ratio = longer.len() / shorter.len();
    let mut out = Vec::with_capacity(longer.len() + shorter.len());
    let mut chunks = longer.chunks(ratio);
    for item in shorter {
        out.extend_from_slice(chunks.next().unwrap_or_default());
        out.push(item.clone());
    }
    out.extend_from_slice(&longer[ratio * shorter.len()..]);
    out
}

fn check_not_empty(pair: &DocumentPair) -> Result<()> {
    if pair.source.is_empty() && pair.target.is_empty() {
        Err(Error::EmptyDocument(pair.id.clone()))
    } else {
        Ok(())
    }
}

pub fn merge_and_shuffle(pair: &DocumentPair, seed: ShuffleSeed) -> Result<PseudoBilingualDocument> {
    check_not_empty(pair)?;
    let mut tokens: Vec<Token> = pair.tokens().cloned().collect();
    fisher_yates(&mut tokens, &mut seed.rng());
    Ok(PseudoBilingualDocument {
        tokens,
        origin_id: pair.id.clone(),
        strategy: Some(ShuffleStrategy::MergeShuffle),
    })
}

/// Deterministic interleaving preserving monolingual word order. With equal
/// lengths the source side counts as the longer one.
pub fn length_ratio_shuffle(pair: &DocumentPair) -> Result<PseudoBilingualDocument> {
    if pair.source.is_empty() || pair.target.is_empty() {
        return Err(Error::EmptySide(pair.id.clone()));
    }
    let tokens = if pair.source.len() >= pair.target.len() {
        interleave_by_ratio(&pair.source, &pair.target)
    } else {
        interleave_by_ratio(&pair.target, &pair.source)
    };
    Ok(PseudoBilingualDocument {
        tokens,
        origin_id: pair.id.clone(),
        strategy: Some(ShuffleStrategy::LengthRatio),
    })
}

pub fn concat(pair: &DocumentPair) -> Result<PseudoBilingualDocument> {
    check_not_empty(pair)?;
    Ok(PseudoBilingualDocument {
        tokens: pair.tokens().cloned().collect(),
        origin_id: pair.id.clone(),
        strategy: Some(ShuffleStrategy::Concat),
    })
}

pub fn shuffle_pair(
    pair: &DocumentPair,
    strategy: ShuffleStrategy,
    seed: ShuffleSeed,
) -> Result<PseudoBilingualDocument> {
    match strategy {
        ShuffleStrategy::MergeShuffle => merge_and_shuffle(pair, seed),
        ShuffleStrategy::LengthRatio => length_ratio_shuffle(pair),
        ShuffleStrategy::Concat => concat(pair),
    }
}

#[derive(Clone, Debug, Default)]
pub struct ShuffledCorpus {
    pub docs: Vec<PseudoBilingualDocument>,
    /// Pairs that did not meet the strategy's precondition.
    pub skipped: usize,
}

pub fn shuffle_corpus(
    corpus: &AlignedCorpus,
    strategy: ShuffleStrategy,
    seed: ShuffleSeed,
) -> ShuffledCorpus {
    let mut out = ShuffledCorpus::default();
    for (ordinal, pair) in corpus.pairs().iter().enumerate() {
        match shuffle_pair(pair, strategy, seed.for_pair(ordinal)) {
            Ok(doc) => out.docs.push(doc),
            Err(_) => out.skipped += 1,
        }
    }
    out
}

/// One document per line, tokens as `lang:surface` joined by single spaces.
pub fn write_pseudo_docs(docs: &[PseudoBilingualDocument]) -> String {
    let mut out = String::new();
    for doc in docs {
        for (i, t) in doc.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_pseudo_docs(text: &str) -> Result<Vec<PseudoBilingualDocument>> {
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens = line
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(Token::parse)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(lineno + 1, e.to_string()))?;
        docs.push(PseudoBilingualDocument {
            tokens,
            origin_id: (lineno + 1).to_string(),
            strategy: None,
        });
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LangTag;
    use proptest::prelude::*;

    fn side(lang: &str, words: &str) -> Vec<Token> {
        let lang = LangTag::new(lang).unwrap();
        words
            .split_whitespace()
            .map(|w| Token::new(lang.clone(), w).unwrap())
            .collect()
    }

    fn pair(src: &str, tgt: &str) -> DocumentPair {
        DocumentPair {
            id: "p".into(),
            source: side("en", src),
            target: side("es", tgt),
        }
    }

    fn surfaces(doc: &PseudoBilingualDocument) -> Vec<&str> {
        doc.tokens.iter().map(Token::surface).collect()
    }

    #[test]
    fn worked_example_interleaving() {
        let p = pair("Frodo Sam orcs goblins Mordor ring", "anillo orcos mago");
        let doc = length_ratio_shuffle(&p).unwrap();
        assert_eq!(
            surfaces(&doc),
            ["Frodo", "Sam", "anillo", "orcs", "goblins", "orcos", "Mordor", "ring", "mago"]
        );
        // roles reversed give the same document
        let flipped = DocumentPair {
            id: "p".into(),
            source: p.target.clone(),
            target: p.source.clone(),
        };
        assert_eq!(length_ratio_shuffle(&flipped).unwrap().tokens, doc.tokens);
    }

    #[test]
    fn equal_lengths_alternate_from_source() {
        let doc = length_ratio_shuffle(&pair("a b", "x y")).unwrap();
        assert_eq!(surfaces(&doc), ["a", "x", "b", "y"]);
    }

    /// Literal transcription of the four-step procedure.
    fn stepwise_oracle(longer: &[char], shorter: &[char]) -> Vec<char> {
        let mut doc = Vec::new();
        let r = longer.len() / shorter.len();
        let (mut li, mut si) = (0, 0);
        while si < shorter.len() {
            for _ in 0..r {
                doc.push(longer[li]);
                li += 1;
            }
            doc.push(shorter[si]);
            si += 1;
        }
        for _ in 0..longer.len() % shorter.len() {
            doc.push(longer[li]);
            li += 1;
        }
        doc
    }

    #[test]
    fn seven_to_three_pattern() {
        let longer: Vec<char> = "abcdefg".chars().collect();
        let shorter: Vec<char> = "XYZ".chars().collect();
        let out = interleave_by_ratio(&longer, &shorter);
        assert_eq!(out, stepwise_oracle(&longer, &shorter));
        let pattern: String = out
            .iter()
            .map(|c| if c.is_uppercase() { 'T' } else { 'L' })
            .collect();
        assert_eq!(pattern, "LLTLLTLLTL");
    }

    #[test]
    fn length_ratio_needs_both_sides() {
        assert!(matches!(length_ratio_shuffle(&pair("a b", "")), Err(Error::EmptySide(_))));
        assert!(matches!(length_ratio_shuffle(&pair("", "x")), Err(Error::EmptySide(_))));
    }

    #[test]
    fn single_token_merge() {
        let p = pair("a", "");
        for seed in 0..20 {
            assert_eq!(surfaces(&merge_and_shuffle(&p, ShuffleSeed(seed)).unwrap()), ["a"]);
        }
        assert!(matches!(
            merge_and_shuffle(&pair("", ""), ShuffleSeed(1)),
            Err(Error::EmptyDocument(_))
        ));
    }

    #[test]
    fn merge_is_reproducible() {
        let p = pair("a b c d e", "v w x y z");
        let a = merge_and_shuffle(&p, ShuffleSeed(42)).unwrap();
        let b = merge_and_shuffle(&p, ShuffleSeed(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn merge_first_token_language_is_balanced() {
        let p = pair("a b c d e", "v w x y z");
        let trials = 10_000;
        let en = (0..trials)
            .filter(|&s| {
                merge_and_shuffle(&p, ShuffleSeed(s)).unwrap().tokens[0].lang().as_str() == "en"
            })
            .count();
        let freq = en as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "first-token en frequency {freq}");
    }

    #[test]
    fn fisher_yates_positions_are_uniform() {
        // every element should land in every slot with probability 1/4
        let mut hits = [[0u32; 4]; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 40_000;
        for _ in 0..trials {
            let mut v = [0usize, 1, 2, 3];
            fisher_yates(&mut v, &mut rng);
            for (slot, &item) in v.iter().enumerate() {
                hits[item][slot] += 1;
            }
        }
        for row in hits {
            for h in row {
                let p = h as f64 / trials as f64;
                assert!((p - 0.25).abs() < 0.01, "{p}");
            }
        }
    }

    #[test]
    fn concat_keeps_source_prefix() {
        assert_eq!(surfaces(&concat(&pair("a b", "x")).unwrap()), ["a", "b", "x"]);
        assert_eq!(surfaces(&concat(&pair("a b", "")).unwrap()), ["a", "b"]);
        assert!(concat(&pair("", "")).is_err());
    }

    fn two_pair_corpus(second_target: &str) -> AlignedCorpus {
        let mut b = pair("c", second_target);
        b.id = "q".into();
        AlignedCorpus::new(
            vec![pair("a b", "x"), b],
            LangTag::new("en").unwrap(),
            LangTag::new("es").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn corpus_concat_in_order() {
        let out = shuffle_corpus(&two_pair_corpus("y"), ShuffleStrategy::Concat, ShuffleSeed(0));
        assert_eq!(out.skipped, 0);
        assert_eq!(out.docs.len(), 2);
        assert_eq!(out.docs[0].origin_id, "p");
        assert_eq!(surfaces(&out.docs[1]), ["c", "y"]);
    }

    #[test]
    fn corpus_ratio_skips_empty_side() {
        let out = shuffle_corpus(&two_pair_corpus(""), ShuffleStrategy::LengthRatio, ShuffleSeed(0));
        assert_eq!(out.skipped, 1);
        assert_eq!(out.docs.len(), 1);
        let merged = shuffle_corpus(&two_pair_corpus(""), ShuffleStrategy::MergeShuffle, ShuffleSeed(0));
        assert_eq!(merged.skipped, 0);
    }

    #[test]
    fn corpus_merge_stream_is_deterministic() {
        let corpus = two_pair_corpus("y z w");
        let a = write_pseudo_docs(&shuffle_corpus(&corpus, ShuffleStrategy::MergeShuffle, ShuffleSeed(9)).docs);
        let b = write_pseudo_docs(&shuffle_corpus(&corpus, ShuffleStrategy::MergeShuffle, ShuffleSeed(9)).docs);
        assert_eq!(a, b);
    }

    #[test]
    fn per_pair_seed_is_independent_of_slicing() {
        let corpus = two_pair_corpus("y z w v");
        let full = shuffle_corpus(&corpus, ShuffleStrategy::MergeShuffle, ShuffleSeed(5));
        let alone = merge_and_shuffle(&corpus.pairs()[1], ShuffleSeed(5).for_pair(1)).unwrap();
        assert_eq!(full.docs[1], alone);
    }

    #[test]
    fn pseudo_doc_file_round_trip() {
        let docs = shuffle_corpus(&two_pair_corpus("y"), ShuffleStrategy::LengthRatio, ShuffleSeed(0)).docs;
        let text = write_pseudo_docs(&docs);
        assert_eq!(text, "en:a en:b es:x\nen:c es:y\n");
        let back = parse_pseudo_docs(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].tokens, docs[0].tokens);
        assert!(parse_pseudo_docs("en:a nocolon\n").is_err());
    }

    fn arb_pair() -> impl Strategy<Value = DocumentPair> {
        (
            prop::collection::vec(0u8..30, 0..40),
            prop::collection::vec(0u8..30, 0..40),
        )
            .prop_map(|(s, t)| {
                let en = LangTag::new("en").unwrap();
                let es = LangTag::new("es").unwrap();
                DocumentPair {
                    id: "p".into(),
                    source: s.iter().map(|w| Token::new(en.clone(), format!("s{w}")).unwrap()).collect(),
                    target: t.iter().map(|w| Token::new(es.clone(), format!("t{w}")).unwrap()).collect(),
                }
            })
    }

    fn sorted(mut v: Vec<Token>) -> Vec<Token> {
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn strategies_preserve_multiset(p in arb_pair(), seed in any::<u64>()) {
            let expected = sorted(p.tokens().cloned().collect());
            for strategy in [ShuffleStrategy::MergeShuffle, ShuffleStrategy::LengthRatio, ShuffleStrategy::Concat] {
                if let Ok(doc) = shuffle_pair(&p, strategy, ShuffleSeed(seed)) {
                    prop_assert_eq!(sorted(doc.tokens), expected.clone());
                }
            }
        }

        #[test]
        fn ratio_preserves_monolingual_order(p in arb_pair()) {
            if let Ok(doc) = length_ratio_shuffle(&p) {
                let src: Vec<_> = doc.tokens.iter().filter(|t| t.lang().as_str() == "en").cloned().collect();
                let tgt: Vec<_> = doc.tokens.iter().filter(|t| t.lang().as_str() == "es").cloned().collect();
                prop_assert_eq!(src, p.source.clone());
                prop_assert_eq!(tgt, p.target.clone());
                prop_assert_eq!(length_ratio_shuffle(&p).unwrap(), doc);
            }
        }
    }

    #[test]
    fn different_seeds_give_different_permutations() {
        let p = pair("a b c d", "w x y z");
        let base = merge_and_shuffle(&p, ShuffleSeed(0)).unwrap();
        let differing = (1..200)
            .filter(|&s| merge_and_shuffle(&p, ShuffleSeed(s)).unwrap() != base)
            .count();
        // 8! = 40320 permutations; a handful of collisions at most
        assert!(differing >= 195, "{differing}");
    }
}
