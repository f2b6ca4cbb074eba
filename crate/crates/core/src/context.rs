//! Translation scoring in context.
//!
//! A word occurrence is represented by its context bag (the other words of its
//! sentence). Three scorers are available:
//!
//! * `InterpolatedAdd`: contextualize the pivot as
//!   `(1 - λ)·w + λ·Σ cw` and take its cosine with the candidate.
//! * `AddMelamud`: mean of the cosines of the pivot and of every context word
//!   with the candidate.
//! * `MultMelamud`: geometric mean of the same terms using the shifted cosine
//!   `(cos + 1) / 2`.

use std::fmt;
use std::str::FromStr;

use crate::corpus::Token;
use crate::error::{Error, Result};
use crate::space::{cosine, cosine_with_norms, rank_order, EmbeddingSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextBag {
    pub pivot: Token,
    /// Multiset: duplicates count.
    pub words: Vec<Token>,
}

impl ContextBag {
    pub fn new(pivot: Token, words: Vec<Token>) -> Self {
        ContextBag { pivot, words }
    }

    /// Bag for one occurrence of `pivot` in `sentence`: the sentence with the
    /// first occurrence of the pivot removed.
    pub fn from_sentence(pivot: &Token, sentence: &[Token]) -> Self {
        let mut words = sentence.to_vec();
        if let Some(pos) = words.iter().position(|t| t == pivot) {
            words.remove(pos);
        }
        ContextBag {
            pivot: pivot.clone(),
            words,
        }
    }

    /// Words of the bag present in `space`.
    pub fn in_vocabulary<'a>(&'a self, space: &'a EmbeddingSpace) -> impl Iterator<Item = &'a Token> {
        self.words.iter().filter(|t| space.contains(t))
    }

    pub fn oov_count(&self, space: &EmbeddingSpace) -> usize {
        self.words.len() - self.in_vocabulary(space).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContextMethod {
    InterpolatedAdd,
    AddMelamud,
    MultMelamud,
}

impl FromStr for ContextMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interp" => Ok(ContextMethod::InterpolatedAdd),
            "add-mel" => Ok(ContextMethod::AddMelamud),
            "mult-mel" => Ok(ContextMethod::MultMelamud),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected interp, add-mel or mult-mel)"
            ))),
        }
    }
}

impl fmt::Display for ContextMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextMethod::InterpolatedAdd => "interp",
            ContextMethod::AddMelamud => "add-mel",
            ContextMethod::MultMelamud => "mult-mel",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContextScorerConfig {
    pub method: ContextMethod,
    /// Interpolation weight of the context; only used by `InterpolatedAdd`.
    pub lambda: f64,
}

impl Default for ContextScorerConfig {
    fn default() -> Self {
        ContextScorerConfig {
            method: ContextMethod::InterpolatedAdd,
            lambda: 1.0,
        }
    }
}

impl ContextScorerConfig {
    pub fn interpolated(lambda: f64) -> Self {
        ContextScorerConfig {
            method: ContextMethod::InterpolatedAdd,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Sum of the vectors of the bag's in-vocabulary words.
pub fn compose(space: &EmbeddingSpace, bag: &ContextBag) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; space.dim()];
    let mut any = false;
    for t in bag.in_vocabulary(space) {
        any = true;
        for (s, &v) in sum.iter_mut().zip(space.vector(t)?) {
            *s += v as f64;
        }
    }
    if any {
        Ok(sum)
    } else {
        Err(Error::EmptyContext)
    }
}

/// `(1 - λ)·vec(w) + λ·compose(bag)`. At `λ = 0` the bag is not consulted.
pub fn contextualize(space: &EmbeddingSpace, word: &Token, bag: &ContextBag, lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let w = space.vector(word)?;
    if lambda == 0.0 {
        return Ok(w.iter().map(|&v| v as f64).collect());
    }
    let ctx = compose(space, bag)?;
    if lambda == 1.0 {
        return Ok(ctx);
    }
    Ok(w.iter()
        .zip(&ctx)
        .map(|(&a, &c)| (1.0 - lambda) * a as f64 + lambda * c)
        .collect())
}

fn space_cosine(space: &EmbeddingSpace, a: &Token, b: &Token) -> Result<f64> {
    let ai = space.index_of(a).ok_or_else(|| Error::UnknownWord(a.to_string()))?;
    let bi = space.index_of(b).ok_or_else(|| Error::UnknownWord(b.to_string()))?;
    cosine_with_norms(space.row(ai), space.row(bi), space.norm_of(ai), space.norm_of(bi))
}

fn shifted(c: f64) -> f64 {
    (c + 1.0) / 2.0
}

/// Similarity of `word` (observed with `bag`) to the candidate translation.
pub fn score_in_context(
    space: &EmbeddingSpace,
    word: &Token,
    candidate: &Token,
    bag: &ContextBag,
    cfg: &ContextScorerConfig,
) -> Result<f64> {
    let target = space.vector(candidate)?;
    match cfg.method {
        ContextMethod::InterpolatedAdd => {
            let contextual = contextualize(space, word, bag, cfg.lambda)?;
            cosine(&contextual, &target.iter().map(|&v| v as f64).collect::<Vec<_>>())
        }
        ContextMethod::AddMelamud => {
            let mut sum = space_cosine(space, word, candidate)?;
            let mut n = 1usize;
            for cw in bag.in_vocabulary(space) {
                sum += space_cosine(space, cw, candidate)?;
                n += 1;
            }
            Ok(sum / n as f64)
        }
        ContextMethod::MultMelamud => {
            // geometric mean in log space
            let mut log_sum = shifted(space_cosine(space, word, candidate)?).ln();
            let mut n = 1usize;
            for cw in bag.in_vocabulary(space) {
                log_sum += shifted(space_cosine(space, cw, candidate)?).ln();
                n += 1;
            }
            Ok((log_sum / n as f64).exp())
        }
    }
}

/// Scores every candidate and sorts descending, ties by `(lang, surface)`.
pub fn rank_candidates(
    space: &EmbeddingSpace,
    word: &Token,
    bag: &ContextBag,
    candidates: &[Token],
    cfg: &ContextScorerConfig,
) -> Result<Vec<(Token, f64)>> {
    if candidates.is_empty() {
        return Err(Error::Config("no translation candidates".into()));
    }
    if let Some(unknown) = candidates.iter().find(|c| !space.contains(c)) {
        return Err(Error::UnknownWord(unknown.to_string()));
    }
    let mut scored = candidates
        .iter()
        .map(|c| Ok((c.clone(), score_in_context(space, word, c, bag, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(rank_order);
    Ok(scored)
}
