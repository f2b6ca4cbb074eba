//! The shared bilingual embedding space and similarity queries over it.
//!
//! Model files are plain text: a `|V| d` header followed by one
//! `lang:surface f_1 ... f_d` line per word.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{LangTag, Token};
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Clone, Debug)]
pub struct EmbeddingSpace {
    dim: usize,
    tokens: Vec<Token>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<Token, usize>,
}

impl EmbeddingSpace {
    /// `vectors` is row-major, one row of `dim` values per token.
    pub fn new(dim: usize, tokens: Vec<Token>, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("embedding dimension must be positive".into()));
        }
        if vectors.len() != tokens.len() * dim {
            return Err(Error::Format(format!(
                "{} values for {} words of dimension {dim}",
                vectors.len(),
                tokens.len()
            )));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite embedding value".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate word {t}")));
            }
        }
        let norms = vectors.chunks_exact(dim).map(norm).collect();
        Ok(EmbeddingSpace {
            dim,
            tokens,
            vectors,
            norms,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &Token {
        &self.tokens[i]
    }

    pub fn index_of(&self, token: &Token) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &Token) -> bool {
        self.index.contains_key(token)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, token: &Token) -> Result<&[f32]> {
        self.index_of(token)
            .map(|i| self.row(i))
            .ok_or_else(|| Error::UnknownWord(token.to_string()))
    }

    pub(crate) fn norm_of(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Distinct language tags, sorted.
    pub fn langs(&self) -> Vec<LangTag> {
        let set: HashSet<&LangTag> = self.tokens.iter().map(Token::lang).collect();
        let mut langs: Vec<LangTag> = set.into_iter().cloned().collect();
        langs.sort();
        langs
    }

    /// Same space with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        EmbeddingSpace::new(
            self.dim,
            self.tokens.clone(),
            self.vectors.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `|V| d` header"))?;
        let mut fields = header.split_whitespace();
        let mut header_num = |what: &str| -> Result<usize> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::parse(1, format!("bad {what} in header {header:?}")))
        };
        let rows = header_num("vocabulary size")?;
        let dim = header_num("dimension")?;

        let mut tokens = Vec::with_capacity(rows);
        let mut vectors = Vec::with_capacity(rows * dim);
        for (i, line) in lines {
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().unwrap_or_default();
            tokens.push(Token::parse(word).map_err(|e| Error::parse(lineno, e.to_string()))?);
            let before = vectors.len();
            for f in fields {
                let v: f32 = f
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad float {f:?}")))?;
                vectors.push(v);
            }
            if vectors.len() - before != dim {
                return Err(Error::parse(
                    lineno,
                    format!("expected {dim} values, found {}", vectors.len() - before),
                ));
            }
        }
        if tokens.len() != rows {
            return Err(Error::Format(format!(
                "header announces {rows} words, file has {}",
                tokens.len()
            )));
        }
        EmbeddingSpace::new(dim, tokens, vectors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        EmbeddingSpace::parse(&fsutil::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, t) in self.tokens.iter().enumerate() {
            let _ = write!(out, "{t}");
            for v in self.row(i) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_text().as_bytes())
    }

    /// Surface-keyed export: `surface<TAB>lang<TAB>f_1 ... f_d` per word.
    pub fn to_export_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, t) in self.tokens.iter().enumerate() {
            let _ = write!(out, "{}\t{}\t", t.surface(), t.lang());
            for (k, v) in self.row(i).iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn norm<T: Copy + Into<f64>>(v: &[T]) -> f64 {
    v.iter()
        .map(|&x| {
            let x: f64 = x.into();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot<A: Copy + Into<f64>, B: Copy + Into<f64>>(a: &[A], b: &[B]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.into() * y.into())
        .sum()
}

/// Cosine with caller-supplied norms; the one place the division happens so
/// that every cosine in the crate rounds identically.
pub(crate) fn cosine_with_norms<A, B>(a: &[A], b: &[B], norm_a: f64, norm_b: f64) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(dot(a, b) / (norm_a * norm_b))
}

/// Cosine similarity, accumulated in `f64`.
pub fn cosine<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    cosine_with_norms(a, b, norm(a), norm(b))
}

/// Hellinger distance between two discrete distributions. Lower is more
/// similar; ranked lists built on it sort ascending.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    for dist in [p, q] {
        if dist.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Domain("negative or non-finite probability".into()));
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
    }
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    // rounding can push the value a hair past 1 for disjoint supports
    Ok((sum.sqrt() / std::f64::consts::SQRT_2).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryMode {
    Monolingual,
    CrossLingual,
    Multilingual,
}

impl QueryMode {
    fn admits(self, query: &LangTag, candidate: &LangTag) -> bool {
        match self {
            QueryMode::Monolingual => query == candidate,
            QueryMode::CrossLingual => query != candidate,
            QueryMode::Multilingual => true,
        }
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mono" => Ok(QueryMode::Monolingual),
            "cross" => Ok(QueryMode::CrossLingual),
            "multi" => Ok(QueryMode::Multilingual),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected mono, cross or multi)"
            ))),
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::Monolingual => "mono",
            QueryMode::CrossLingual => "cross",
            QueryMode::Multilingual => "multi",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub query: Token,
    pub mode: QueryMode,
    pub prune: usize,
    /// Descending by score, ties by `(lang, surface)`.
    pub items: Vec<(Token, f64)>,
}

impl RankedList {
    pub fn head(&self) -> Option<&Token> {
        self.items.first().map(|(t, _)| t)
    }
}

impl fmt::Display for RankedList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} ({})", self.query, self.mode)?;
        for (rank, (t, score)) in self.items.iter().enumerate() {
            writeln!(f, "{}\t{}\t{:.6}", rank + 1, t, score)?;
        }
        Ok(())
    }
}

/// Descending score with the lexicographic token tie-break.
pub(crate) fn rank_order(a: &(Token, f64), b: &(Token, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Exhaustive cosine ranking of every other word admitted by `mode`, pruned
/// to `prune` items. Zero-norm candidates have no defined cosine and are left
/// out.
pub fn ranked_list(
    space: &EmbeddingSpace,
    query: &Token,
    mode: QueryMode,
    prune: usize,
) -> Result<RankedList> {
    let qi = space
        .index_of(query)
        .ok_or_else(|| Error::UnknownWord(query.to_string()))?;
    let qv = space.row(qi);
    let qn = space.norm_of(qi);
    if qn == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    let mut items = Vec::new();
    if prune > 0 {
        for (i, t) in space.tokens().iter().enumerate() {
            if i == qi || !mode.admits(query.lang(), t.lang()) || space.norm_of(i) == 0.0 {
                continue;
            }
            let score = cosine_with_norms(qv, space.row(i), qn, space.norm_of(i))?;
            items.push((t.clone(), score));
        }
        if items.len() > prune {
            items.select_nth_unstable_by(prune - 1, rank_order);
            items.truncate(prune);
        }
        items.sort_by(rank_order);
    }
    Ok(RankedList {
        query: query.clone(),
        mode,
        prune,
        items,
    })
}

/// The highest-cosine word of the other language.
pub fn nearest_cross(space: &EmbeddingSpace, query: &Token) -> Result<Token> {
    ranked_list(space, query, QueryMode::CrossLingual, 1)?
        .items
        .into_iter()
        .next()
        .map(|(t, _)| t)
        .ok_or_else(|| Error::Domain(format!("no cross-lingual candidates for {query}")))
}
