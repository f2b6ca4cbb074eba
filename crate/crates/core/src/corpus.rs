//! Document-aligned corpora, language-tagged tokens and frequency-filtered
//! vocabularies.
//!
//! The on-disk format (`dapc-tsv`) holds one document side per line:
//!
//! ```text
//! # comment
//! doc_id<TAB>lang<TAB>space separated tokens
//! ```
//!
//! The two records sharing a `doc_id` form one [`DocumentPair`]. The source
//! language is the language of the first record in the file unless the
//! caller picks one with [`AlignedCorpus::with_source`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Short language code such as `es` or `en`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LangTag(Arc<str>);

impl LangTag {
    pub fn new(code: &str) -> Result<Self> {
        if code.is_empty() {
            return Err(Error::Format("empty language tag".into()));
        }
        if code.contains(|c: char| c.is_whitespace() || c == ':') {
            return Err(Error::Format(format!("invalid language tag {code:?}")));
        }
        Ok(LangTag(Arc::from(code)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A word token tagged with its language.
///
/// The derived ordering compares `(lang, surface)` lexicographically, which is
/// the tie-break order used by every ranked output in this crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    lang: LangTag,
    surface: String,
}

impl Token {
    pub fn new(lang: LangTag, surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::Format("empty token surface".into()));
        }
        if surface.contains(char::is_whitespace) {
            return Err(Error::Format(format!(
                "token surface {surface:?} contains whitespace"
            )));
        }
        Ok(Token { lang, surface })
    }

    /// Parses the `lang:surface` notation used by every file format here.
    pub fn parse(text: &str) -> Result<Self> {
        let (lang, surface) = text
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("expected lang:surface, got {text:?}")))?;
        Token::new(LangTag::new(lang)?, surface)
    }

    pub fn lang(&self) -> &LangTag {
        &self.lang
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lang, self.surface)
    }
}

impl FromStr for Token {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Token::parse(s)
    }
}

/// One aligned source/target document pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentPair {
    pub id: String,
    pub source: Vec<Token>,
    pub target: Vec<Token>,
}

impl DocumentPair {
    pub fn source_len(&self) -> usize {
        self.source.len()
    }

    pub fn target_len(&self) -> usize {
        self.target.len()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.source.iter().chain(self.target.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    DapcTsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dapc-tsv" => Ok(CorpusFormat::DapcTsv),
            other => Err(Error::Format(format!("unknown corpus format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedCorpus {
    pairs: Vec<DocumentPair>,
    source_lang: LangTag,
    target_lang: LangTag,
}

impl AlignedCorpus {
    /// Builds a corpus from already constructed pairs, checking the invariants
    /// the loader enforces.
    pub fn new(
        pairs: Vec<DocumentPair>,
        source_lang: LangTag,
        target_lang: LangTag,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Format("corpus has no document pairs".into()));
        }
        if source_lang == target_lang {
            return Err(Error::Format(format!(
                "source and target language are both {source_lang}"
            )));
        }
        let mut seen = BTreeSet::new();
        for pair in &pairs {
            if !seen.insert(pair.id.as_str()) {
                return Err(Error::Format(format!("duplicate document id {:?}", pair.id)));
            }
            if let Some(t) = pair.source.iter().find(|t| t.lang() != &source_lang) {
                return Err(Error::Format(format!(
                    "document {:?}: source token {t} is not tagged {source_lang}",
                    pair.id
                )));
            }
            if let Some(t) = pair.target.iter().find(|t| t.lang() != &target_lang) {
                return Err(Error::Format(format!(
                    "document {:?}: target token {t} is not tagged {target_lang}",
                    pair.id
                )));
            }
        }
        Ok(AlignedCorpus {
            pairs,
            source_lang,
            target_lang,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_dapc_tsv(text)
    }

    pub fn pairs(&self) -> &[DocumentPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_lang(&self) -> &LangTag {
        &self.source_lang
    }

    pub fn target_lang(&self) -> &LangTag {
        &self.target_lang
    }

    /// Re-designates `lang` as the source language, swapping sides if needed.
    pub fn with_source(mut self, lang: &LangTag) -> Result<Self> {
        if lang == &self.source_lang {
            return Ok(self);
        }
        if lang != &self.target_lang {
            return Err(Error::Config(format!(
                "language {lang} does not occur in the corpus"
            )));
        }
        for pair in &mut self.pairs {
            std::mem::swap(&mut pair.source, &mut pair.target);
        }
        std::mem::swap(&mut self.source_lang, &mut self.target_lang);
        Ok(self)
    }

    /// Serializes back to `dapc-tsv`, source record first.
    pub fn to_dapc_tsv(&self) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            for (lang, side) in [
                (&self.source_lang, &pair.source),
                (&self.target_lang, &pair.target),
            ] {
                out.push_str(&pair.id);
                out.push('\t');
                out.push_str(lang.as_str());
                out.push('\t');
                push_joined(&mut out, side.iter().map(Token::surface));
                out.push('\n');
            }
        }
        out
    }
}

fn push_joined<'a>(out: &mut String, words: impl Iterator<Item = &'a str>) {
    for (i, w) in words.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<AlignedCorpus> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::DapcTsv => parse_dapc_tsv(&text),
    }
}

fn parse_dapc_tsv(text: &str) -> Result<AlignedCorpus> {
    let mut langs: Vec<LangTag> = Vec::new();
    let mut order: Vec<String> = Vec::new();
    // id -> (lang -> tokens)
    let mut sides: HashMap<String, Vec<(LangTag, Vec<Token>)>> = HashMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(Error::parse(lineno, "empty document id"));
        }
        let lang = LangTag::new(fields[1]).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if !langs.contains(&lang) {
            if langs.len() == 2 {
                return Err(Error::Format(format!(
                    "line {lineno}: third language tag {lang} (corpus already has {} and {})",
                    langs[0], langs[1]
                )));
            }
            langs.push(lang.clone());
        }
        let tokens = fields[2]
            .split_whitespace()
            .map(|w| Token::new(lang.clone(), w))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(lineno, e.to_string()))?;

        let entry = sides.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Vec::new()
        });
        if entry.iter().any(|(l, _)| l == &lang) {
            return Err(Error::Format(format!(
                "line {lineno}: duplicate record for document {id:?} in language {lang}"
            )));
        }
        entry.push((lang, tokens));
    }

    if langs.len() < 2 {
        if let Some(id) = order.first() {
            return Err(Error::Alignment(id.clone()));
        }
        return Err(Error::Format("corpus has no document pairs".into()));
    }
    let (source_lang, target_lang) = (langs[0].clone(), langs[1].clone());

    let mut pairs = Vec::with_capacity(order.len());
    for id in order {
        let mut records = sides.remove(&id).unwrap_or_default();
        if records.len() != 2 {
            return Err(Error::Alignment(id));
        }
        let mut take = |lang: &LangTag| {
            let pos = records.iter().position(|(l, _)| l == lang).unwrap();
            records.swap_remove(pos).1
        };
        let source = take(&source_lang);
        let target = take(&target_lang);
        pairs.push(DocumentPair { id, source, target });
    }
    AlignedCorpus::new(pairs, source_lang, target_lang)
}

/// Per-language token types with raw counts, filtered by a minimum count.
///
/// Indices are dense and assigned in descending count order, ties broken by
/// `(lang, surface)`.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    counts: Vec<u64>,
    index: HashMap<Token, usize>,
    min_count: u64,
    totals: BTreeMap<LangTag, u64>,
}

impl Vocabulary {
    /// Counts every token yielded by `tokens` and keeps the types occurring at
    /// least `min_count` times.
    pub fn from_tokens<'a>(
        tokens: impl IntoIterator<Item = &'a Token>,
        min_count: u64,
    ) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut tally: HashMap<&Token, u64> = HashMap::new();
        for t in tokens {
            *tally.entry(t).or_default() += 1;
        }
        let mut kept: Vec<(&Token, u64)> =
            tally.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::Config(format!(
                "no token type occurs at least {min_count} times"
            )));
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut totals = BTreeMap::new();
        let mut out_tokens = Vec::with_capacity(kept.len());
        let mut counts = Vec::with_capacity(kept.len());
        let mut index = HashMap::with_capacity(kept.len());
        for (i, (t, c)) in kept.into_iter().enumerate() {
            *totals.entry(t.lang().clone()).or_default() += c;
            index.insert(t.clone(), i);
            out_tokens.push(t.clone());
            counts.push(c);
        }
        Ok(Vocabulary {
            tokens: out_tokens,
            counts,
            index,
            min_count,
            totals,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index_of(&self, token: &Token) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &Token) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Retained tokens of one language.
    pub fn total_tokens(&self, lang: &LangTag) -> u64 {
        self.totals.get(lang).copied().unwrap_or(0)
    }

    /// Retained tokens of both languages pooled.
    pub fn total(&self) -> u64 {
        self.totals.values().sum()
    }
}

pub fn build_vocabulary(corpus: &AlignedCorpus, min_count: u64) -> Result<Vocabulary> {
    Vocabulary::from_tokens(corpus.pairs().iter().flat_map(|p| p.tokens()), min_count)
}

/// Drops out-of-vocabulary tokens, keeping the order of the survivors.
pub fn filter_pair(pair: &DocumentPair, vocab: &Vocabulary) -> DocumentPair {
    let keep = |side: &[Token]| {
        side.iter()
            .filter(|t| vocab.contains(t))
            .cloned()
            .collect::<Vec<_>>()
    };
    DocumentPair {
        id: pair.id.clone(),
        source: keep(&pair.source),
        target: keep(&pair.target),
    }
}

pub fn filter_corpus(corpus: &AlignedCorpus, vocab: &Vocabulary) -> AlignedCorpus {
    AlignedCorpus {
        pairs: corpus.pairs.iter().map(|p| filter_pair(p, vocab)).collect(),
        source_lang: corpus.source_lang.clone(),
        target_lang: corpus.target_lang.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(s: &str) -> Token {
        Token::parse(s).unwrap()
    }

    const TOY: &str = "# toy pair\n\
        d1\ten\tFrodo Sam orcs goblins Mordor ring\n\
        d1\tes\tanillo orcos mago\n";

    #[test]
    fn two_pairs_load_in_file_order() {
        let text = "b\ten\tx y\na\ten\tz\nb\tes\tp\na\tes\tq r\n";
        let corpus = AlignedCorpus::parse(text).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.pairs()[0].id, "b");
        assert_eq!(corpus.pairs()[1].id, "a");
        assert_eq!(corpus.source_lang().as_str(), "en");
        assert_eq!(corpus.pairs()[1].target, vec![tok("es:q"), tok("es:r")]);
    }

    #[test]
    fn toy_pair_round_trips() {
        let corpus = AlignedCorpus::parse(TOY).unwrap();
        let pair = &corpus.pairs()[0];
        assert_eq!(pair.source_len(), 6);
        assert_eq!(pair.target_len(), 3);
        assert_eq!(pair.source[0], tok("en:Frodo"));
        let again = AlignedCorpus::parse(&corpus.to_dapc_tsv()).unwrap();
        assert_eq!(again, corpus);
    }

    #[test]
    fn lone_record_is_an_alignment_error() {
        let text = "d1\ten\ta\nd1\tes\tb\nd7\ten\tc d\n";
        match AlignedCorpus::parse(text) {
            Err(Error::Alignment(id)) => assert_eq!(id, "d7"),
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let text = "d1\ten\ta\nd1\tes\n";
        match AlignedCorpus::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn third_language_is_rejected() {
        let text = "d1\ten\ta\nd1\tes\tb\nd2\tit\tc\n";
        assert!(matches!(AlignedCorpus::parse(text), Err(Error::Format(_))));
    }

    #[test]
    fn duplicate_id_lang_is_rejected() {
        let text = "d1\ten\ta\nd1\ten\tb\nd1\tes\tc\n";
        assert!(matches!(AlignedCorpus::parse(text), Err(Error::Format(_))));
    }

    #[test]
    fn empty_side_is_allowed() {
        let corpus = AlignedCorpus::parse("d1\ten\t\nd1\tes\tx\n").unwrap();
        assert_eq!(corpus.pairs()[0].source_len(), 0);
        assert_eq!(corpus.pairs()[0].target_len(), 1);
    }

    #[test]
    fn with_source_swaps_sides() {
        let corpus = AlignedCorpus::parse(TOY)
            .unwrap()
            .with_source(&LangTag::new("es").unwrap())
            .unwrap();
        assert_eq!(corpus.source_lang().as_str(), "es");
        assert_eq!(corpus.pairs()[0].source_len(), 3);
    }

    #[test]
    fn token_notation() {
        let t = tok("es:reina");
        assert_eq!(t.lang().as_str(), "es");
        assert_eq!(t.surface(), "reina");
        assert_eq!(t.to_string(), "es:reina");
        assert!(Token::parse("reina").is_err());
        assert!(Token::parse(":reina").is_err());
        assert!(Token::parse("es:").is_err());
        // only the first colon separates
        assert_eq!(tok("en:a:b").surface(), "a:b");
    }

    fn corpus_from(docs: &[(&str, &str)]) -> AlignedCorpus {
        let mut text = String::new();
        for (i, (s, t)) in docs.iter().enumerate() {
            text.push_str(&format!("d{i}\ten\t{s}\nd{i}\tes\t{t}\n"));
        }
        AlignedCorpus::parse(&text).unwrap()
    }

    #[test]
    fn min_count_threshold_boundary() {
        let corpus = corpus_from(&[("dog dog dog cat cat", "x"), ("dog dog cat cat", "y")]);
        let vocab = build_vocabulary(&corpus, 5).unwrap();
        assert_eq!(vocab.len(), 1);
        assert!(vocab.contains(&tok("en:dog")));
        assert!(!vocab.contains(&tok("en:cat")));
        assert_eq!(vocab.count(0), 5);
        assert_eq!(vocab.total(), 5);
    }

    #[test]
    fn min_count_one_keeps_every_type() {
        let corpus = corpus_from(&[("a b a", "x y"), ("c", "x")]);
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(vocab.len(), 5);
        assert_eq!(vocab.total_tokens(&LangTag::new("en").unwrap()), 4);
        assert_eq!(vocab.total_tokens(&LangTag::new("es").unwrap()), 3);
    }

    #[test]
    fn index_order_is_count_then_lexicographic() {
        let corpus = corpus_from(&[("b a c c", "a a")]);
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        let order: Vec<String> = vocab.tokens().iter().map(|t| t.to_string()).collect();
        assert_eq!(order, ["en:c", "es:a", "en:a", "en:b"]);
    }

    #[test]
    fn empty_vocabulary_is_a_config_error() {
        let corpus = corpus_from(&[("a", "b")]);
        assert!(matches!(build_vocabulary(&corpus, 2), Err(Error::Config(_))));
        assert!(matches!(build_vocabulary(&corpus, 0), Err(Error::Config(_))));
    }

    #[test]
    fn counts_match_independent_tally() {
        let corpus = corpus_from(&[
            ("a b c a b a", "x y x"),
            ("c c d", "y y z z"),
            ("a d d d", "x"),
        ]);
        let mut oracle: BTreeMap<String, u64> = BTreeMap::new();
        for pair in corpus.pairs() {
            for t in pair.source.iter().chain(&pair.target) {
                *oracle.entry(format!("{}:{}", t.lang(), t.surface())).or_default() += 1;
            }
        }
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(vocab.len(), oracle.len());
        for (key, count) in oracle {
            let i = vocab.index_of(&tok(&key)).unwrap();
            assert_eq!(vocab.count(i), count, "{key}");
        }
    }

    #[test]
    fn filter_identity_and_empty() {
        let corpus = corpus_from(&[("a b", "x"), ("q r", "s")]);
        let all = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(filter_pair(&corpus.pairs()[0], &all), corpus.pairs()[0]);

        let only_first = Vocabulary::from_tokens(corpus.pairs()[0].tokens(), 1).unwrap();
        let filtered = filter_pair(&corpus.pairs()[1], &only_first);
        assert!(filtered.source.is_empty() && filtered.target.is_empty());
    }

    #[test]
    fn filter_matches_membership_oracle() {
        let corpus = corpus_from(&[("a b a c b a", "x y x"), ("a c", "y z")]);
        let vocab = build_vocabulary(&corpus, 2).unwrap();
        let pair = &corpus.pairs()[0];
        let out = filter_pair(pair, &vocab);
        let keep: Vec<Token> = pair
            .source
            .iter()
            .filter(|t| ["en:a", "en:b", "en:c"].contains(&t.to_string().as_str()))
            .cloned()
            .collect();
        assert_eq!(out.source, keep);
        assert_eq!(out.target, vec![tok("es:x"), tok("es:y"), tok("es:x")]);
    }

    fn arb_corpus() -> impl Strategy<Value = AlignedCorpus> {
        let side = prop::collection::vec(0u8..6, 0..20);
        prop::collection::vec((side.clone(), side), 1..6).prop_map(|docs| {
            let en = LangTag::new("en").unwrap();
            let es = LangTag::new("es").unwrap();
            let pairs = docs
                .into_iter()
                .enumerate()
                .map(|(i, (s, t))| DocumentPair {
                    id: format!("d{i}"),
                    source: s
                        .iter()
                        .map(|w| Token::new(en.clone(), format!("w{w}")).unwrap())
                        .collect(),
                    target: t
                        .iter()
                        .map(|w| Token::new(es.clone(), format!("w{w}")).unwrap())
                        .collect(),
                })
                .collect();
            AlignedCorpus::new(pairs, en, es).unwrap()
        })
    }

    proptest! {
        #[test]
        fn filter_is_idempotent(corpus in arb_corpus(), min_count in 1u64..4) {
            if let Ok(vocab) = build_vocabulary(&corpus, min_count) {
                for pair in corpus.pairs() {
                    let once = filter_pair(pair, &vocab);
                    prop_assert_eq!(filter_pair(&once, &vocab), once.clone());
                    prop_assert!(once.tokens().all(|t| vocab.count(vocab.index_of(t).unwrap()) >= min_count));
                }
            }
        }

        #[test]
        fn min_count_one_filter_is_identity(corpus in arb_corpus()) {
            if let Ok(vocab) = build_vocabulary(&corpus, 1) {
                for pair in corpus.pairs() {
                    prop_assert_eq!(&filter_pair(pair, &vocab), pair);
                }
            }
        }
    }
}
