//! Bilingual lexicon extraction and in-context translation evaluation.
//!
//! Accuracy is always computed over the full test set: items whose words are
//! missing from the space count as wrong and are reported through
//! `coverage`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::context::{rank_candidates, ContextBag, ContextScorerConfig};
use crate::corpus::Token;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::space::{cosine, nearest_cross, rank_order, EmbeddingSpace};

/// χ² critical value for one degree of freedom at α = 0.05.
pub const CHI2_CRITICAL_05: f64 = 3.841;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BleTestSet {
    pub pairs: Vec<(Token, Token)>,
}

impl BleTestSet {
    pub fn new(pairs: Vec<(Token, Token)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (s, _) in &pairs {
            if !seen.insert(s) {
                return Err(Error::Format(format!("source word {s} listed twice")));
            }
        }
        Ok(BleTestSet { pairs })
    }

    /// `source_lang:source<TAB>target_lang:gold` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::parse(i + 1, format!("expected 2 fields, found {}", fields.len())));
            }
            let parse = |f: &str| Token::parse(f.trim()).map_err(|e| Error::parse(i + 1, e.to_string()));
            pairs.push((parse(fields[0])?, parse(fields[1])?));
        }
        BleTestSet::new(pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        BleTestSet::parse(&fsutil::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwtcInstance {
    pub pivot: Token,
    pub gold: Token,
    pub candidates: Vec<Token>,
    pub sentence: Vec<Token>,
}

impl SwtcInstance {
    pub fn new(pivot: Token, gold: Token, candidates: Vec<Token>, sentence: Vec<Token>) -> Result<Self> {
        if !candidates.contains(&gold) {
            return Err(Error::Format(format!("gold {gold} is not among the candidates")));
        }
        Ok(SwtcInstance {
            pivot,
            gold,
            candidates,
            sentence,
        })
    }

    pub fn sense_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn bag(&self) -> ContextBag {
        ContextBag::from_sentence(&self.pivot, &self.sentence)
    }

    fn to_line(&self) -> String {
        let join = |ts: &[Token], sep: &str| ts.iter().map(Token::to_string).collect::<Vec<_>>().join(sep);
        format!(
            "{}\t{}\t{}\t{}\n",
            self.pivot,
            self.gold,
            join(&self.candidates, ","),
            join(&self.sentence, " ")
        )
    }
}

/// `pivot<TAB>gold<TAB>c1,c2,...<TAB>sentence tokens` per line.
pub fn parse_swtc(text: &str) -> Result<Vec<SwtcInstance>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |e: Error| Error::parse(i + 1, e.to_string());
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(i + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let pivot = Token::parse(fields[0]).map_err(err)?;
        let gold = Token::parse(fields[1]).map_err(err)?;
        let candidates = fields[2]
            .split(',')
            .filter(|c| !c.is_empty())
            .map(Token::parse)
            .collect::<Result<Vec<_>>>()
            .map_err(err)?;
        let sentence = fields[3]
            .split_whitespace()
            .map(Token::parse)
            .collect::<Result<Vec<_>>>()
            .map_err(err)?;
        out.push(SwtcInstance::new(pivot, gold, candidates, sentence).map_err(err)?);
    }
    Ok(out)
}

pub fn load_swtc(path: &Path) -> Result<Vec<SwtcInstance>> {
    parse_swtc(&fsutil::read_to_string(path)?)
}

pub fn write_swtc(instances: &[SwtcInstance]) -> String {
    instances.iter().map(SwtcInstance::to_line).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub correct: Vec<bool>,
    /// Items whose required words were all found in the space.
    pub covered: Vec<bool>,
    pub acc1: f64,
    pub coverage: f64,
}

impl EvalResult {
    fn from_items(correct: Vec<bool>, covered: Vec<bool>) -> Self {
        let n = correct.len() as f64;
        let acc1 = correct.iter().filter(|&&c| c).count() as f64 / n;
        let coverage = covered.iter().filter(|&&c| c).count() as f64 / n;
        EvalResult {
            correct,
            covered,
            acc1,
            coverage,
        }
    }

    pub fn len(&self) -> usize {
        self.correct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.correct.is_empty()
    }

    /// One `0`/`1` per line.
    pub fn bits_text(&self) -> String {
        self.correct.iter().map(|&c| if c { "1\n" } else { "0\n" }).collect()
    }
}

pub fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::parse(i + 1, format!("expected 0 or 1, found {other:?}"))),
        })
        .collect()
}

pub fn ble_evaluate(space: &EmbeddingSpace, test: &BleTestSet) -> Result<EvalResult> {
    if test.pairs.is_empty() {
        return Err(Error::Config("empty BLE test set".into()));
    }
    let mut correct = Vec::with_capacity(test.pairs.len());
    let mut covered = Vec::with_capacity(test.pairs.len());
    for (source, gold) in &test.pairs {
        if !space.contains(source) {
            correct.push(false);
            covered.push(false);
            continue;
        }
        covered.push(true);
        let hit = match nearest_cross(space, source) {
            Ok(t) => &t == gold,
            // zero-norm source or no other-language words
            Err(Error::UndefinedSimilarity) | Err(Error::Domain(_)) => false,
            Err(e) => return Err(e),
        };
        correct.push(hit);
    }
    Ok(EvalResult::from_items(correct, covered))
}

fn check_instances(instances: &[SwtcInstance]) -> Result<()> {
    if instances.is_empty() {
        Err(Error::Config("empty SWTC instance list".into()))
    } else {
        Ok(())
    }
}

fn instance_covered(space: &EmbeddingSpace, inst: &SwtcInstance) -> bool {
    space.contains(&inst.pivot) && inst.candidates.iter().all(|c| space.contains(c))
}

/// Ranks each instance's candidates in context. Instances with an unknown
/// pivot or candidate, or (for interpolation with λ > 0) with no known context
/// word, count as wrong and uncovered.
pub fn swtc_evaluate(
    space: &EmbeddingSpace,
    instances: &[SwtcInstance],
    cfg: &ContextScorerConfig,
) -> Result<EvalResult> {
    check_instances(instances)?;
    cfg.validate()?;
    let mut correct = Vec::with_capacity(instances.len());
    let mut covered = Vec::with_capacity(instances.len());
    for inst in instances {
        if !instance_covered(space, inst) {
            correct.push(false);
            covered.push(false);
            continue;
        }
        match rank_candidates(space, &inst.pivot, &inst.bag(), &inst.candidates, cfg) {
            Ok(ranked) => {
                correct.push(ranked[0].0 == inst.gold);
                covered.push(true);
            }
            Err(Error::EmptyContext) | Err(Error::UndefinedSimilarity) => {
                correct.push(false);
                covered.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EvalResult::from_items(correct, covered))
}

/// Picks the candidate closest to the pivot, ignoring the sentence.
pub fn no_context_baseline(space: &EmbeddingSpace, instances: &[SwtcInstance]) -> Result<EvalResult> {
    check_instances(instances)?;
    let mut correct = Vec::with_capacity(instances.len());
    let mut covered = Vec::with_capacity(instances.len());
    for inst in instances {
        if !instance_covered(space, inst) {
            correct.push(false);
            covered.push(false);
            continue;
        }
        let w = space.vector(&inst.pivot)?;
        let scored: Result<Vec<(Token, f64)>> = inst
            .candidates
            .iter()
            .map(|c| Ok((c.clone(), cosine(w, space.vector(c)?)?)))
            .collect();
        match scored {
            Ok(mut scored) => {
                scored.sort_by(rank_order);
                correct.push(scored[0].0 == inst.gold);
                covered.push(true);
            }
            Err(Error::UndefinedSimilarity) => {
                correct.push(false);
                covered.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EvalResult::from_items(correct, covered))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McNemar {
    /// a right, b wrong
    pub b10: usize,
    /// a wrong, b right
    pub b01: usize,
    pub chi2: f64,
    pub significant: bool,
}

/// Continuity-corrected McNemar test over paired per-item correctness.
pub fn mcnemar(a: &[bool], b: &[bool]) -> Result<McNemar> {
    if a.len() != b.len() {
        return Err(Error::Pairing(a.len(), b.len()));
    }
    let b10 = a.iter().zip(b).filter(|&(&x, &y)| x && !y).count();
    let b01 = a.iter().zip(b).filter(|&(&x, &y)| !x && y).count();
    let discordant = b10 + b01;
    let chi2 = if discordant == 0 {
        0.0
    } else {
        let diff = (b10 as f64 - b01 as f64).abs() - 1.0;
        diff * diff / discordant as f64
    };
    Ok(McNemar {
        b10,
        b01,
        chi2,
        significant: chi2 > CHI2_CRITICAL_05,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SenseBucket {
    pub correct: usize,
    pub total: usize,
}

impl SenseBucket {
    pub fn acc1(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Accuracy per candidate-inventory size.
pub fn acc_by_sense_count(result: &EvalResult, instances: &[SwtcInstance]) -> Result<BTreeMap<usize, SenseBucket>> {
    if result.len() != instances.len() {
        return Err(Error::Pairing(result.len(), instances.len()));
    }
    let mut buckets: BTreeMap<usize, SenseBucket> = BTreeMap::new();
    for (inst, &ok) in instances.iter().zip(&result.correct) {
        let b = buckets
            .entry(inst.sense_count())
            .or_insert(SenseBucket { correct: 0, total: 0 });
        b.total += 1;
        b.correct += ok as usize;
    }
    Ok(buckets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ContextMethod;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tok(s: &str) -> Token {
        Token::parse(s).unwrap()
    }

    fn space(rows: &[(&str, [f32; 2])]) -> EmbeddingSpace {
        EmbeddingSpace::new(
            2,
            rows.iter().map(|(t, _)| tok(t)).collect(),
            rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
        )
        .unwrap()
    }

    fn random_space(seed: u64) -> EmbeddingSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tokens = Vec::new();
        for i in 0..10 {
            tokens.push(tok(&format!("es:s{i}")));
            tokens.push(tok(&format!("en:t{i}")));
        }
        let vectors = (0..tokens.len() * 6).map(|_| rng.random_range(-1.0..1.0)).collect();
        EmbeddingSpace::new(6, tokens, vectors).unwrap()
    }

    fn random_instances(seed: u64, n: usize) -> Vec<SwtcInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let k = rng.random_range(2..=4);
                let mut cands: Vec<Token> = Vec::new();
                while cands.len() < k {
                    let c = tok(&format!("en:t{}", rng.random_range(0..10)));
                    if !cands.contains(&c) {
                        cands.push(c);
                    }
                }
                let gold = cands[rng.random_range(0..k)].clone();
                let pivot = tok(&format!("es:s{}", rng.random_range(0..10)));
                let sentence = (0..rng.random_range(0..5))
                    .map(|_| tok(&format!("es:s{}", rng.random_range(0..10))))
                    .chain(std::iter::once(pivot.clone()))
                    .collect();
                SwtcInstance::new(pivot, gold, cands, sentence).unwrap()
            })
            .collect()
    }

    #[test]
    fn ble_perfect_and_oov() {
        let s = space(&[
            ("es:a", [1.0, 0.0]),
            ("es:b", [0.0, 1.0]),
            ("en:x", [0.9, 0.1]),
            ("en:y", [0.1, 0.9]),
        ]);
        let test = BleTestSet::parse("es:a\ten:x\nes:b\ten:y\n").unwrap();
        let r = ble_evaluate(&s, &test).unwrap();
        assert_eq!((r.acc1, r.coverage), (1.0, 1.0));

        let oov = BleTestSet::parse("es:q\ten:x\nes:r\ten:y\n").unwrap();
        let r = ble_evaluate(&s, &oov).unwrap();
        assert_eq!((r.acc1, r.coverage), (0.0, 0.0));

        let mixed = BleTestSet::parse("es:a\ten:y\nes:b\ten:y\nes:z\ten:x\n").unwrap();
        let r = ble_evaluate(&s, &mixed).unwrap();
        assert_eq!(r.correct, [false, true, false]);
        assert!((r.acc1 - 1.0 / 3.0).abs() < 1e-12);

        assert!(matches!(ble_evaluate(&s, &BleTestSet { pairs: vec![] }), Err(Error::Config(_))));
    }

    #[test]
    fn ble_format() {
        assert!(BleTestSet::parse("es:a\ten:x\nes:a\ten:y\n").is_err());
        assert!(matches!(BleTestSet::parse("es:a en:x\n"), Err(Error::Parse { line: 1, .. })));
        let t = BleTestSet::parse("es:a\ten:x\n").unwrap();
        assert_eq!(BleTestSet::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn swtc_format() {
        let text = "es:p\ten:b\ten:a,en:b\tes:c es:p es:d\n";
        let inst = parse_swtc(text).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].sense_count(), 2);
        assert_eq!(write_swtc(&inst), text);
        assert!(parse_swtc("es:p\ten:z\ten:a,en:b\tes:c\n").is_err());
        assert!(matches!(parse_swtc("es:p\ten:a\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_context_add_melamud_picks_nearest() {
        let s = space(&[("es:p", [1.0, 0.0]), ("en:a", [0.9, 0.2]), ("en:b", [0.0, 1.0])]);
        let inst = vec![SwtcInstance::new(tok("es:p"), tok("en:a"), vec![tok("en:a"), tok("en:b")], vec![tok("es:p")]).unwrap()];
        let cfg = ContextScorerConfig { method: ContextMethod::AddMelamud, lambda: 1.0 };
        assert_eq!(swtc_evaluate(&s, &inst, &cfg).unwrap().acc1, 1.0);
        // interpolation with weight on an empty context cannot score it
        let r = swtc_evaluate(&s, &inst, &ContextScorerConfig::interpolated(1.0)).unwrap();
        assert_eq!((r.acc1, r.coverage), (0.0, 0.0));
    }

    #[test]
    fn oov_candidate_disqualifies() {
        let s = space(&[("es:p", [1.0, 0.0]), ("en:a", [0.9, 0.2])]);
        let inst = vec![SwtcInstance::new(tok("es:p"), tok("en:a"), vec![tok("en:a"), tok("en:gone")], vec![]).unwrap()];
        let r = no_context_baseline(&s, &inst).unwrap();
        assert_eq!((r.acc1, r.coverage), (0.0, 0.0));
        assert!(matches!(no_context_baseline(&s, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn candidate_order_does_not_matter() {
        let s = random_space(4);
        let insts = random_instances(9, 30);
        let cfg = ContextScorerConfig { method: ContextMethod::MultMelamud, lambda: 1.0 };
        let base = swtc_evaluate(&s, &insts, &cfg).unwrap();
        let reversed: Vec<SwtcInstance> = insts
            .iter()
            .map(|i| {
                let mut j = i.clone();
                j.candidates.reverse();
                j
            })
            .collect();
        assert_eq!(swtc_evaluate(&s, &reversed, &cfg).unwrap(), base);
    }

    #[test]
    fn single_candidate_baseline_is_perfect() {
        let s = random_space(1);
        let insts: Vec<SwtcInstance> = (0..5)
            .map(|i| {
                let t = tok(&format!("en:t{i}"));
                SwtcInstance::new(tok(&format!("es:s{i}")), t.clone(), vec![t], vec![]).unwrap()
            })
            .collect();
        assert_eq!(no_context_baseline(&s, &insts).unwrap().acc1, 1.0);
    }

    #[test]
    fn baseline_matches_argmax_oracle_and_lambda_zero() {
        for seed in 0..5 {
            let s = random_space(seed);
            let insts = random_instances(seed + 100, 20);
            let base = no_context_baseline(&s, &insts).unwrap();
            for (inst, &ok) in insts.iter().zip(&base.correct) {
                let w = s.vector(&inst.pivot).unwrap();
                let best = inst
                    .candidates
                    .iter()
                    .max_by(|a, b| {
                        let ca = cosine(w, s.vector(a).unwrap()).unwrap();
                        let cb = cosine(w, s.vector(b).unwrap()).unwrap();
                        ca.partial_cmp(&cb).unwrap().then(b.cmp(a))
                    })
                    .unwrap();
                assert_eq!(ok, best == &inst.gold);
            }
            let interp0 = swtc_evaluate(&s, &insts, &ContextScorerConfig::interpolated(0.0)).unwrap();
            assert_eq!(interp0, base);
        }
    }

    #[test]
    fn mcnemar_values() {
        let same = [true, false, true];
        let r = mcnemar(&same, &same).unwrap();
        assert_eq!(r.chi2, 0.0);
        assert!(!r.significant);

        let mut a = vec![true; 10];
        a.extend([false; 2]);
        let mut b = vec![false; 10];
        b.extend([true; 2]);
        let r = mcnemar(&a, &b).unwrap();
        assert_eq!((r.b10, r.b01), (10, 2));
        assert!((r.chi2 - 49.0 / 12.0).abs() < 1e-12);
        assert!(r.significant);
        assert_eq!(mcnemar(&b, &a).unwrap().chi2, r.chi2);

        // only discordant pairs matter
        let r = mcnemar(&[true, true, false], &[true, true, false]).unwrap();
        assert_eq!(r.chi2, 0.0);
        assert!(matches!(mcnemar(&[true], &[]), Err(Error::Pairing(1, 0))));
    }

    #[test]
    fn bits_round_trip() {
        let r = EvalResult::from_items(vec![true, false, true], vec![true; 3]);
        assert_eq!(parse_bits(&r.bits_text()).unwrap(), r.correct);
        assert!(parse_bits("1\n2\n").is_err());
    }

    #[test]
    fn sense_breakdown() {
        let s = random_space(2);
        let insts = random_instances(3, 40);
        let r = no_context_baseline(&s, &insts).unwrap();
        let buckets = acc_by_sense_count(&r, &insts).unwrap();
        // group-by oracle
        for (&k, b) in &buckets {
            let idx: Vec<usize> = (0..insts.len()).filter(|&i| insts[i].sense_count() == k).collect();
            assert_eq!(b.total, idx.len());
            assert_eq!(b.correct, idx.iter().filter(|&&i| r.correct[i]).count());
        }
        let weighted: f64 = buckets.values().map(|b| b.acc1() * b.total as f64).sum::<f64>() / insts.len() as f64;
        assert!((weighted - r.acc1).abs() < 1e-12);

        let two_only: Vec<SwtcInstance> = insts.iter().filter(|i| i.sense_count() == 2).cloned().collect();
        let r2 = no_context_baseline(&s, &two_only).unwrap();
        let b2 = acc_by_sense_count(&r2, &two_only).unwrap();
        assert_eq!(b2.keys().copied().collect::<Vec<_>>(), [2]);
    }
}
