//! Compression, balance, trade-off, run-length and error-rate metrics.
//!
//! Entropies are in bits. A distribution's support is the whole vocabulary it is
//! measured over, so unused tokens pull the normalized entropy down.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bpe::MergeTable;
use crate::codec::encode_corpus;
use crate::corpus::{BaseVocabulary, Corpus, UnitId, UnitSequence};
use crate::error::{Error, Result};

/// Empirical probability mass over token ids `0..support_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    /// Normalizes raw counts; index is the token id.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::contract("cannot build a distribution from zero occurrences"));
        }
        let total = total as f64;
        Ok(Self {
            mass: counts.iter().map(|&c| c as f64 / total).collect(),
        })
    }

    /// Takes probabilities as given; they must be non-negative and sum to 1 ± 1e-9.
    pub fn from_probabilities(mass: Vec<f64>) -> Result<Self> {
        if mass.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::contract("probabilities must be finite and non-negative"));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn probability(&self, id: UnitId) -> f64 {
        self.mass.get(id as usize).copied().unwrap_or(0.0)
    }
}

/// Relative frequency of every id over all occurrences in `sequences`, with
/// support `vocab_size`.
pub fn token_distribution<S: AsRef<[UnitId]>>(sequences: &[S], vocab_size: usize) -> Result<Distribution> {
    let mut counts = vec![0u64; vocab_size];
    for seq in sequences {
        for &t in seq.as_ref() {
            let slot = counts
                .get_mut(t as usize)
                .ok_or_else(|| Error::contract(format!("id {t} does not fit a vocabulary of size {vocab_size}")))?;
            *slot += 1;
        }
    }
    Distribution::from_counts(&counts).map_err(|_| Error::contract("corpus has no units; distribution undefined"))
}

/// Shannon entropy in bits, with 0·log 0 = 0.
pub fn entropy(d: &Distribution) -> f64 {
    -d.mass.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// H(D) / log2(support size); 1 means perfectly balanced.
pub fn normalized_entropy(d: &Distribution) -> Result<f64> {
    if d.support_size() < 2 {
        return Err(Error::contract(format!(
            "normalized entropy needs a support of at least 2, got {}",
            d.support_size()
        )));
    }
    let n = entropy(d) / (d.support_size() as f64).log2();
    Ok(n.clamp(0.0, 1.0))
}

/// Reduction in mean sequence length, n̂ / k̂.
pub fn reduction(mean_units: f64, mean_tokens: f64) -> Result<f64> {
    if mean_tokens.is_nan() || mean_tokens <= 0.0 {
        return Err(Error::contract(format!(
            "mean token length must be positive, got {mean_tokens}"
        )));
    }
    Ok(mean_units / mean_tokens)
}

/// Relative growth in bits per symbol, log2|Z| / log2|X|.
pub fn bit_increase(base_size: usize, token_size: usize) -> Result<f64> {
    if base_size < 2 || token_size < base_size {
        return Err(Error::contract(format!(
            "bit increase needs 2 <= base size <= token size, got {base_size} and {token_size}"
        )));
    }
    Ok((token_size as f64).log2() / (base_size as f64).log2())
}

pub fn compression(reduction: f64, bit_increase: f64) -> Result<f64> {
    if !(reduction > 0.0 && bit_increase > 0.0) {
        return Err(Error::contract("reduction and bit increase must be positive"));
    }
    Ok(reduction / bit_increase)
}

/// Probability that all `n` independent predictions with error rate `eps` are
/// correct, (1 - eps)^n.
pub fn edge_case_probability(eps: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::contract(format!("error rate must lie in [0, 1], got {eps}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    if eps == 1.0 {
        return Ok(0.0);
    }
    Ok((n as f64 * (-eps).ln_1p()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLengthStats {
    /// Maximal runs of identical units as (unit, length).
    pub runs: Vec<(UnitId, usize)>,
    /// n / number of runs; `None` for an empty sequence.
    pub mean_run_length: Option<f64>,
    pub max_run: usize,
    /// Fraction of units equal to their predecessor, (n - runs) / n.
    pub repetition_fraction: f64,
}

pub fn run_length_stats(seq: &[UnitId]) -> RunLengthStats {
    let runs: Vec<(UnitId, usize)> = seq.chunk_by(|a, b| a == b).map(|run| (run[0], run.len())).collect();
    let n = seq.len();
    RunLengthStats {
        mean_run_length: (n > 0).then(|| n as f64 / runs.len() as f64),
        max_run: runs.iter().map(|r| r.1).max().unwrap_or(0),
        repetition_fraction: if n == 0 {
            0.0
        } else {
            (n - runs.len()) as f64 / n as f64
        },
        runs,
    }
}

/// Mean run length over a whole corpus: total units / total runs.
pub fn corpus_run_length_mean(corpus: &Corpus) -> Option<f64> {
    let runs: usize = corpus
        .sequences()
        .iter()
        .map(|s| s.as_slice().chunk_by(|a, b| a == b).count())
        .sum();
    (runs > 0).then(|| corpus.total_units() as f64 / runs as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EditOps {
    pub distance: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditOps {
    /// distance / |ref|. Undefined (`None`) for an empty reference with a non-empty hypothesis.
    pub fn rate(&self, ref_len: usize) -> Option<f64> {
        match (ref_len, self.distance) {
            (0, 0) => Some(0.0),
            (0, _) => None,
            (r, d) => Some(d as f64 / r as f64),
        }
    }
}

/// Unit-cost Levenshtein alignment of `hyp` against `reference`.
///
/// Among optimal alignments the backtrace prefers match/substitution, then
/// deletion, then insertion.
pub fn edit_distance<T: PartialEq>(reference: &[T], hyp: &[T]) -> EditOps {
    let (n, m) = (reference.len(), hyp.len());
    let width = m + 1;
    let mut dp = vec![0usize; (n + 1) * width];
    for (j, cell) in dp[..width].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        dp[i * width] = i;
        for j in 1..=m {
            let sub = dp[(i - 1) * width + j - 1] + usize::from(reference[i - 1] != hyp[j - 1]);
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + j - 1] + 1;
            dp[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut ops = EditOps {
        distance: dp[n * width + m],
        ..EditOps::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let differs = reference[i - 1] != hyp[j - 1];
            if dp[(i - 1) * width + j - 1] + usize::from(differs) == here {
                ops.substitutions += usize::from(differs);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * width + j] + 1 == here {
            ops.deletions += 1;
            i -= 1;
        } else {
            ops.insertions += 1;
            j -= 1;
        }
    }
    ops
}

/// Word error rate over whitespace-separated words.
pub fn word_error_rate(reference: &str, hyp: &str) -> Option<f64> {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hyp.split_whitespace().collect();
    edit_distance(&r, &h).rate(r.len())
}

/// Character error rate over Unicode scalar values.
pub fn char_error_rate(reference: &str, hyp: &str) -> Option<f64> {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hyp.chars().collect();
    edit_distance(&r, &h).rate(r.len())
}

/// Character error rate between unit sequences rendered as concatenated labels.
pub fn surface_error_rate(
    reference: &UnitSequence,
    hyp: &UnitSequence,
    vocabulary: &BaseVocabulary,
) -> Result<Option<f64>> {
    let render = |s: &UnitSequence| -> Result<String> {
        s.as_slice()
            .iter()
            .map(|&u| {
                vocabulary
                    .label(u)
                    .ok_or_else(|| Error::validation(format!("unit id {u} out of range")))
            })
            .collect()
    };
    Ok(char_error_rate(&render(reference)?, &render(hyp)?))
}

/// Compression and balance figures for one corpus under one merge table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n_hat: f64,
    pub k_hat: f64,
    pub reduction: f64,
    pub bit_increase: f64,
    pub compression: f64,
    pub balance_before: f64,
    pub balance_after: f64,
    pub run_length_mean: f64,
    pub base_vocab: usize,
    pub token_vocab: usize,
}

impl AnalysisReport {
    /// Flat `key=value` lines in field order.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("n_hat", self.n_hat),
            ("k_hat", self.k_hat),
            ("reduction", self.reduction),
            ("bit_increase", self.bit_increase),
            ("compression", self.compression),
            ("balance_before", self.balance_before),
            ("balance_after", self.balance_after),
            ("run_length_mean", self.run_length_mean),
        ] {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "base_vocab={}", self.base_vocab);
        let _ = writeln!(out, "token_vocab={}", self.token_vocab);
        out
    }
}

pub fn analyze(corpus: &Corpus, table: &MergeTable, threads: usize) -> Result<AnalysisReport> {
    let encoded = encode_corpus(corpus, table, threads)?;
    let base_vocab = corpus.vocabulary().len();
    let token_vocab = table.vocab_size();

    let units: Vec<&[UnitId]> = corpus.sequences().iter().map(UnitSequence::as_slice).collect();
    let before = token_distribution(&units, base_vocab)?;
    let after = token_distribution(
        &encoded.sequences.iter().map(|s| s.as_slice()).collect::<Vec<_>>(),
        token_vocab,
    )?;

    let n_hat = corpus.total_units() as f64 / corpus.len() as f64;
    let k_hat = encoded.mean_length.expect("non-empty corpus");
    let reduction = reduction(n_hat, k_hat)?;
    let bit_increase = bit_increase(base_vocab, token_vocab)?;
    Ok(AnalysisReport {
        n_hat,
        k_hat,
        reduction,
        bit_increase,
        compression: compression(reduction, bit_increase)?,
        balance_before: normalized_entropy(&before)?,
        balance_after: normalized_entropy(&after)?,
        run_length_mean: corpus_run_length_mean(corpus).expect("non-empty corpus"),
        base_vocab,
        token_vocab,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::{train, TrainOptions};
    use crate::corpus::{read_corpus, CorpusFormat};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn distribution_examples() {
        // a=0, b=1, c=2
        let d = token_distribution(&[vec![0u32, 0, 1, 1]], 2).unwrap();
        assert_eq!(d.mass(), &[0.5, 0.5]);
        let d = token_distribution(&[vec![0u32, 0, 0, 1]], 3).unwrap();
        assert_eq!(d.mass(), &[0.75, 0.25, 0.0]);
        assert!(token_distribution::<Vec<u32>>(&[], 3).is_err());
        assert!(token_distribution(&[Vec::<u32>::new()], 3).is_err());
        assert!(token_distribution(&[vec![5u32]], 3).is_err());
    }

    #[test]
    fn normalized_entropy_examples() {
        let uniform = Distribution::from_probabilities(vec![0.25; 4]).unwrap();
        assert!(close(normalized_entropy(&uniform).unwrap(), 1.0, 1e-12));

        let mut point = vec![0.0; 8];
        point[3] = 1.0;
        let point = Distribution::from_probabilities(point).unwrap();
        assert_eq!(normalized_entropy(&point).unwrap(), 0.0);

        // H = 0.5*1 + 2*0.25*2 = 1.5 bits; N = 1.5 / log2(3) = 0.946394630357186
        let d = Distribution::from_probabilities(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(close(entropy(&d), 1.5, 1e-15));
        assert!(close(normalized_entropy(&d).unwrap(), 0.946_394_630_357_186, 1e-12));

        let single = Distribution::from_probabilities(vec![1.0]).unwrap();
        assert!(matches!(normalized_entropy(&single), Err(Error::Contract(_))));
        assert!(Distribution::from_probabilities(vec![0.5, 0.4]).is_err());
        assert!(Distribution::from_probabilities(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn reduction_examples() {
        assert!(close(reduction(872.0, 300.0).unwrap(), 2.906_666_666_666_667, 1e-12));
        assert_eq!(reduction(17.5, 17.5).unwrap(), 1.0);
        assert!(reduction(10.0, 0.0).is_err());
    }

    #[test]
    fn bit_increase_examples() {
        // 11 / log2(84) and 14 / log2(1003)
        assert!(close(bit_increase(84, 2048).unwrap(), 1.720_815_671_762_787, 1e-12));
        assert_eq!(bit_increase(84, 84).unwrap(), 1.0);
        assert!(close(bit_increase(1003, 16384).unwrap(), 1.404_197_724_036_447, 1e-12));
        assert!(bit_increase(1, 4).is_err());
        assert!(bit_increase(84, 40).is_err());
    }

    #[test]
    fn compression_examples() {
        let c = compression(2.90, bit_increase(84, 2048).unwrap()).unwrap();
        assert!(close(c, 1.685, 5e-4), "{c}");
        let c = compression(3.20, bit_increase(1003, 16384).unwrap()).unwrap();
        assert!(close(c, 2.279, 5e-4), "{c}");
        assert_eq!(compression(1.0, 1.0).unwrap(), 1.0);
        assert!(compression(0.0, 1.0).is_err());
    }

    #[test]
    fn edge_case_probability_examples() {
        let p1 = edge_case_probability(0.00097, 872).unwrap();
        assert!(close(p1, 0.4290, 5e-5), "{p1}");
        let p2 = edge_case_probability(0.0014, 300).unwrap();
        assert!(close(p2, 0.6569, 5e-5), "{p2}");
        assert_eq!(edge_case_probability(0.0, 10_000).unwrap(), 1.0);
        assert_eq!(edge_case_probability(0.3, 0).unwrap(), 1.0);
        assert_eq!(edge_case_probability(1.0, 3).unwrap(), 0.0);
        assert!(edge_case_probability(1.2, 3).is_err());
        assert!(edge_case_probability(f64::NAN, 3).is_err());
    }

    #[test]
    fn run_length_examples() {
        let s = run_length_stats(&[0, 0, 0, 1, 1, 2]);
        assert_eq!(s.runs, vec![(0, 3), (1, 2), (2, 1)]);
        assert_eq!(s.mean_run_length, Some(2.0));
        assert_eq!(s.max_run, 3);
        assert!(close(s.repetition_fraction, 0.5, 1e-15));

        assert_eq!(run_length_stats(&[4, 1, 7, 2]).mean_run_length, Some(1.0));

        let aaabbbbcccccdd = [0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3];
        let s = run_length_stats(&aaabbbbcccccdd);
        assert_eq!(s.runs.iter().map(|r| r.1).collect::<Vec<_>>(), vec![3, 4, 5, 2]);
        assert_eq!(s.mean_run_length, Some(3.5));

        let empty = run_length_stats(&[]);
        assert_eq!((empty.mean_run_length, empty.max_run), (None, 0));
    }

    #[test]
    fn edit_distance_examples() {
        let r = ["a", "b", "c", "d"];
        assert_eq!(edit_distance(&r, &r).distance, 0);
        assert_eq!(edit_distance(&r, &r).rate(4), Some(0.0));

        let ops = edit_distance(&r, &["a", "x", "c"]);
        assert_eq!(
            ops,
            EditOps {
                distance: 2,
                substitutions: 1,
                insertions: 0,
                deletions: 1
            }
        );
        assert_eq!(word_error_rate("a b c d", "a x c"), Some(0.5));

        let ops = edit_distance(&['a', 'b', 'c'], &[]);
        assert_eq!((ops.distance, ops.deletions), (3, 3));
        assert_eq!(char_error_rate("abc", ""), Some(1.0));

        assert_eq!(char_error_rate("", "x"), None);
        assert_eq!(char_error_rate("", ""), Some(0.0));
        assert_eq!(edit_distance(&[] as &[u8], &[1, 2]).insertions, 2);
    }

    #[test]
    fn surface_rate_uses_concatenated_labels() {
        let v = BaseVocabulary::from_labels(vec!["AE1".into(), "K".into(), "T".into()], None).unwrap();
        let r = UnitSequence::new(vec![1, 0, 2]);
        let h = UnitSequence::new(vec![1, 0]);
        // "KAE1T" vs "KAE1": one deletion over five characters.
        assert_eq!(surface_error_rate(&r, &h, &v).unwrap(), Some(0.2));
    }

    fn corpus(text: &str) -> Corpus {
        read_corpus(text.as_bytes(), CorpusFormat::Symbolic, None, Some("_"), "t").unwrap()
    }

    #[test]
    fn analyze_identity_table() {
        let c = corpus("a a b c _ a b\nc c c a b");
        let table = MergeTable::identity(c.vocabulary().clone());
        let r = analyze(&c, &table, 1).unwrap();
        assert_eq!(r.reduction, 1.0);
        assert_eq!(r.compression, 1.0);
        assert_eq!(r.balance_before, r.balance_after);
        assert_eq!(r.n_hat, r.k_hat);
        // runs: [a a][b][c][_][a][b] + [c c c][a][b] -> 12 units / 9 runs
        assert!(close(r.run_length_mean, 12.0 / 9.0, 1e-15));
    }

    #[test]
    fn analyze_trained_table() {
        let c = corpus("a b a b c\na b c a b\n");
        let table = train(&c, &TrainOptions::new(c.vocabulary().len() + 2)).unwrap();
        let r = analyze(&c, &table, 1).unwrap();
        assert_eq!(r.compression, r.reduction / r.bit_increase);
        assert!(r.reduction > 1.0);
        assert_eq!(r.token_vocab, c.vocabulary().len() + 2);

        let text = r.to_key_value();
        let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
        assert_eq!(
            keys,
            [
                "n_hat",
                "k_hat",
                "reduction",
                "bit_increase",
                "compression",
                "balance_before",
                "balance_after",
                "run_length_mean",
                "base_vocab",
                "token_vocab"
            ]
        );
        let json: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(json.as_object().unwrap().len(), 10);
        let empty = corpus("");
        assert!(analyze(&empty, &MergeTable::identity(empty.vocabulary().clone()), 1).is_err());
    }
}
