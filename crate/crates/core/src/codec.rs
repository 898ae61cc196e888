//! Applying a [`MergeTable`] to unit sequences and inverting it.
//!
//! Encoding applies merges by rank: the lowest-rank applicable merge is applied
//! at its leftmost site until nothing applies. Since a merge only creates pairs
//! with higher ranks, this equals running each merge exhaustively left to right
//! in rank order, which is what the trainer does to its corpus.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;

use rayon::prelude::*;

use crate::bpe::MergeTable;
use crate::corpus::{BaseVocabulary, Corpus, UnitId, UnitSequence};
use crate::error::{Error, Result};

/// A sequence of token ids over a merge table's vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    pub tokens: Vec<UnitId>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<UnitId>) -> Self {
        Self { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn as_slice(&self) -> &[UnitId] {
        &self.tokens
    }
}

impl From<Vec<UnitId>> for TokenSequence {
    fn from(tokens: Vec<UnitId>) -> Self {
        Self { tokens }
    }
}

const NIL: u32 = u32::MAX;
const GONE: UnitId = UnitId::MAX;

/// Encodes `seq` with `table`.
pub fn encode(seq: &UnitSequence, table: &MergeTable) -> Result<TokenSequence> {
    seq.validate(table.base())?;
    Ok(TokenSequence::new(encode_units(seq.as_slice(), table)))
}

/// Encodes already-validated units.
pub(crate) fn encode_units(units: &[UnitId], table: &MergeTable) -> Vec<UnitId> {
    let n = units.len();
    if n < 2 || table.merges().is_empty() {
        return units.to_vec();
    }
    let mut symbols = units.to_vec();
    let mut next: Vec<u32> = (1..=n as u32).collect();
    next[n - 1] = NIL;
    let mut prev: Vec<u32> = (0..n as u32).map(|i| i.wrapping_sub(1)).collect();
    prev[0] = NIL;

    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = symbols
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| table.rank_of((w[0], w[1])).map(|r| Reverse((r, i as u32))))
        .collect();
    let merges = table.merges();

    while let Some(Reverse((rank, pos))) = heap.pop() {
        let i = pos as usize;
        let merge = &merges[rank as usize];
        let j = next[i];
        if symbols[i] != merge.left || j == NIL || symbols[j as usize] != merge.right {
            continue;
        }
        let k = next[j as usize];
        symbols[i] = merge.result;
        symbols[j as usize] = GONE;
        next[i] = k;
        if k != NIL {
            prev[k as usize] = pos;
            if let Some(r) = table.rank_of((merge.result, symbols[k as usize])) {
                heap.push(Reverse((r, pos)));
            }
        }
        let p = prev[i];
        if p != NIL {
            if let Some(r) = table.rank_of((symbols[p as usize], merge.result)) {
                heap.push(Reverse((r, p)));
            }
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut i = 0u32;
    while i != NIL {
        out.push(symbols[i as usize]);
        i = next[i as usize];
    }
    out
}

/// Expands every token into its base units.
pub fn decode(tokens: &TokenSequence, table: &MergeTable) -> Result<UnitSequence> {
    let mut units = Vec::with_capacity(tokens.len() * 2);
    for &t in tokens.as_slice() {
        let surface = table.surface(t).ok_or_else(|| {
            Error::validation(format!(
                "token id {t} not in a vocabulary of {} tokens",
                table.vocab_size()
            ))
        })?;
        units.extend_from_slice(surface);
    }
    Ok(UnitSequence::new(units))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCorpus {
    pub sequences: Vec<TokenSequence>,
    /// k̂, the mean number of tokens per sequence; `None` for an empty corpus.
    pub mean_length: Option<f64>,
}

impl EncodedCorpus {
    pub fn total_tokens(&self) -> usize {
        self.sequences.iter().map(TokenSequence::len).sum()
    }
}

/// Encodes every sequence of `corpus`. Output order matches input order for any
/// thread count.
pub fn encode_corpus(corpus: &Corpus, table: &MergeTable, threads: usize) -> Result<EncodedCorpus> {
    check_compatible(corpus.vocabulary(), table)?;
    let sequences: Vec<TokenSequence> = if threads <= 1 {
        corpus
            .sequences()
            .iter()
            .map(|s| TokenSequence::new(encode_units(s.as_slice(), table)))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::contract(format!("cannot start thread pool: {e}")))?;
        pool.install(|| {
            corpus
                .sequences()
                .par_iter()
                .map(|s| TokenSequence::new(encode_units(s.as_slice(), table)))
                .collect()
        })
    };
    let total: usize = sequences.iter().map(TokenSequence::len).sum();
    let mean_length = (!sequences.is_empty()).then(|| total as f64 / sequences.len() as f64);
    Ok(EncodedCorpus { sequences, mean_length })
}

/// A corpus may be encoded with a table trained on the same inventory.
pub(crate) fn check_compatible(vocabulary: &BaseVocabulary, table: &MergeTable) -> Result<()> {
    let base = table.base();
    let same = vocabulary == base || vocabulary.without_boundary() == *base;
    if same {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "corpus vocabulary ({} units) does not match the merge table's base vocabulary ({} units)",
            vocabulary.len(),
            base.len()
        )))
    }
}

/// Writes one tokenized line: token ids, or `+`-joined unit labels when `surfaces` is set.
pub fn write_tokens<W: Write>(writer: &mut W, tokens: &[UnitId], table: &MergeTable, surfaces: bool) -> Result<()> {
    for (i, &t) in tokens.iter().enumerate() {
        if i > 0 {
            writer.write_all(b" ")?;
        }
        if surfaces {
            let label = table
                .surface_label(t)
                .ok_or_else(|| Error::validation(format!("token id {t} out of range")))?;
            writer.write_all(label.as_bytes())?;
        } else {
            write!(writer, "{t}")?;
        }
    }
    writer.write_all(b"\n")?;
    Ok(())
}

/// Parses one line of whitespace-separated token ids.
pub fn parse_tokens(line: &str, lineno: usize, table: &MergeTable) -> Result<TokenSequence> {
    let mut tokens = Vec::new();
    for field in line.split_whitespace() {
        let token: UnitId = field
            .parse()
            .map_err(|_| Error::parse(lineno, format!("expected a token id, found {field:?}")))?;
        if !table.contains(token) {
            return Err(Error::validation(format!(
                "line {lineno}: token id {token} not in a vocabulary of {} tokens",
                table.vocab_size()
            )));
        }
        tokens.push(token);
    }
    Ok(TokenSequence::new(tokens))
}

/// Parses one line of `+`-joined token surfaces straight back into units.
///
/// Surfaces do not always identify a token (two merge paths can spell the same
/// units), but they always identify the units.
pub fn parse_surfaces(line: &str, lineno: usize, base: &BaseVocabulary) -> Result<UnitSequence> {
    let mut units = Vec::new();
    for field in line.split_whitespace() {
        for label in field.split('+') {
            let id = base
                .id_of(label)
                .filter(|&id| !base.is_special(id))
                .ok_or_else(|| Error::validation(format!("line {lineno}: unknown unit label {label:?}")))?;
            units.push(id);
        }
    }
    Ok(UnitSequence::new(units))
}
