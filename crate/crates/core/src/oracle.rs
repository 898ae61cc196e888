//! Reference BPE: a literal, slow transcription of the training loop and of
//! merge application. The optimized trainer and encoder are correct exactly
//! when they agree with these functions.

use std::collections::BTreeMap;

use crate::bpe::{MergeTable, Pair, TrainOptions};
use crate::codec::TokenSequence;
use crate::corpus::{Corpus, UnitId, UnitSequence};
use crate::error::{Error, Result};

/// Recounts every pair and rewrites the whole corpus on every iteration.
pub fn naive_train(corpus: &Corpus, options: &TrainOptions) -> Result<MergeTable> {
    let vocab = corpus.vocabulary();
    if options.target_size <= vocab.len() {
        return Err(Error::Contract(format!(
            "target size {} must exceed the base vocabulary size {}",
            options.target_size,
            vocab.len()
        )));
    }
    let boundary = if options.respect_boundaries {
        vocab.boundary()
    } else {
        None
    };
    let blocked = |t: UnitId| vocab.is_special(t) || Some(t) == boundary;

    let mut seqs: Vec<Vec<UnitId>> = corpus.sequences().iter().map(|s| s.units.clone()).collect();
    let mut pairs: Vec<Pair> = Vec::new();

    while vocab.len() + pairs.len() < options.target_size {
        let mut counts: BTreeMap<Pair, u64> = BTreeMap::new();
        for s in &seqs {
            for i in 1..s.len() {
                let (a, b) = (s[i - 1], s[i]);
                if !blocked(a) && !blocked(b) {
                    *counts.entry((a, b)).or_default() += 1;
                }
            }
        }

        // Ascending pair order with a strict comparison keeps the smallest pair on ties.
        let mut best: Option<(Pair, u64)> = None;
        for (&pair, &count) in &counts {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((pair, count));
            }
        }
        let Some(((a, b), count)) = best else { break };
        if count < options.min_pair_count.max(1) {
            break;
        }

        let new = (vocab.len() + pairs.len()) as UnitId;
        pairs.push((a, b));
        for s in seqs.iter_mut() {
            let mut out = Vec::with_capacity(s.len());
            let mut i = 0;
            while i < s.len() {
                if i + 1 < s.len() && s[i] == a && s[i + 1] == b {
                    out.push(new);
                    i += 2;
                } else {
                    out.push(s[i]);
                    i += 1;
                }
            }
            *s = out;
        }
    }

    let base = if options.respect_boundaries {
        vocab.clone()
    } else {
        vocab.without_boundary()
    };
    MergeTable::from_pairs(base, pairs)
}

/// Repeatedly applies the lowest-rank merge that occurs, at its leftmost site.
pub fn naive_encode(seq: &UnitSequence, table: &MergeTable) -> Result<TokenSequence> {
    if let Some(bad) = seq.units.iter().find(|&&u| !table.base().contains(u)) {
        return Err(Error::Validation(format!("unit id {bad} out of range")));
    }
    let mut tokens = seq.units.clone();
    'apply: loop {
        for m in table.merges() {
            if let Some(i) = (1..tokens.len()).find(|&i| tokens[i - 1] == m.left && tokens[i] == m.right) {
                tokens[i - 1] = m.result;
                tokens.remove(i);
                continue 'apply;
            }
        }
        break;
    }
    Ok(TokenSequence::new(tokens))
}
