//! BPE vocabulary induction over unit corpora.
//!
//! The trainer repeatedly picks the most frequent adjacent pair, appends a new
//! token for it and rewrites every occurrence left to right. Ties between equally
//! frequent pairs go to the lexicographically smallest `(left, right)`. Pairs that
//! touch a special token, or the word boundary when boundaries are respected, are
//! never counted and never merged.
//!
//! Pair counts are maintained incrementally: after a merge only the pairs adjacent
//! to rewritten sites change, and a lazily invalidated max-heap yields the next
//! candidate. [`crate::oracle::naive_train`] is the reference this must agree with.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{BaseVocabulary, Corpus, UnitId};
use crate::error::{Error, Result};

pub type Pair = (UnitId, UnitId);

/// First line of every merge-table file.
pub const MERGE_TABLE_MAGIC: &str = "unitbpe-v1";
/// Boundary label written when the table has no word boundary.
pub const NO_BOUNDARY: &str = "<none>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Merge {
    pub left: UnitId,
    pub right: UnitId,
    pub result: UnitId,
    pub rank: u32,
}

/// Ordered merge rules over a base vocabulary.
///
/// Token ids `0..base.len()` are the base units; merge `rank` creates token
/// `base.len() + rank`. The table's boundary (if any) is a hard barrier for both
/// training and encoding.
#[derive(Debug, Clone)]
pub struct MergeTable {
    base: BaseVocabulary,
    merges: Vec<Merge>,
    surfaces: Vec<Vec<UnitId>>,
    ranks: HashMap<Pair, u32>,
}

impl PartialEq for MergeTable {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.merges == other.merges
    }
}

impl Eq for MergeTable {}

impl MergeTable {
    /// Table with no merges: encoding is the identity.
    pub fn identity(base: BaseVocabulary) -> Self {
        Self::from_pairs(base, std::iter::empty()).expect("empty table is valid")
    }

    /// Builds a table from merge pairs in rank order, checking every invariant.
    pub fn from_pairs(base: BaseVocabulary, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let base_len = base.len();
        let mut surfaces: Vec<Vec<UnitId>> = (0..base_len as UnitId).map(|u| vec![u]).collect();
        let mut merges = Vec::new();
        let mut ranks = HashMap::new();
        for (rank, (left, right)) in pairs.into_iter().enumerate() {
            let vocab_size = surfaces.len() as UnitId;
            for side in [left, right] {
                if side >= vocab_size {
                    return Err(Error::validation(format!(
                        "merge {rank}: token {side} is not defined before this merge"
                    )));
                }
                if base.is_special(side) {
                    return Err(Error::validation(format!(
                        "merge {rank}: special token {side} cannot be merged"
                    )));
                }
                if base.boundary() == Some(side) {
                    return Err(Error::validation(format!(
                        "merge {rank}: boundary unit {side} cannot be merged"
                    )));
                }
            }
            let rank = rank as u32;
            if ranks.insert((left, right), rank).is_some() {
                return Err(Error::validation(format!(
                    "merge {rank}: pair ({left}, {right}) appears twice"
                )));
            }
            let mut surface = surfaces[left as usize].clone();
            surface.extend_from_slice(&surfaces[right as usize]);
            surfaces.push(surface);
            merges.push(Merge {
                left,
                right,
                result: vocab_size,
                rank,
            });
        }
        Ok(Self {
            base,
            merges,
            surfaces,
            ranks,
        })
    }

    pub fn base(&self) -> &BaseVocabulary {
        &self.base
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.merges.iter().map(|m| (m.left, m.right))
    }

    /// |Z|: base units plus one token per merge.
    pub fn vocab_size(&self) -> usize {
        self.surfaces.len()
    }

    pub fn contains(&self, token: UnitId) -> bool {
        (token as usize) < self.surfaces.len()
    }

    /// Base units spelled by `token`.
    pub fn surface(&self, token: UnitId) -> Option<&[UnitId]> {
        self.surfaces.get(token as usize).map(Vec::as_slice)
    }

    /// Unit labels of `token` joined with `+`, e.g. `K+AE1+T`.
    pub fn surface_label(&self, token: UnitId) -> Option<String> {
        let units = self.surface(token)?;
        let labels: Option<Vec<&str>> = units.iter().map(|&u| self.base.label(u)).collect();
        labels.map(|l| l.join("+"))
    }

    /// Rank of the merge for `pair`, if the table has one.
    pub fn rank_of(&self, pair: Pair) -> Option<u32> {
        self.ranks.get(&pair).copied()
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{MERGE_TABLE_MAGIC}")?;
        writeln!(writer, "{}", self.base.len())?;
        writeln!(writer, "{}", self.base.boundary_label().unwrap_or(NO_BOUNDARY))?;
        for m in &self.merges {
            writeln!(writer, "{} {} {} {}", m.rank, m.left, m.right, m.result)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    /// Reads a merge-table file.
    ///
    /// With `base` supplied, the header must agree with it; a `<none>` boundary
    /// in the header drops the vocabulary's boundary. Without `base`, the table
    /// must be boundary-free and a DAU vocabulary of the declared size is assumed.
    pub fn read<R: BufRead>(reader: R, base: Option<&BaseVocabulary>) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut header = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, line)) => Ok((i + 1, line?.trim().to_string())),
                None => Err(Error::parse(0, format!("merge table truncated before {what}"))),
            }
        };

        let (lineno, magic) = header("magic line")?;
        if magic != MERGE_TABLE_MAGIC {
            return Err(Error::parse(
                lineno,
                format!("expected {MERGE_TABLE_MAGIC:?}, found {magic:?}"),
            ));
        }
        let (lineno, size) = header("base vocabulary size")?;
        let size: usize = size
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad base vocabulary size {size:?}")))?;
        let (_, boundary) = header("boundary label")?;
        let boundary = (boundary != NO_BOUNDARY).then_some(boundary);

        let base = match base {
            Some(v) => {
                if v.len() != size {
                    return Err(Error::validation(format!(
                        "merge table expects a base vocabulary of {size} units, got {}",
                        v.len()
                    )));
                }
                match &boundary {
                    None => v.without_boundary(),
                    Some(label) if v.boundary_label() == Some(label.as_str()) => v.clone(),
                    Some(label) => {
                        return Err(Error::validation(format!(
                            "merge table boundary {label:?} does not match vocabulary boundary {:?}",
                            v.boundary_label()
                        )))
                    }
                }
            }
            None => {
                if let Some(label) = boundary {
                    return Err(Error::validation(format!(
                        "merge table uses boundary {label:?}; a vocabulary must be supplied"
                    )));
                }
                if size < crate::corpus::NUM_SPECIAL {
                    return Err(Error::validation(format!("base vocabulary size {size} is too small")));
                }
                BaseVocabulary::dau(size - crate::corpus::NUM_SPECIAL)
            }
        };

        let mut pairs = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(lineno, format!("bad merge line {line:?}")))?;
            let [rank, left, right, result] = fields[..] else {
                return Err(Error::parse(
                    lineno,
                    "merge line needs 4 fields: rank left right result",
                ));
            };
            let expected_rank = pairs.len() as u64;
            if rank != expected_rank {
                return Err(Error::validation(format!(
                    "line {lineno}: rank {rank} out of order (expected {expected_rank})"
                )));
            }
            if result != (size as u64 + rank) {
                return Err(Error::validation(format!(
                    "line {lineno}: result id {result} should be {}",
                    size as u64 + rank
                )));
            }
            let id =
                |v: u64| UnitId::try_from(v).map_err(|_| Error::validation(format!("line {lineno}: id {v} too large")));
            pairs.push((id(left)?, id(right)?));
        }
        Self::from_pairs(base, pairs)
    }

    pub fn load(path: &Path, base: Option<&BaseVocabulary>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?), base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainOptions {
    /// Target vocabulary size |Z|; must exceed the base vocabulary size.
    pub target_size: usize,
    /// Never merge across the vocabulary's word-boundary unit.
    pub respect_boundaries: bool,
    /// Stop once the best pair occurs fewer times than this.
    pub min_pair_count: u64,
    /// Worker threads for pair counting. The result does not depend on it.
    pub threads: usize,
}

impl TrainOptions {
    pub fn new(target_size: usize) -> Self {
        Self {
            target_size,
            respect_boundaries: true,
            min_pair_count: 2,
            threads: 1,
        }
    }

    pub fn respect_boundaries(mut self, yes: bool) -> Self {
        self.respect_boundaries = yes;
        self
    }

    pub fn min_pair_count(mut self, count: u64) -> Self {
        self.min_pair_count = count;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    /// Base vocabulary the trained table is expressed over.
    pub fn table_base(&self, vocabulary: &BaseVocabulary) -> BaseVocabulary {
        if self.respect_boundaries {
            vocabulary.clone()
        } else {
            vocabulary.without_boundary()
        }
    }

    pub fn validate(&self, vocabulary: &BaseVocabulary) -> Result<()> {
        if self.target_size <= vocabulary.len() {
            return Err(Error::contract(format!(
                "target size {} must exceed the base vocabulary size {}",
                self.target_size,
                vocabulary.len()
            )));
        }
        Ok(())
    }
}

/// Units that can never take part in a merge.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Barriers {
    special: [UnitId; crate::corpus::NUM_SPECIAL],
    boundary: Option<UnitId>,
}

impl Barriers {
    pub(crate) fn new(vocabulary: &BaseVocabulary, respect_boundaries: bool) -> Self {
        Self {
            special: vocabulary.special(),
            boundary: vocabulary.boundary().filter(|_| respect_boundaries),
        }
    }

    #[inline]
    pub(crate) fn blocks(&self, token: UnitId) -> bool {
        self.special.contains(&token) || self.boundary == Some(token)
    }

    #[inline]
    pub(crate) fn allows(&self, left: UnitId, right: UnitId) -> bool {
        !self.blocks(left) && !self.blocks(right)
    }
}

/// Counts every adjacent ordered pair in `sequences`, skipping pairs that touch a
/// special token or (if `respect_boundaries`) the boundary unit. Overlapping
/// positions all count: `a a a` gives `(a, a): 2`.
pub fn pair_counts<S: AsRef<[UnitId]>>(
    sequences: &[S],
    vocabulary: &BaseVocabulary,
    respect_boundaries: bool,
) -> BTreeMap<Pair, u64> {
    let barriers = Barriers::new(vocabulary, respect_boundaries);
    let mut counts = BTreeMap::new();
    for seq in sequences {
        for w in seq.as_ref().windows(2) {
            if barriers.allows(w[0], w[1]) {
                *counts.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
    }
    counts
}

const NIL: u32 = u32::MAX;
const GONE: UnitId = UnitId::MAX;

#[derive(Default)]
struct PairSlot {
    count: i64,
    /// Start indices where the pair was seen; entries go stale and are re-checked.
    positions: Vec<u32>,
}

/// Corpus flattened into one doubly linked symbol list, one run per sequence.
struct Workspace {
    symbols: Vec<UnitId>,
    next: Vec<u32>,
    prev: Vec<u32>,
}

impl Workspace {
    fn new(corpus: &Corpus) -> Result<Self> {
        let total = corpus.total_units();
        if total >= NIL as usize {
            return Err(Error::contract("corpus too large for 32-bit positions"));
        }
        let mut symbols = Vec::with_capacity(total);
        let mut next = Vec::with_capacity(total);
        let mut prev = Vec::with_capacity(total);
        for seq in corpus.sequences() {
            let start = symbols.len() as u32;
            let n = seq.len() as u32;
            for (i, &u) in seq.as_slice().iter().enumerate() {
                let i = i as u32;
                symbols.push(u);
                prev.push(if i == 0 { NIL } else { start + i - 1 });
                next.push(if i + 1 == n { NIL } else { start + i + 1 });
            }
        }
        Ok(Self { symbols, next, prev })
    }
}

type Slots = HashMap<Pair, PairSlot>;

fn count_range(ws: &Workspace, barriers: &Barriers, range: std::ops::Range<usize>) -> Slots {
    let mut slots = Slots::new();
    for i in range {
        let j = ws.next[i];
        if j == NIL {
            continue;
        }
        let (a, b) = (ws.symbols[i], ws.symbols[j as usize]);
        if barriers.allows(a, b) {
            let slot = slots.entry((a, b)).or_default();
            slot.count += 1;
            slot.positions.push(i as u32);
        }
    }
    slots
}

fn initial_counts(ws: &Workspace, barriers: &Barriers, threads: usize) -> Result<Slots> {
    let total = ws.symbols.len();
    if threads <= 1 || total < 4096 {
        return Ok(count_range(ws, barriers, 0..total));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::contract(format!("cannot start thread pool: {e}")))?;
    let chunk = total.div_ceil(threads * 4);
    let partials: Vec<Slots> = pool.install(|| {
        (0..total)
            .step_by(chunk)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| count_range(ws, barriers, start..(start + chunk).min(total)))
            .collect()
    });
    // Chunks are folded in index order so every positions list stays ascending.
    let mut slots = Slots::new();
    for partial in partials {
        for (pair, part) in partial {
            let slot = slots.entry(pair).or_default();
            slot.count += part.count;
            slot.positions.extend(part.positions);
        }
    }
    Ok(slots)
}

type HeapEntry = (i64, Reverse<Pair>);

/// Trains a merge table on `corpus`.
///
/// Stops when the vocabulary reaches `options.target_size` or when the best pair
/// occurs fewer than `options.min_pair_count` times.
pub fn train(corpus: &Corpus, options: &TrainOptions) -> Result<MergeTable> {
    let vocabulary = corpus.vocabulary();
    options.validate(vocabulary)?;
    let barriers = Barriers::new(vocabulary, options.respect_boundaries);
    let mut ws = Workspace::new(corpus)?;
    let mut slots = initial_counts(&ws, &barriers, options.threads)?;

    let mut heap: BinaryHeap<HeapEntry> = slots
        .iter()
        .filter(|(_, s)| s.count > 0)
        .map(|(&p, s)| (s.count, Reverse(p)))
        .collect();

    let min_count = options.min_pair_count.max(1) as i64;
    let mut next_id = vocabulary.len() as UnitId;
    let mut pairs = Vec::new();
    let mut touched: Vec<Pair> = Vec::new();

    while (next_id as usize) < options.target_size {
        let Some((a, b)) = pop_best(&mut heap, &slots) else {
            break;
        };
        if slots[&(a, b)].count < min_count {
            break;
        }
        let new = next_id;
        next_id += 1;
        pairs.push((a, b));

        let mut positions = std::mem::take(&mut slots.get_mut(&(a, b)).expect("selected pair").positions);
        positions.sort_unstable();
        positions.dedup();

        let mut adjust = |slots: &mut Slots, pair: Pair, delta: i64, pos: u32| {
            if !barriers.allows(pair.0, pair.1) {
                return;
            }
            let slot = slots.entry(pair).or_default();
            slot.count += delta;
            if delta > 0 {
                slot.positions.push(pos);
                touched.push(pair);
            }
        };

        for pos in positions {
            let i = pos as usize;
            if ws.symbols[i] != a {
                continue;
            }
            let j = ws.next[i];
            if j == NIL || ws.symbols[j as usize] != b {
                continue;
            }
            let p = ws.prev[i];
            let k = ws.next[j as usize];

            if p != NIL {
                adjust(&mut slots, (ws.symbols[p as usize], a), -1, p);
            }
            adjust(&mut slots, (a, b), -1, pos);
            if k != NIL {
                adjust(&mut slots, (b, ws.symbols[k as usize]), -1, j);
            }

            ws.symbols[i] = new;
            ws.symbols[j as usize] = GONE;
            ws.next[i] = k;
            if k != NIL {
                ws.prev[k as usize] = pos;
            }

            if p != NIL {
                adjust(&mut slots, (ws.symbols[p as usize], new), 1, p);
            }
            if k != NIL {
                adjust(&mut slots, (new, ws.symbols[k as usize]), 1, pos);
            }
        }

        touched.sort_unstable();
        touched.dedup();
        for pair in touched.drain(..) {
            let count = slots[&pair].count;
            if count > 0 {
                heap.push((count, Reverse(pair)));
            }
        }
    }

    MergeTable::from_pairs(options.table_base(vocabulary), pairs)
}

/// Pops the highest-count pair (smallest pair on ties), discarding stale entries.
fn pop_best(heap: &mut BinaryHeap<HeapEntry>, slots: &Slots) -> Option<Pair> {
    while let Some((count, Reverse(pair))) = heap.pop() {
        let current = slots.get(&pair).map_or(0, |s| s.count);
        if current == count {
            return Some(pair);
        }
        // Counts only fall without a push, so a stale entry overstates; requeue at the true value.
        if current > 0 && current < count {
            heap.push((current, Reverse(pair)));
        }
    }
    None
}
