//! C ABI for `unitbpe`.
//!
//! Conventions:
//! * Every fallible function returns a [`UnitbpeStatus`]; results come back
//!   through out-pointers. On failure [`unitbpe_last_error`] describes the
//!   problem for the calling thread.
//! * Corpora and merge tables are opaque handles. Free them with
//!   [`unitbpe_corpus_free`] and [`unitbpe_merge_table_free`].
//! * Encode and decode write into caller buffers. When the buffer is too small
//!   they return [`UnitbpeStatus::BufferTooSmall`] and store the required
//!   length in `out_len`, so a second call with a larger buffer succeeds.
//! * Panics never cross the boundary; they surface as [`UnitbpeStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use unitbpe::bpe::{train, MergeTable, TrainOptions};
use unitbpe::codec::{decode, encode, TokenSequence};
use unitbpe::corpus::{load_corpus, BaseVocabulary, Corpus, CorpusFormat, UnitId, UnitSequence};
use unitbpe::metrics::{analyze, bit_increase, compression, edge_case_probability, normalized_entropy, Distribution};
use unitbpe::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitbpeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Corpus file layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitbpeFormat {
    /// Whitespace-separated integer cluster ids.
    DauInt = 0,
    /// Whitespace-separated labels; `_` is the word boundary.
    Symbolic = 1,
}

/// Opaque corpus handle.
pub struct UnitbpeCorpus(Corpus);

/// Opaque merge-table handle.
pub struct UnitbpeMergeTable(MergeTable);

/// Figures produced by [`unitbpe_analyze`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UnitbpeReport {
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

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(UnitbpeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => UnitbpeStatus::Io,
            Error::Parse { .. } => UnitbpeStatus::Parse,
            Error::Validation(_) => UnitbpeStatus::Validation,
            Error::Contract(_) => UnitbpeStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn null(what: &str) -> Failure {
    Failure(UnitbpeStatus::NullPointer, format!("{what} is null"))
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UnitbpeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnitbpeStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            UnitbpeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UnitbpeStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(values: &[UnitId], out: *mut u32, capacity: usize, out_len: *mut usize) -> Result<(), Failure> {
    if out_len.is_null() {
        return Err(null("out_len"));
    }
    *out_len = values.len();
    if values.len() > capacity {
        return Err(Failure(
            UnitbpeStatus::BufferTooSmall,
            format!("buffer holds {capacity} ids, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn unitbpe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn unitbpe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a corpus file. `clusters` sets the DAU inventory size for `DauInt`
/// files (0 means 1000); symbolic files infer their vocabulary.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_load(
    path: *const c_char,
    format: UnitbpeFormat,
    clusters: usize,
    out: *mut *mut UnitbpeCorpus,
) -> UnitbpeStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let corpus = match format {
            UnitbpeFormat::DauInt => {
                let clusters = if clusters == 0 {
                    unitbpe::corpus::DAU_CLUSTERS
                } else {
                    clusters
                };
                load_corpus(
                    Path::new(path),
                    CorpusFormat::DauInt,
                    Some(&BaseVocabulary::dau(clusters)),
                )?
            }
            UnitbpeFormat::Symbolic => load_corpus(Path::new(path), CorpusFormat::Symbolic, None)?,
        };
        write_out(out, Box::into_raw(Box::new(UnitbpeCorpus(corpus))), "out")
    })
}

/// Builds a DAU corpus from memory. `units` holds all sequences back to back;
/// `lengths[i]` is the length of sequence `i`.
///
/// # Safety
/// `units` must point to `sum(lengths)` ids and `lengths` to `num_sequences` values.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_from_units(
    units: *const u32,
    lengths: *const usize,
    num_sequences: usize,
    clusters: usize,
    out: *mut *mut UnitbpeCorpus,
) -> UnitbpeStatus {
    guard(|| {
        let lengths = slice_arg(lengths, num_sequences, "lengths")?;
        let total = lengths
            .iter()
            .try_fold(0usize, |acc, &l| acc.checked_add(l))
            .ok_or_else(|| Failure(UnitbpeStatus::InvalidArgument, "lengths overflow".to_string()))?;
        let mut rest = slice_arg(units, total, "units")?;
        let sequences = lengths
            .iter()
            .map(|&len| {
                let (head, tail) = rest.split_at(len);
                rest = tail;
                UnitSequence::new(head.to_vec())
            })
            .collect();
        if clusters < 1 {
            return Err(Failure(
                UnitbpeStatus::InvalidArgument,
                "clusters must be positive".to_string(),
            ));
        }
        let corpus = Corpus::new(BaseVocabulary::dau(clusters), sequences, "memory")?;
        write_out(out, Box::into_raw(Box::new(UnitbpeCorpus(corpus))), "out")
    })
}

/// # Safety
/// `corpus` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_num_sequences(corpus: *const UnitbpeCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.sequences().len())
}

/// # Safety
/// `corpus` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_total_units(corpus: *const UnitbpeCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.total_units())
}

/// Size of the corpus's base vocabulary, specials included.
///
/// # Safety
/// `corpus` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_vocab_size(corpus: *const UnitbpeCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.vocabulary().len())
}

/// Writes the corpus vocabulary as a sidecar file (one label per line).
///
/// # Safety
/// `corpus` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_write_vocabulary(
    corpus: *const UnitbpeCorpus,
    path: *const c_char,
) -> UnitbpeStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let path = str_arg(path, "path")?;
        corpus
            .0
            .vocabulary()
            .write_sidecar(BufWriter::new(File::create(path)?))?;
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_corpus_free(corpus: *mut UnitbpeCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Trains a merge table of `target_size` tokens on `corpus`.
///
/// # Safety
/// `corpus` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_train(
    corpus: *const UnitbpeCorpus,
    target_size: usize,
    respect_boundaries: bool,
    min_pair_count: u64,
    threads: usize,
    out: *mut *mut UnitbpeMergeTable,
) -> UnitbpeStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let options = TrainOptions::new(target_size)
            .respect_boundaries(respect_boundaries)
            .min_pair_count(min_pair_count)
            .threads(threads.max(1));
        let table = train(&corpus.0, &options)?;
        write_out(out, Box::into_raw(Box::new(UnitbpeMergeTable(table))), "out")
    })
}

/// Loads a merge table. `vocab_path` names a sidecar vocabulary and may be
/// null for DAU tables; `boundary` is the sidecar's boundary label or null.
///
/// # Safety
/// String arguments must be NUL-terminated or null where allowed; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_merge_table_load(
    path: *const c_char,
    vocab_path: *const c_char,
    boundary: *const c_char,
    out: *mut *mut UnitbpeMergeTable,
) -> UnitbpeStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let boundary = opt_str_arg(boundary, "boundary")?;
        let base = match opt_str_arg(vocab_path, "vocab_path")? {
            Some(v) => Some(BaseVocabulary::load_sidecar(Path::new(v), boundary)?),
            None => None,
        };
        let table = MergeTable::load(Path::new(path), base.as_ref())?;
        write_out(out, Box::into_raw(Box::new(UnitbpeMergeTable(table))), "out")
    })
}

/// # Safety
/// `table` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_merge_table_save(
    table: *const UnitbpeMergeTable,
    path: *const c_char,
) -> UnitbpeStatus {
    guard(|| {
        let table = handle(table, "table")?;
        table.0.save(Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Token inventory size |Z| (base units plus merges).
///
/// # Safety
/// `table` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_merge_table_vocab_size(table: *const UnitbpeMergeTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.vocab_size())
}

/// # Safety
/// `table` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_merge_table_num_merges(table: *const UnitbpeMergeTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.merges().len())
}

/// # Safety
/// `table` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_merge_table_free(table: *mut UnitbpeMergeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Encodes one unit sequence. At most `len` tokens are produced, so a buffer
/// of `len` ids is always large enough.
///
/// # Safety
/// `units` must hold `len` ids and `out_tokens` room for `capacity` ids.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_encode(
    table: *const UnitbpeMergeTable,
    units: *const u32,
    len: usize,
    out_tokens: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> UnitbpeStatus {
    guard(|| {
        let table = handle(table, "table")?;
        let seq = UnitSequence::new(slice_arg(units, len, "units")?.to_vec());
        let tokens = encode(&seq, &table.0)?;
        copy_out(tokens.as_slice(), out_tokens, capacity, out_len)
    })
}

/// Expands tokens back into units.
///
/// # Safety
/// `tokens` must hold `len` ids and `out_units` room for `capacity` ids.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_decode(
    table: *const UnitbpeMergeTable,
    tokens: *const u32,
    len: usize,
    out_units: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> UnitbpeStatus {
    guard(|| {
        let table = handle(table, "table")?;
        let tokens = TokenSequence::new(slice_arg(tokens, len, "tokens")?.to_vec());
        let units = decode(&tokens, &table.0)?;
        copy_out(units.as_slice(), out_units, capacity, out_len)
    })
}

/// Normalized entropy of a count histogram whose length is the vocabulary size.
///
/// # Safety
/// `counts` must hold `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_normalized_entropy(counts: *const u64, len: usize, out: *mut f64) -> UnitbpeStatus {
    guard(|| {
        let d = Distribution::from_counts(slice_arg(counts, len, "counts")?)?;
        write_out(out, normalized_entropy(&d)?, "out")
    })
}

/// Probability `(1 - eps)^n` that `n` tokens are all emitted correctly.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_edge_case_probability(eps: f64, n: u64, out: *mut f64) -> UnitbpeStatus {
    guard(|| write_out(out, edge_case_probability(eps, n)?, "out"))
}

/// Compression for a length reduction between inventories of the given sizes.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_compression(
    reduction: f64,
    base_size: usize,
    token_size: usize,
    out: *mut f64,
) -> UnitbpeStatus {
    guard(|| {
        write_out(
            out,
            compression(reduction, bit_increase(base_size, token_size)?)?,
            "out",
        )
    })
}

/// Encodes `corpus` with `table` and reports compression and balance.
///
/// # Safety
/// Handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unitbpe_analyze(
    corpus: *const UnitbpeCorpus,
    table: *const UnitbpeMergeTable,
    threads: usize,
    out: *mut UnitbpeReport,
) -> UnitbpeStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let table = handle(table, "table")?;
        let r = analyze(&corpus.0, &table.0, threads.max(1))?;
        let report = UnitbpeReport {
            n_hat: r.n_hat,
            k_hat: r.k_hat,
            reduction: r.reduction,
            bit_increase: r.bit_increase,
            compression: r.compression,
            balance_before: r.balance_before,
            balance_after: r.balance_after,
            run_length_mean: r.run_length_mean,
            base_vocab: r.base_vocab,
            token_vocab: r.token_vocab,
        };
        write_out(out, report, "out")
    })
}
