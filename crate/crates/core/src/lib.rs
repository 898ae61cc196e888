//! Byte Pair Encoding for discrete unit inventories: discrete acoustic units
//! (integer cluster ids) and phoneme sequences with word boundaries.
//!
//! * [`corpus`] loads and validates unit corpora.
//! * [`bpe`] trains merge tables; [`codec`] applies and inverts them.
//! * [`metrics`] measures compression, token balance, run lengths and error rates.
//! * [`synth`] generates seeded Zipfian and run-length corpora.
//! * [`oracle`] is the slow reference the optimized paths are tested against.
//!
//! ```
//! use unitbpe::synth::{gen_zipf_corpus, ZipfSpec};
//! use unitbpe::{analyze, decode, encode, train, TrainOptions};
//!
//! # fn main() -> unitbpe::Result<()> {
//! let spec = ZipfSpec { seed: 1, vocab_size: 84, num_sequences: 100, mean_length: 200, exponent: 1.1 };
//! let corpus = gen_zipf_corpus(&spec)?;
//! let table = train(&corpus, &TrainOptions::new(256))?;
//! let tokens = encode(&corpus.sequences()[0], &table)?;
//! assert_eq!(decode(&tokens, &table)?, corpus.sequences()[0]);
//! let report = analyze(&corpus, &table, 4)?;
//! assert!(report.reduction > 1.0);
//! # Ok(())
//! # }
//! ```

pub mod bpe;
pub mod codec;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod synth;

pub use bpe::{train, Merge, MergeTable, Pair, TrainOptions};
pub use codec::{decode, encode, encode_corpus, EncodedCorpus, TokenSequence};
pub use corpus::{load_corpus, BaseVocabulary, Corpus, CorpusFormat, UnitId, UnitSequence};
pub use error::{Error, Result};
pub use metrics::{analyze, AnalysisReport, Distribution};
