//! Seeded synthetic corpora.
//!
//! Output is a pure function of the `*Spec` argument, byte-identical on every platform:
//!
//! * Randomness comes from SplitMix64 (`state += 0x9E3779B97F4A7C15`, then the
//!   usual xor-shift/multiply finalizer). Uniform floats take the top 53 bits.
//! * Zipf weights are `(rank + 1)^-s`, computed with the portable `libm::pow`,
//!   accumulated in rank order and sampled by inverse CDF (binary search).
//! * Each sequence length is uniform on `1..=2·mean_length - 1` (mean exactly
//!   `mean_length`), or 0 when `mean_length` is 0.
//! * Run lengths are geometric with success probability `1 / mean_run`, drawn
//!   by repeated Bernoulli trials. The unit after a run is drawn from the Zipf
//!   weights over the other `K - 1` units, so consecutive runs always differ.

use crate::corpus::{BaseVocabulary, Corpus, UnitId, UnitSequence};
use crate::error::{Error, Result};

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..bound` without modulo bias. `bound` must be positive.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }
}

/// Inverse-CDF sampler over ranks `0..n` with weight `(rank + 1)^-exponent`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(n: usize, exponent: f64) -> Self {
        let mut total = 0.0;
        let cumulative = (1..=n)
            .map(|r| {
                total += libm::pow(r as f64, -exponent);
                total
            })
            .collect();
        Self { cumulative }
    }

    /// Normalized weight of `rank`.
    pub fn probability(&self, rank: usize) -> f64 {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let lo = if rank == 0 { 0.0 } else { self.cumulative[rank - 1] };
        (self.cumulative[rank] - lo) / total
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> usize {
        let total = *self.cumulative.last().expect("non-empty sampler");
        let x = rng.next_f64() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

fn sequence_length(rng: &mut SplitMix64, mean_length: usize) -> usize {
    if mean_length == 0 {
        0
    } else {
        1 + rng.next_below(2 * mean_length as u64 - 1) as usize
    }
}

/// Independent draws from a Zipf law over `vocab_size` units; unit id = rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfSpec {
    pub seed: u64,
    pub vocab_size: usize,
    pub num_sequences: usize,
    pub mean_length: usize,
    pub exponent: f64,
}

impl ZipfSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::contract("zipf vocabulary needs at least 2 units"));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::contract(format!(
                "zipf exponent must be >= 0, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

pub fn gen_zipf_corpus(spec: &ZipfSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let zipf = ZipfSampler::new(spec.vocab_size, spec.exponent);
    let sequences = (0..spec.num_sequences)
        .map(|_| {
            let len = sequence_length(&mut rng, spec.mean_length);
            let units = (0..len).map(|_| zipf.sample(&mut rng) as UnitId).collect();
            UnitSequence::new(units)
        })
        .collect();
    Corpus::new(
        BaseVocabulary::dau(spec.vocab_size),
        sequences,
        format!("synth:zipf seed={} s={}", spec.seed, spec.exponent),
    )
}

/// DAU-like streams: runs of a repeated unit with geometric lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengthSpec {
    pub seed: u64,
    pub clusters: usize,
    pub num_sequences: usize,
    pub mean_length: usize,
    /// Mean of the geometric run-length law; 1 means no repetition.
    pub mean_run: f64,
    /// Zipf exponent for choosing the unit of each run.
    pub transition_skew: f64,
}

impl RunLengthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters < 2 {
            return Err(Error::contract("run-length corpus needs at least 2 clusters"));
        }
        if !(self.mean_run >= 1.0 && self.mean_run.is_finite()) {
            return Err(Error::contract(format!("mean run must be >= 1, got {}", self.mean_run)));
        }
        if !(self.transition_skew >= 0.0 && self.transition_skew.is_finite()) {
            return Err(Error::contract("transition skew must be >= 0"));
        }
        Ok(())
    }
}

pub fn gen_runlength_corpus(spec: &RunLengthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let first = ZipfSampler::new(spec.clusters, spec.transition_skew);
    let others = ZipfSampler::new(spec.clusters - 1, spec.transition_skew);
    let stop = 1.0 / spec.mean_run;

    let sequences = (0..spec.num_sequences)
        .map(|_| {
            let len = sequence_length(&mut rng, spec.mean_length);
            let mut units = Vec::with_capacity(len);
            let mut unit = first.sample(&mut rng);
            while units.len() < len {
                let mut run = 1;
                while rng.next_f64() >= stop {
                    run += 1;
                }
                let take = run.min(len - units.len());
                units.extend(std::iter::repeat_n(unit as UnitId, take));
                let k = others.sample(&mut rng);
                unit = if k >= unit { k + 1 } else { k };
            }
            UnitSequence::new(units)
        })
        .collect();
    Corpus::new(
        BaseVocabulary::dau(spec.clusters),
        sequences,
        format!("synth:runlength seed={} mean_run={}", spec.seed, spec.mean_run),
    )
}
