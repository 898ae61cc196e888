//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any fails.
//!
//! Seeds are fixed so every number below is reproducible:
//! * Zipf corpus: seed 1101, 84 units, exponent 1.1, 2000 sequences of mean length 500.
//! * Run-length corpus: seed 4004, K = 100, mean run 4, 2000 sequences of mean length 500.
//! * Random corpora for the equivalence, round-trip and boundary checks are drawn
//!   from SplitMix64 streams seeded per case.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use unitbpe::bpe::{train, MergeTable, TrainOptions};
use unitbpe::codec::{decode, encode, encode_corpus};
use unitbpe::corpus::{BaseVocabulary, Corpus, UnitId, UnitSequence};
use unitbpe::metrics::{
    bit_increase, compression, edge_case_probability, edit_distance, entropy, normalized_entropy, reduction,
    token_distribution, Distribution,
};
use unitbpe::oracle::{naive_encode, naive_train};
use unitbpe::synth::{gen_runlength_corpus, gen_zipf_corpus, RunLengthSpec, SplitMix64, ZipfSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_unitbpe")
}

fn zipf_corpus() -> Corpus {
    gen_zipf_corpus(&ZipfSpec {
        seed: 1101,
        vocab_size: 84,
        num_sequences: 2000,
        mean_length: 500,
        exponent: 1.1,
    })
    .unwrap()
}

fn runlength_corpus() -> Corpus {
    gen_runlength_corpus(&RunLengthSpec {
        seed: 4004,
        clusters: 100,
        num_sequences: 2000,
        mean_length: 500,
        mean_run: 4.0,
        transition_skew: 1.0,
    })
    .unwrap()
}

fn balance(corpus: &Corpus, table: &MergeTable) -> (f64, f64) {
    let before: Vec<&[UnitId]> = corpus.sequences().iter().map(|s| s.as_slice()).collect();
    let before = normalized_entropy(&token_distribution(&before, corpus.vocabulary().len()).unwrap()).unwrap();
    let encoded = encode_corpus(corpus, table, 4).unwrap();
    let after: Vec<&[UnitId]> = encoded.sequences.iter().map(|s| s.as_slice()).collect();
    let after = normalized_entropy(&token_distribution(&after, table.vocab_size()).unwrap()).unwrap();
    (before, after)
}

fn vocabulary(units: usize, boundary: bool) -> BaseVocabulary {
    let labels: Vec<String> = (0..units).map(|i| format!("u{i}")).collect();
    let b = format!("u{}", units - 1);
    BaseVocabulary::from_labels(labels, boundary.then_some(b.as_str())).unwrap()
}

/// A random sequence over `0..units` that repeats its previous unit a third of the time.
fn random_sequence(rng: &mut SplitMix64, units: usize, max_len: u64) -> UnitSequence {
    let len = rng.next_below(max_len + 1);
    let mut prev = rng.next_below(units as u64) as UnitId;
    let units = (0..len)
        .map(|_| {
            if rng.next_below(3) != 0 {
                prev = rng.next_below(units as u64) as UnitId;
            }
            prev
        })
        .collect();
    UnitSequence::new(units)
}

fn random_sequences(rng: &mut SplitMix64, units: usize, max_seqs: u64, max_len: u64) -> Vec<UnitSequence> {
    let n = rng.next_below(max_seqs + 1);
    (0..n).map(|_| random_sequence(rng, units, max_len)).collect()
}

fn ac1_tradeoff() -> Outcome {
    let cases = [(0.00097, 872u64, 42.94), (0.0014, 300, 65.61)];
    let mut detail = Vec::new();
    for (eps, n, reported) in cases {
        let pct = 100.0 * edge_case_probability(eps, n).map_err(|e| e.to_string())?;
        ensure!(
            (pct - reported).abs() <= 0.15,
            "eps={eps} n={n}: {pct:.4}% vs {reported}%"
        );
        detail.push(format!("{pct:.2}%"));
    }
    let out = Command::new(bin())
        .args([
            "tradeoff", "--eps", "0.00097", "--n", "872", "--eps", "0.0014", "--n", "300", "--json",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "tradeoff exited with {}", out.status);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    for (row, (_, _, reported)) in rows.as_array().ok_or("expected a JSON array")?.iter().zip(cases) {
        let pct = 100.0 * row["p_correct"].as_f64().ok_or("missing p_correct")?;
        ensure!((pct - reported).abs() <= 0.15, "cli: {pct:.4}% vs {reported}%");
    }
    Ok(format!("{} (library and cli)", detail.join(", ")))
}

fn ac2_compression_identities() -> Outcome {
    let mut detail = Vec::new();
    for (red, x, z, expected) in [(2.90, 84, 2048, 1.69), (3.20, 1003, 16384, 2.27)] {
        let c = compression(red, bit_increase(x, z).unwrap()).unwrap();
        ensure!(
            (c - expected).abs() <= 0.01,
            "({red}, {x}, {z}) -> {c:.4}, expected {expected}"
        );
        detail.push(format!("{c:.4}"));
    }
    Ok(detail.join(", "))
}

fn ac3_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let cases = 400u64;
    let mut merges = 0;
    for case in 0..cases {
        let mut rng = SplitMix64::new(0xE0_0000 + case);
        let units = 2 + rng.next_below(8) as usize;
        let with_boundary = case % 2 == 0;
        let v = vocabulary(units, with_boundary);
        let base = v.len();
        let seqs = random_sequences(&mut rng, units, 50, 30);
        let corpus = Corpus::new(v, seqs, "ac3").unwrap();
        let target = base + 1 + rng.next_below(20) as usize;
        let min_count = 1 + rng.next_below(3);
        let opts = TrainOptions::new(target)
            .respect_boundaries(with_boundary)
            .min_pair_count(min_count);
        let fast = train(&corpus, &opts).unwrap();
        let slow = naive_train(&corpus, &opts).unwrap();
        ensure!(fast == slow, "case {case}: merge lists differ");
        merges += fast.merges().len();
        for seq in corpus.sequences() {
            ensure!(
                encode(seq, &fast).unwrap() == naive_encode(seq, &fast).unwrap(),
                "case {case}: encodings differ"
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{cases} corpora, {merges} merges, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn ac4_round_trip() -> Outcome {
    let mut checked = 0;
    let mut failures = 0;
    for t in 0..100u64 {
        let mut rng = SplitMix64::new(0x40_0000 + t);
        let units = 2 + rng.next_below(30) as usize;
        let v = vocabulary(units, t % 3 == 0);
        let corpus = Corpus::new(v.clone(), random_sequences(&mut rng, units, 40, 60), "ac4").unwrap();
        let target = v.len() + 1 + rng.next_below(100) as usize;
        let table = train(&corpus, &TrainOptions::new(target).min_pair_count(1)).unwrap();
        for _ in 0..100 {
            let seq = random_sequence(&mut rng, units, 120);
            let back = decode(&encode(&seq, &table).unwrap(), &table).unwrap();
            failures += usize::from(back != seq);
            checked += 1;
        }
    }
    ensure!(checked == 10_000, "checked {checked}");
    ensure!(failures == 0, "{failures} of {checked} sequences did not round-trip");
    Ok(format!("{checked} sequences, 0 failures"))
}

fn ac5_balance_direction() -> Outcome {
    let zipf = zipf_corpus();
    ensure!(
        zipf.total_units() >= 900_000,
        "zipf corpus has {} units",
        zipf.total_units()
    );
    let table = train(&zipf, &TrainOptions::new(256).threads(4)).unwrap();
    ensure!(
        table.vocab_size() == 256,
        "zipf table stopped at {}",
        table.vocab_size()
    );
    let (zb, za) = balance(&zipf, &table);
    ensure!(za > zb, "zipf: N {zb:.4} -> {za:.4}");

    let runs = runlength_corpus();
    let target = 4 * runs.vocabulary().len();
    let table = train(&runs, &TrainOptions::new(target).threads(4)).unwrap();
    ensure!(
        table.vocab_size() == target,
        "run-length table stopped at {}",
        table.vocab_size()
    );
    let (rb, ra) = balance(&runs, &table);
    ensure!(ra > rb, "run-length: N {rb:.4} -> {ra:.4}");
    Ok(format!("zipf N {zb:.4} -> {za:.4}; run-length N {rb:.4} -> {ra:.4}"))
}

fn ac6_reduction_trend() -> Outcome {
    let corpus = zipf_corpus();
    let x = corpus.vocabulary().len();
    let n_hat = corpus.total_units() as f64 / corpus.sequences().len() as f64;
    let mut values = Vec::new();
    for mult in [2, 4, 8] {
        let table = train(&corpus, &TrainOptions::new(mult * x).threads(4)).unwrap();
        ensure!(
            table.vocab_size() == mult * x,
            "{mult}|X| stopped at {}",
            table.vocab_size()
        );
        let k_hat = encode_corpus(&corpus, &table, 4)
            .unwrap()
            .mean_length
            .ok_or("empty corpus")?;
        values.push(reduction(n_hat, k_hat).unwrap());
    }
    ensure!(values.windows(2).all(|w| w[1] > w[0]), "not increasing: {values:?}");
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(format!("reduction at 2|X|, 4|X|, 8|X| ({x}): {}", shown.join(" < ")))
}

/// Levenshtein distance straight from its recursive definition, memoised on suffix offsets.
fn lev_recursive(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let key = (a.len(), b.len());
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let d = if a[0] == b[0] {
        lev_recursive(&a[1..], &b[1..], memo)
    } else {
        1 + lev_recursive(&a[1..], b, memo)
            .min(lev_recursive(a, &b[1..], memo))
            .min(lev_recursive(&a[1..], &b[1..], memo))
    };
    memo.insert(key, d);
    d
}

fn ac7_metric_properties() -> Outcome {
    for k in [2, 3, 84, 1003, 16384] {
        let n = normalized_entropy(&Distribution::from_counts(&vec![7; k]).unwrap()).unwrap();
        ensure!((n - 1.0).abs() <= 1e-12, "uniform over {k}: {n}");
        let mut point = vec![0u64; k];
        point[k / 2] = 5;
        let n = normalized_entropy(&Distribution::from_counts(&point).unwrap()).unwrap();
        ensure!(n == 0.0, "point mass over {k}: {n}");
    }

    let mut rng = SplitMix64::new(0x70_0000);
    for i in 0..1000 {
        let k = 2 + rng.next_below(200) as usize;
        let mut counts: Vec<u64> = (0..k).map(|_| rng.next_below(1000)).collect();
        counts[0] += 1;
        let h = entropy(&Distribution::from_counts(&counts).unwrap());
        for j in (1..k).rev() {
            counts.swap(j, rng.next_below(j as u64 + 1) as usize);
        }
        let hp = entropy(&Distribution::from_counts(&counts).unwrap());
        ensure!((h - hp).abs() <= 1e-12, "distribution {i}: {h} vs {hp}");
    }

    let mut all: Vec<Vec<u8>> = vec![Vec::new()];
    let mut frontier = all.clone();
    for _ in 0..6 {
        frontier = frontier
            .iter()
            .flat_map(|s| (0..3u8).map(move |c| [s.as_slice(), &[c]].concat()))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    let mut memo = HashMap::new();
    let mut pairs = 0u64;
    for a in &all {
        for b in &all {
            memo.clear();
            let want = lev_recursive(a, b, &mut memo);
            let got = edit_distance(a, b);
            ensure!(got.distance == want, "{a:?} vs {b:?}: {} != {want}", got.distance);
            ensure!(
                got.substitutions + got.insertions + got.deletions == want
                    && got.insertions + a.len() == got.deletions + b.len(),
                "{a:?} vs {b:?}: inconsistent operation counts {got:?}"
            );
            pairs += 1;
        }
    }
    Ok(format!(
        "uniform/point exact, 1000 permutations, {pairs} edit-distance pairs"
    ))
}

fn ac8_boundary_safety() -> Outcome {
    let phones = [
        "aa", "ae", "ah", "b", "d", "eh", "f", "g", "ih", "k", "l", "m", "n", "p", "r", "s", "t", "uw", "v", "z",
    ];
    let mut tokens_checked = 0usize;
    for case in 0..1000u64 {
        let mut rng = SplitMix64::new(0x80_0000 + case);
        let k = 3 + rng.next_below(phones.len() as u64 - 2) as usize;
        let labels: Vec<String> = phones[..k].iter().chain(&["sil"]).map(|s| s.to_string()).collect();
        let v = BaseVocabulary::from_labels(labels, Some("_")).unwrap();
        let b = v.boundary().unwrap();
        // Phones and "sil" come first; the boundary is appended after them.
        let content = (k + 1) as u64;
        let seqs: Vec<UnitSequence> = (0..1 + rng.next_below(30))
            .map(|_| {
                let mut units = Vec::new();
                for w in 0..1 + rng.next_below(8) {
                    if w > 0 || rng.next_below(4) == 0 {
                        units.push(b);
                    }
                    // Few distinct words so that cross-word pairs are frequent.
                    let word_seed = rng.next_below(4);
                    let mut wr = SplitMix64::new(case * 16 + word_seed);
                    for _ in 0..1 + wr.next_below(5) {
                        units.push(wr.next_below(content) as UnitId);
                    }
                }
                if rng.next_below(4) == 0 {
                    units.push(b);
                }
                UnitSequence::new(units)
            })
            .collect();
        let corpus = Corpus::new(v.clone(), seqs, "ac8").unwrap();
        let target = v.len() + 1 + rng.next_below(40) as usize;
        let table = train(&corpus, &TrainOptions::new(target).min_pair_count(1)).unwrap();
        for m in table.merges() {
            ensure!(
                !table.surface(m.result).unwrap().contains(&b),
                "case {case}: token {} spans the boundary",
                m.result
            );
        }
        for seq in corpus.sequences() {
            for &t in encode(seq, &table).unwrap().as_slice() {
                let s = table.surface(t).unwrap();
                ensure!(
                    s == [b] || !s.contains(&b),
                    "case {case}: encoded token {t} crosses the boundary"
                );
                tokens_checked += 1;
            }
        }
    }
    Ok(format!("1000 corpora, {tokens_checked} encoded tokens"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn ac9_thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let corpus = p("runs.txt");
    run_cli(&[
        "synth",
        "runlength",
        "--seed",
        "9",
        "--clusters",
        "200",
        "--num-sequences",
        "500",
        "--mean-length",
        "400",
        "--out",
        &corpus,
    ])?;
    let mut files = Vec::new();
    for (name, threads) in [("t1a", "1"), ("t8", "8"), ("t1b", "1")] {
        let out = p(name);
        run_cli(&[
            "train",
            "--input",
            &corpus,
            "--clusters",
            "200",
            "--target-size",
            "1500",
            "--threads",
            threads,
            "--out",
            &out,
        ])?;
        files.push(std::fs::read(Path::new(&out)).map_err(|e| e.to_string())?);
    }
    ensure!(files[0] == files[1], "--threads 1 and --threads 8 differ");
    ensure!(files[0] == files[2], "two --threads 1 runs differ");
    Ok(format!("{} bytes, identical", files[0].len()))
}

fn ac10_encode_throughput() -> Outcome {
    let spec = |seed, num_sequences, mean_length| RunLengthSpec {
        seed,
        clusters: 1000,
        num_sequences,
        mean_length,
        mean_run: 4.0,
        transition_skew: 1.0,
    };
    let train_corpus = gen_runlength_corpus(&spec(10_001, 4000, 500)).unwrap();
    let table = train(&train_corpus, &TrainOptions::new(16_384).threads(4)).unwrap();
    ensure!(table.vocab_size() == 16_384, "table stopped at {}", table.vocab_size());
    let corpus = gen_runlength_corpus(&spec(10_002, 20_000, 510)).unwrap();
    ensure!(
        corpus.total_units() >= 10_000_000,
        "corpus has {} units",
        corpus.total_units()
    );

    let start = Instant::now();
    let encoded = encode_corpus(&corpus, &table, 1).unwrap();
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "encode took {elapsed:?}");
    Ok(format!(
        "{} units -> {} tokens in {:.2}s",
        corpus.total_units(),
        encoded.total_tokens(),
        elapsed.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("edge-case probability reproduction", ac1_tradeoff),
        ("compression identities", ac2_compression_identities),
        ("trainer and encoder match the oracle", ac3_oracle_equivalence),
        ("lossless round trip", ac4_round_trip),
        ("balance increases after training", ac5_balance_direction),
        ("reduction grows with vocabulary size", ac6_reduction_trend),
        ("metric properties", ac7_metric_properties),
        ("boundary safety", ac8_boundary_safety),
        ("thread-count determinism", ac9_thread_determinism),
        ("encode throughput", ac10_encode_throughput),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {:>2}  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {:>2}  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
