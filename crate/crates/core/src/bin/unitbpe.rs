//! `unitbpe`: train, apply and analyze BPE over unit corpora.
//!
//! Exit status: 0 on success, 1 on data or validation errors, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use unitbpe::bpe::{train, MergeTable, TrainOptions};
use unitbpe::codec::{decode, encode_corpus, parse_surfaces, parse_tokens, write_tokens};
use unitbpe::corpus::{
    corpus_stats, parse_line, read_corpus, write_units, BaseVocabulary, Corpus, CorpusFormat, DEFAULT_BOUNDARY,
};
use unitbpe::metrics::{analyze, corpus_run_length_mean, edge_case_probability, run_length_stats};
use unitbpe::oracle::{naive_encode, naive_train};
use unitbpe::synth::{gen_runlength_corpus, gen_zipf_corpus, RunLengthSpec, ZipfSpec};
use unitbpe::{Error, Result};

#[derive(Parser)]
#[command(
    name = "unitbpe",
    version,
    about = "Byte Pair Encoding over discrete unit inventories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a merge table from a corpus.
    Train(TrainArgs),
    /// Tokenize a corpus with a merge table.
    Encode(EncodeArgs),
    /// Expand a tokenized corpus back into units.
    Decode(DecodeArgs),
    /// Sequence-length and run-length statistics of a corpus.
    Stats(StatsArgs),
    /// Compression and balance report for a corpus under a merge table.
    Analyze(AnalyzeArgs),
    /// Probability of a fully correct sequence, (1 - eps)^n.
    Tradeoff(TradeoffArgs),
    /// Generate a seeded synthetic dau-int corpus.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file, or `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    /// Corpus format: dau-int or symbolic.
    #[arg(long, default_value = "dau-int")]
    format: CorpusFormat,
    #[command(flatten)]
    vocab: VocabArgs,
}

#[derive(Args)]
struct VocabArgs {
    /// Vocabulary sidecar: one label per line, line number is the id.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Number of DAU clusters K (dau-int only); the vocabulary is 0..K plus specials.
    #[arg(long, conflicts_with = "vocab")]
    clusters: Option<usize>,
    /// Word-boundary label for symbolic corpora.
    #[arg(long, default_value = DEFAULT_BOUNDARY)]
    boundary: String,
    /// Symbolic corpora have no word-boundary unit.
    #[arg(long)]
    no_boundary: bool,
}

impl VocabArgs {
    fn boundary(&self, format: CorpusFormat) -> Option<&str> {
        (format == CorpusFormat::Symbolic && !self.no_boundary).then_some(self.boundary.as_str())
    }

    fn explicit(&self, format: CorpusFormat) -> Result<Option<BaseVocabulary>> {
        if let Some(path) = &self.vocab {
            return BaseVocabulary::load_sidecar(path, self.boundary(format)).map(Some);
        }
        Ok(self.clusters.map(BaseVocabulary::dau))
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Target vocabulary size |Z|.
    #[arg(long)]
    target_size: usize,
    /// Merge-table output, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Where to write an inferred symbolic vocabulary (default: `<out>.vocab`).
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Allow merges across the word boundary.
    #[arg(long)]
    ignore_boundaries: bool,
    /// Stop when the best pair occurs fewer times than this.
    #[arg(long, default_value_t = 2)]
    min_pair_count: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Use the slow reference trainer.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct MergesArgs {
    /// Merge-table file written by `train`.
    #[arg(long)]
    merges: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    merges: MergesArgs,
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Write tokens as `+`-joined unit labels instead of ids.
    #[arg(long)]
    surfaces: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Use the slow reference encoder.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct DecodeArgs {
    /// Tokenized corpus, or `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    /// Output unit format (default: dau-int for DAU tables, symbolic otherwise).
    #[arg(long)]
    format: Option<CorpusFormat>,
    #[command(flatten)]
    vocab: VocabArgs,
    #[command(flatten)]
    merges: MergesArgs,
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Input holds `+`-joined surfaces instead of token ids.
    #[arg(long)]
    surfaces: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    merges: MergesArgs,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Per-token error rate; repeat to pair with each `--n`.
    #[arg(long, required = true)]
    eps: Vec<f64>,
    /// Sequence length; repeat to pair with each `--eps`.
    #[arg(long, required = true)]
    n: Vec<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Independent draws from a Zipf law.
    Zipf {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        vocab_size: usize,
        #[arg(long)]
        num_sequences: usize,
        #[arg(long)]
        mean_length: usize,
        #[arg(long, default_value_t = 1.1)]
        exponent: f64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Runs of repeated units with geometric lengths.
    Runlength {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        num_sequences: usize,
        #[arg(long)]
        mean_length: usize,
        #[arg(long, default_value_t = 4.0)]
        mean_run: f64,
        #[arg(long, default_value_t = 1.0)]
        transition_skew: f64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

/// Reports a usage error the way clap does and exits with status 2.
fn usage_error(kind: ErrorKind, message: &str) -> ! {
    Cli::command().error(kind, message).exit()
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if is_stdio(path) {
        Ok(Box::new(BufReader::new(io::stdin().lock())))
    } else {
        Ok(Box::new(BufReader::new(File::open(path)?)))
    }
}

fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if is_stdio(path) {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn load(args: &CorpusArgs, vocabulary: Option<&BaseVocabulary>) -> Result<Corpus> {
    let explicit;
    let vocabulary = match vocabulary {
        Some(v) => Some(v),
        None => {
            explicit = args.vocab.explicit(args.format)?;
            explicit.as_ref()
        }
    };
    read_corpus(
        open_input(&args.input)?,
        args.format,
        vocabulary,
        args.vocab.boundary(args.format),
        args.input.display().to_string(),
    )
}

fn sidecar_path(merges: &Path) -> PathBuf {
    let mut s = merges.as_os_str().to_owned();
    s.push(".vocab");
    PathBuf::from(s)
}

/// Loads a merge table, resolving its base vocabulary from `--vocab`, `--clusters`,
/// or the `<merges>.vocab` sidecar written by `train`.
fn load_table(merges: &Path, vocab: &VocabArgs, format: Option<CorpusFormat>) -> Result<MergeTable> {
    let format = format.unwrap_or(CorpusFormat::Symbolic);
    let base = match vocab.explicit(format)? {
        Some(v) => Some(v),
        None => {
            let sidecar = sidecar_path(merges);
            if sidecar.exists() {
                Some(BaseVocabulary::load_sidecar(&sidecar, vocab.boundary(format))?)
            } else {
                None
            }
        }
    };
    MergeTable::load(merges, base.as_ref())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let corpus = load(&args.corpus, None)?;
    let options = TrainOptions::new(args.target_size)
        .respect_boundaries(!args.ignore_boundaries)
        .min_pair_count(args.min_pair_count)
        .threads(args.threads);
    let table = if args.oracle {
        naive_train(&corpus, &options)?
    } else {
        train(&corpus, &options)?
    };

    let inferred = args.corpus.format == CorpusFormat::Symbolic && args.corpus.vocab.vocab.is_none();
    if inferred {
        let path = match (&args.vocab_out, is_stdio(&args.out)) {
            (Some(p), _) => p.clone(),
            (None, false) => sidecar_path(&args.out),
            (None, true) => usage_error(
                ErrorKind::MissingRequiredArgument,
                "symbolic training to stdout needs --vocab-out for the inferred vocabulary",
            ),
        };
        corpus.vocabulary().write_sidecar(BufWriter::new(File::create(path)?))?;
    } else if let Some(path) = &args.vocab_out {
        corpus.vocabulary().write_sidecar(BufWriter::new(File::create(path)?))?;
    }
    table.write(open_output(&args.out)?)
}

fn run_encode(args: &EncodeArgs) -> Result<()> {
    let format = args.corpus.format;
    let table = load_table(&args.merges.merges, &args.corpus.vocab, Some(format))?;
    let mut out = open_output(&args.out)?;

    if args.threads > 1 && !args.oracle {
        let corpus = load(&args.corpus, Some(table.base()))?;
        for seq in encode_corpus(&corpus, &table, args.threads)?.sequences {
            write_tokens(&mut out, seq.as_slice(), &table, args.surfaces)?;
        }
    } else {
        // One line at a time; memory stays bounded by the longest sequence.
        for (i, line) in open_input(&args.corpus.input)?.lines().enumerate() {
            let seq = parse_line(&line?, i + 1, format, table.base())?;
            let tokens = if args.oracle {
                naive_encode(&seq, &table)?
            } else {
                unitbpe::encode(&seq, &table)?
            };
            write_tokens(&mut out, tokens.as_slice(), &table, args.surfaces)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_decode(args: &DecodeArgs) -> Result<()> {
    let table = load_table(&args.merges.merges, &args.vocab, args.format)?;
    let format = args.format.unwrap_or(if table.base().is_dau() {
        CorpusFormat::DauInt
    } else {
        CorpusFormat::Symbolic
    });
    let mut out = open_output(&args.out)?;
    for (i, line) in open_input(&args.input)?.lines().enumerate() {
        let line = line?;
        let units = if args.surfaces {
            parse_surfaces(&line, i + 1, table.base())?
        } else {
            decode(&parse_tokens(&line, i + 1, &table)?, &table)?
        };
        write_units(&mut out, units.as_slice(), table.base(), format)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StatsReport {
    #[serde(flatten)]
    lengths: unitbpe::corpus::CorpusStats,
    base_vocab: usize,
    run_length_mean: Option<f64>,
    max_run: usize,
    repetition_fraction: Option<f64>,
}

fn run_stats(args: &StatsArgs) -> Result<()> {
    let corpus = load(&args.corpus, None)?;
    let (mut max_run, mut repeated) = (0, 0usize);
    for seq in corpus.sequences() {
        let runs = run_length_stats(seq.as_slice());
        max_run = max_run.max(runs.max_run);
        repeated += seq.len() - runs.runs.len();
    }
    let total = corpus.total_units();
    let report = StatsReport {
        lengths: corpus_stats(&corpus),
        base_vocab: corpus.vocabulary().len(),
        run_length_mean: corpus_run_length_mean(&corpus),
        max_run,
        repetition_fraction: (total > 0).then(|| repeated as f64 / total as f64),
    };
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).map_err(io::Error::from)?
        )?;
    } else {
        let value = serde_json::to_value(&report).map_err(io::Error::from)?;
        for (k, v) in value.as_object().expect("struct serializes to an object") {
            writeln!(out, "{k}={v}")?;
        }
    }
    Ok(())
}

fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let table = load_table(&args.merges.merges, &args.corpus.vocab, Some(args.corpus.format))?;
    let corpus = load(&args.corpus, Some(table.base()))?;
    let report = analyze(&corpus, &table, args.threads)?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).map_err(io::Error::from)?
        )?;
    } else {
        out.write_all(report.to_key_value().as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TradeoffRow {
    eps: f64,
    n: u64,
    p_correct: f64,
}

fn run_tradeoff(args: &TradeoffArgs) -> Result<()> {
    if args.eps.len() != args.n.len() {
        usage_error(
            ErrorKind::WrongNumberOfValues,
            &format!("got {} --eps values but {} --n values", args.eps.len(), args.n.len()),
        );
    }
    let rows: Vec<TradeoffRow> = args
        .eps
        .iter()
        .zip(&args.n)
        .map(|(&eps, &n)| {
            Ok(TradeoffRow {
                eps,
                n,
                p_correct: edge_case_probability(eps, n)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(io::Error::from)?)?;
    } else {
        for r in rows {
            writeln!(
                out,
                "eps={} n={} p_correct={:.6} ({:.2}%)",
                r.eps,
                r.n,
                r.p_correct,
                100.0 * r.p_correct
            )?;
        }
    }
    Ok(())
}

fn run_synth(cmd: &SynthCommand) -> Result<()> {
    let (corpus, out) = match cmd {
        SynthCommand::Zipf {
            seed,
            vocab_size,
            num_sequences,
            mean_length,
            exponent,
            out,
        } => {
            let spec = ZipfSpec {
                seed: *seed,
                vocab_size: *vocab_size,
                num_sequences: *num_sequences,
                mean_length: *mean_length,
                exponent: *exponent,
            };
            (gen_zipf_corpus(&spec)?, out)
        }
        SynthCommand::Runlength {
            seed,
            clusters,
            num_sequences,
            mean_length,
            mean_run,
            transition_skew,
            out,
        } => {
            let spec = RunLengthSpec {
                seed: *seed,
                clusters: *clusters,
                num_sequences: *num_sequences,
                mean_length: *mean_length,
                mean_run: *mean_run,
                transition_skew: *transition_skew,
            };
            (gen_runlength_corpus(&spec)?, out)
        }
    };
    let mut w = open_output(out)?;
    corpus.write(&mut w, CorpusFormat::DauInt)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => run_train(a),
        Command::Encode(a) => run_encode(a),
        Command::Decode(a) => run_decode(a),
        Command::Stats(a) => run_stats(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Tradeoff(a) => run_tradeoff(a),
        Command::Synth(c) => run_synth(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
