//! Unit inventories, unit sequences and the two line-oriented corpus formats.
//!
//! A corpus file holds one sequence per line. In `dau-int` files every token is a
//! base-10 cluster id; in `symbolic` files tokens are free-form labels (phones) and
//! one label is reserved as the word boundary. Special tokens (PAD, BOS, EOS) are
//! part of every [`BaseVocabulary`] but never appear inside corpus files.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of a unit in a [`BaseVocabulary`], or of a token in a merge table.
pub type UnitId = u32;

/// Number of k-means clusters used for the discrete acoustic unit inventory.
pub const DAU_CLUSTERS: usize = 1000;
/// Size of the phonetic inventory (vowel/stress combinations, consonants, pause and separator).
pub const PHONETIC_UNITS: usize = 81;
/// Labels of the reserved special tokens, in id order.
pub const SPECIAL_LABELS: [&str; 3] = ["<pad>", "<bos>", "<eos>"];
pub const NUM_SPECIAL: usize = SPECIAL_LABELS.len();
/// Boundary label used for symbolic corpora unless configured otherwise.
pub const DEFAULT_BOUNDARY: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitSymbol {
    pub id: UnitId,
    pub surface: String,
}

/// The original unit inventory: content units, the three special tokens and an
/// optional word-boundary unit.
#[derive(Debug, Clone)]
pub struct BaseVocabulary {
    units: Vec<UnitSymbol>,
    index: HashMap<String, UnitId>,
    special: [UnitId; NUM_SPECIAL],
    boundary: Option<UnitId>,
}

impl PartialEq for BaseVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.units == other.units && self.special == other.special && self.boundary == other.boundary
    }
}

impl Eq for BaseVocabulary {}

impl BaseVocabulary {
    /// Vocabulary for `clusters` acoustic units labelled `0..clusters`, followed by
    /// the special tokens. Its size is `clusters + 3`.
    pub fn dau(clusters: usize) -> Self {
        let labels = (0..clusters).map(|i| i.to_string()).collect();
        Self::from_labels(labels, None).expect("decimal labels are unique")
    }

    /// Builds a vocabulary whose ids are the positions in `labels`.
    ///
    /// Special labels missing from `labels` are appended. If `boundary` is given,
    /// the label is appended when absent.
    pub fn from_labels(mut labels: Vec<String>, boundary: Option<&str>) -> Result<Self> {
        if let Some(b) = boundary {
            if SPECIAL_LABELS.contains(&b) {
                return Err(Error::validation(format!(
                    "boundary label {b:?} collides with a special token"
                )));
            }
            if !labels.iter().any(|l| l == b) {
                labels.push(b.to_string());
            }
        }
        for special in SPECIAL_LABELS {
            if !labels.iter().any(|l| l == special) {
                labels.push(special.to_string());
            }
        }

        let mut index = HashMap::with_capacity(labels.len());
        let mut units = Vec::with_capacity(labels.len());
        for (i, label) in labels.into_iter().enumerate() {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::validation(format!(
                    "unit label {label:?} at id {i} is empty or contains whitespace"
                )));
            }
            let id = UnitId::try_from(i).map_err(|_| Error::validation("vocabulary exceeds u32 ids"))?;
            if index.insert(label.clone(), id).is_some() {
                return Err(Error::validation(format!("duplicate unit label {label:?}")));
            }
            units.push(UnitSymbol { id, surface: label });
        }

        let special = SPECIAL_LABELS.map(|l| index[l]);
        let boundary = boundary.map(|b| index[b]);
        Ok(Self {
            units,
            index,
            special,
            boundary,
        })
    }

    /// Reads a sidecar vocabulary: one label per line, line number (from 0) is the id.
    pub fn read_sidecar<R: BufRead>(reader: R, boundary: Option<&str>) -> Result<Self> {
        let mut labels = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let label = line.trim();
            if label.is_empty() {
                return Err(Error::parse(i + 1, "empty vocabulary label"));
            }
            labels.push(label.to_string());
        }
        Self::from_labels(labels, boundary)
    }

    pub fn load_sidecar(path: &Path, boundary: Option<&str>) -> Result<Self> {
        Self::read_sidecar(BufReader::new(File::open(path)?), boundary)
    }

    pub fn write_sidecar<W: Write>(&self, mut writer: W) -> Result<()> {
        for unit in &self.units {
            writeln!(writer, "{}", unit.surface)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[UnitSymbol] {
        &self.units
    }

    pub fn label(&self, id: UnitId) -> Option<&str> {
        self.units.get(id as usize).map(|u| u.surface.as_str())
    }

    pub fn id_of(&self, label: &str) -> Option<UnitId> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, id: UnitId) -> bool {
        (id as usize) < self.units.len()
    }

    /// Ids of PAD, BOS and EOS.
    pub fn special(&self) -> [UnitId; NUM_SPECIAL] {
        self.special
    }

    pub fn is_special(&self, id: UnitId) -> bool {
        self.special.contains(&id)
    }

    pub fn boundary(&self) -> Option<UnitId> {
        self.boundary
    }

    pub fn boundary_label(&self) -> Option<&str> {
        self.boundary.and_then(|b| self.label(b))
    }

    /// Same inventory with the boundary unit demoted to an ordinary unit.
    pub fn without_boundary(&self) -> Self {
        Self {
            boundary: None,
            ..self.clone()
        }
    }

    /// Whether `id` may appear in a corpus file (content units and the boundary).
    pub fn is_content(&self, id: UnitId) -> bool {
        self.contains(id) && !self.is_special(id)
    }

    /// True if every unit label is the decimal string of its id, as in [`BaseVocabulary::dau`].
    pub fn is_dau(&self) -> bool {
        self.boundary.is_none()
            && self
                .units
                .iter()
                .filter(|u| !self.is_special(u.id))
                .all(|u| u.surface == u.id.to_string())
    }
}

/// A sequence of unit ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct UnitSequence {
    pub units: Vec<UnitId>,
}

impl UnitSequence {
    pub fn new(units: Vec<UnitId>) -> Self {
        Self { units }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn as_slice(&self) -> &[UnitId] {
        &self.units
    }

    pub fn validate(&self, vocabulary: &BaseVocabulary) -> Result<()> {
        match self.units.iter().find(|&&u| !vocabulary.contains(u)) {
            Some(bad) => Err(Error::validation(format!(
                "unit id {bad} out of range for vocabulary of size {}",
                vocabulary.len()
            ))),
            None => Ok(()),
        }
    }
}

impl From<Vec<UnitId>> for UnitSequence {
    fn from(units: Vec<UnitId>) -> Self {
        Self { units }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Whitespace-separated decimal cluster ids.
    DauInt,
    /// Whitespace-separated labels.
    Symbolic,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dau-int" => Ok(CorpusFormat::DauInt),
            "symbolic" => Ok(CorpusFormat::Symbolic),
            other => Err(format!(
                "unknown corpus format {other:?} (expected dau-int or symbolic)"
            )),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::DauInt => "dau-int",
            CorpusFormat::Symbolic => "symbolic",
        })
    }
}

/// A validated collection of unit sequences over one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: BaseVocabulary,
    sequences: Vec<UnitSequence>,
    source: String,
}

impl Corpus {
    pub fn new(vocabulary: BaseVocabulary, sequences: Vec<UnitSequence>, source: impl Into<String>) -> Result<Self> {
        for (i, seq) in sequences.iter().enumerate() {
            seq.validate(&vocabulary)
                .map_err(|e| Error::validation(format!("sequence {}: {e}", i + 1)))?;
        }
        Ok(Self {
            vocabulary,
            sequences,
            source: source.into(),
        })
    }

    pub fn vocabulary(&self) -> &BaseVocabulary {
        &self.vocabulary
    }

    pub fn sequences(&self) -> &[UnitSequence] {
        &self.sequences
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn total_units(&self) -> usize {
        self.sequences.iter().map(UnitSequence::len).sum()
    }

    /// Writes the corpus back in `format`, one sequence per line.
    pub fn write<W: Write>(&self, mut writer: W, format: CorpusFormat) -> Result<()> {
        for seq in &self.sequences {
            write_units(&mut writer, seq.as_slice(), &self.vocabulary, format)?;
        }
        Ok(())
    }
}

/// Writes one sequence line. `dau-int` writes ids, `symbolic` writes labels.
pub fn write_units<W: Write>(
    writer: &mut W,
    units: &[UnitId],
    vocabulary: &BaseVocabulary,
    format: CorpusFormat,
) -> Result<()> {
    let mut first = true;
    for &u in units {
        if !first {
            writer.write_all(b" ")?;
        }
        first = false;
        match format {
            CorpusFormat::DauInt => write!(writer, "{u}")?,
            CorpusFormat::Symbolic => {
                let label = vocabulary
                    .label(u)
                    .ok_or_else(|| Error::validation(format!("unit id {u} out of range")))?;
                writer.write_all(label.as_bytes())?;
            }
        }
    }
    writer.write_all(b"\n")?;
    Ok(())
}

/// Loads a corpus file. Symbolic files without a supplied vocabulary infer one,
/// reserving [`DEFAULT_BOUNDARY`] as the word boundary.
pub fn load_corpus(path: &Path, format: CorpusFormat, vocabulary: Option<&BaseVocabulary>) -> Result<Corpus> {
    let reader = BufReader::new(File::open(path)?);
    let boundary = match format {
        CorpusFormat::Symbolic => Some(DEFAULT_BOUNDARY),
        CorpusFormat::DauInt => None,
    };
    read_corpus(reader, format, vocabulary, boundary, path.display().to_string())
}

/// Parses a corpus from any buffered reader.
///
/// `boundary` only matters when a symbolic vocabulary is inferred; a supplied
/// vocabulary carries its own boundary.
pub fn read_corpus<R: BufRead>(
    reader: R,
    format: CorpusFormat,
    vocabulary: Option<&BaseVocabulary>,
    boundary: Option<&str>,
    source: impl Into<String>,
) -> Result<Corpus> {
    match format {
        CorpusFormat::DauInt => read_dau_int(reader, vocabulary, source.into()),
        CorpusFormat::Symbolic => read_symbolic(reader, vocabulary, boundary, source.into()),
    }
}

fn parse_id(tok: &str, lineno: usize) -> Result<UnitId> {
    tok.parse()
        .map_err(|_| Error::parse(lineno, format!("expected a unit id, found {tok:?}")))
}

/// Parses one corpus line against a known vocabulary. Only content units and
/// the boundary are accepted.
pub fn parse_line(
    line: &str,
    lineno: usize,
    format: CorpusFormat,
    vocabulary: &BaseVocabulary,
) -> Result<UnitSequence> {
    let mut units = Vec::new();
    for tok in line.split_whitespace() {
        let id = match format {
            CorpusFormat::DauInt => {
                let id = parse_id(tok, lineno)?;
                if !vocabulary.is_content(id) {
                    return Err(Error::validation(format!(
                        "line {lineno}: unit id {id} is not a content unit of the vocabulary (size {})",
                        vocabulary.len()
                    )));
                }
                id
            }
            CorpusFormat::Symbolic => vocabulary
                .id_of(tok)
                .filter(|&id| !vocabulary.is_special(id))
                .ok_or_else(|| Error::validation(format!("line {lineno}: unknown unit label {tok:?}")))?,
        };
        units.push(id);
    }
    Ok(UnitSequence::new(units))
}

fn read_dau_int<R: BufRead>(reader: R, vocabulary: Option<&BaseVocabulary>, source: String) -> Result<Corpus> {
    let mut sequences = Vec::new();
    let mut max_id: Option<UnitId> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let units = match vocabulary {
            Some(v) => parse_line(&line, lineno, CorpusFormat::DauInt, v)?.units,
            None => line
                .split_whitespace()
                .map(|tok| parse_id(tok, lineno))
                .collect::<Result<_>>()?,
        };
        max_id = max_id.max(units.iter().copied().max());
        sequences.push(UnitSequence::new(units));
    }

    let vocabulary = match vocabulary {
        Some(v) => v.clone(),
        None => {
            let clusters = max_id.map_or(0, |m| m as usize + 1);
            BaseVocabulary::dau(clusters)
        }
    };
    Ok(Corpus {
        vocabulary,
        sequences,
        source,
    })
}

fn read_symbolic<R: BufRead>(
    reader: R,
    vocabulary: Option<&BaseVocabulary>,
    boundary: Option<&str>,
    source: String,
) -> Result<Corpus> {
    let mut sequences = Vec::new();
    match vocabulary {
        Some(v) => {
            for (i, line) in reader.lines().enumerate() {
                sequences.push(parse_line(&line?, i + 1, CorpusFormat::Symbolic, v)?);
            }
            Ok(Corpus {
                vocabulary: v.clone(),
                sequences,
                source,
            })
        }
        None => {
            let mut labels: Vec<String> = Vec::new();
            let mut index: HashMap<String, UnitId> = HashMap::new();
            if let Some(b) = boundary {
                index.insert(b.to_string(), 0);
                labels.push(b.to_string());
            }
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                let lineno = i + 1;
                let mut units = Vec::new();
                for tok in line.split_whitespace() {
                    if SPECIAL_LABELS.contains(&tok) {
                        return Err(Error::validation(format!(
                            "line {lineno}: special token {tok:?} may not appear in a corpus file"
                        )));
                    }
                    let id = match index.get(tok) {
                        Some(&id) => id,
                        None => {
                            let id = labels.len() as UnitId;
                            index.insert(tok.to_string(), id);
                            labels.push(tok.to_string());
                            id
                        }
                    };
                    units.push(id);
                }
                sequences.push(UnitSequence::new(units));
            }
            let vocabulary = BaseVocabulary::from_labels(labels, boundary)?;
            Ok(Corpus {
                vocabulary,
                sequences,
                source,
            })
        }
    }
}

/// Splits `seq` at every boundary unit. Rejoining the chunks with one boundary
/// unit between neighbours reproduces `seq`.
pub fn split_on_boundaries(seq: &UnitSequence, vocabulary: &BaseVocabulary) -> Result<Vec<UnitSequence>> {
    let boundary = vocabulary
        .boundary()
        .ok_or_else(|| Error::contract("vocabulary has no word-boundary unit"))?;
    Ok(seq
        .as_slice()
        .split(|&u| u == boundary)
        .map(|chunk| UnitSequence::new(chunk.to_vec()))
        .collect())
}

/// Inverse of [`split_on_boundaries`].
pub fn join_on_boundary(chunks: &[UnitSequence], boundary: UnitId) -> UnitSequence {
    let mut units = Vec::new();
    for (i, chunk) in chunks.iter().enumerate() {
        if i > 0 {
            units.push(boundary);
        }
        units.extend_from_slice(chunk.as_slice());
    }
    UnitSequence::new(units)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sequences: usize,
    pub total_units: usize,
    /// Mean sequence length; `None` for an empty corpus.
    pub mean_length: Option<f64>,
    pub min_length: Option<usize>,
    pub max_length: Option<usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let lengths = corpus.sequences().iter().map(UnitSequence::len);
    let total_units: usize = lengths.clone().sum();
    let sequences = corpus.len();
    CorpusStats {
        sequences,
        total_units,
        mean_length: (sequences > 0).then(|| total_units as f64 / sequences as f64),
        min_length: lengths.clone().min(),
        max_length: lengths.max(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, format: CorpusFormat, vocab: Option<&BaseVocabulary>) -> Result<Corpus> {
        let boundary = (format == CorpusFormat::Symbolic).then_some(DEFAULT_BOUNDARY);
        read_corpus(text.as_bytes(), format, vocab, boundary, "test")
    }

    #[test]
    fn vocabulary_sizes() {
        assert_eq!(BaseVocabulary::dau(DAU_CLUSTERS).len(), 1003);
        let phones: Vec<String> = (0..PHONETIC_UNITS).map(|i| format!("p{i}")).collect();
        let v = BaseVocabulary::from_labels(phones, Some("p80")).unwrap();
        assert_eq!(v.len(), 84);
        assert_eq!(v.boundary(), Some(80));
        assert!(v.special().iter().all(|&s| s >= 81));
    }

    #[test]
    fn specials_follow_content_units() {
        let v = BaseVocabulary::dau(10);
        assert_eq!(v.special(), [10, 11, 12]);
        assert_eq!(v.label(11), Some("<bos>"));
        assert!(!v.is_content(12));
        assert!(v.is_dau());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let labels = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            BaseVocabulary::from_labels(labels, None),
            Err(Error::Validation(_))
        ));
        assert!(BaseVocabulary::from_labels(vec![], Some("<pad>")).is_err());
    }

    #[test]
    fn load_dau_with_supplied_vocabulary() {
        let v = BaseVocabulary::dau(10);
        let c = parse("7 7 9\n3 3", CorpusFormat::DauInt, Some(&v)).unwrap();
        let lens: Vec<_> = c.sequences().iter().map(UnitSequence::len).collect();
        assert_eq!(lens, vec![3, 2]);
        assert_eq!(c.vocabulary().len(), 13);
    }

    #[test]
    fn load_dau_infers_vocabulary() {
        let c = parse("7\t7   9\n3 3\n", CorpusFormat::DauInt, None).unwrap();
        assert_eq!(c.vocabulary().len(), 10 + 3);
        assert_eq!(c.sequences()[0].as_slice(), &[7, 7, 9]);
    }

    #[test]
    fn load_symbolic_with_boundary() {
        let c = parse("AE1 _ K AE1 T", CorpusFormat::Symbolic, None).unwrap();
        assert_eq!(c.len(), 1);
        let seq = &c.sequences()[0];
        assert_eq!(seq.len(), 5);
        let b = c.vocabulary().boundary().unwrap();
        assert_eq!(seq.as_slice().iter().filter(|&&u| u == b).count(), 1);
    }

    #[test]
    fn malformed_dau_line_reports_line_number() {
        let err = parse("7 x 9", CorpusFormat::DauInt, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse("1 2\n3 -4", CorpusFormat::DauInt, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn out_of_range_and_special_ids_rejected() {
        let v = BaseVocabulary::dau(10);
        let err = parse("1 2\n10", CorpusFormat::DauInt, Some(&v)).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse("57", CorpusFormat::DauInt, Some(&v)).is_err());
    }

    #[test]
    fn unknown_symbolic_label_rejected() {
        let v = BaseVocabulary::from_labels(vec!["K".into(), "T".into()], Some("_")).unwrap();
        let err = parse("K T\nK ZH", CorpusFormat::Symbolic, Some(&v)).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse("K <eos>", CorpusFormat::Symbolic, Some(&v)).is_err());
        assert!(parse("K <eos>", CorpusFormat::Symbolic, None).is_err());
    }

    #[test]
    fn empty_file_and_empty_lines() {
        let c = parse("", CorpusFormat::DauInt, None).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.vocabulary().len(), 3);

        let c = parse("1 2\n\n3\n", CorpusFormat::DauInt, None).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.sequences()[1].is_empty());
        let mut out = Vec::new();
        c.write(&mut out, CorpusFormat::DauInt).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 2\n\n3\n");
    }

    #[test]
    fn symbolic_round_trip_normalizes_whitespace() {
        let text = "K  AE1\tT _ S\n\nAE1 T\n";
        let c = parse(text, CorpusFormat::Symbolic, None).unwrap();
        let mut out = Vec::new();
        c.write(&mut out, CorpusFormat::Symbolic).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "K AE1 T _ S\n\nAE1 T\n");
    }

    #[test]
    fn sidecar_round_trip() {
        let v = BaseVocabulary::from_labels(vec!["K".into(), "_".into()], Some("_")).unwrap();
        let mut buf = Vec::new();
        v.write_sidecar(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "K\n_\n<pad>\n<bos>\n<eos>\n");
        let back = BaseVocabulary::read_sidecar(buf.as_slice(), Some("_")).unwrap();
        assert_eq!(back, v);
    }

    fn phones() -> (BaseVocabulary, impl Fn(&str) -> UnitSequence) {
        let labels = ["K", "AE1", "T", "S", "A", "B", "C"].map(String::from).to_vec();
        let v = BaseVocabulary::from_labels(labels, Some("_")).unwrap();
        let v2 = v.clone();
        let seq = move |s: &str| UnitSequence::new(s.split_whitespace().map(|t| v2.id_of(t).unwrap()).collect());
        (v, seq)
    }

    #[test]
    fn split_examples() {
        let (v, seq) = phones();
        let chunks = split_on_boundaries(&seq("K AE1 T _ S AE1 T"), &v).unwrap();
        assert_eq!(chunks, vec![seq("K AE1 T"), seq("S AE1 T")]);

        let chunks = split_on_boundaries(&seq("_ _ A"), &v).unwrap();
        assert_eq!(chunks, vec![seq(""), seq(""), seq("A")]);

        let chunks = split_on_boundaries(&seq("A B C"), &v).unwrap();
        assert_eq!(chunks, vec![seq("A B C")]);
    }

    #[test]
    fn split_requires_boundary() {
        let v = BaseVocabulary::dau(4);
        let err = split_on_boundaries(&UnitSequence::new(vec![1, 2]), &v).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn stats_examples() {
        let v = BaseVocabulary::dau(10);
        let c = Corpus::new(v.clone(), vec![vec![1, 2, 3].into(), vec![1, 2, 3, 4, 5].into()], "t").unwrap();
        let s = corpus_stats(&c);
        assert_eq!(s.mean_length, Some(4.0));
        assert_eq!((s.min_length, s.max_length), (Some(3), Some(5)));

        let c = Corpus::new(v.clone(), vec![vec![0; 872].into()], "t").unwrap();
        assert_eq!(corpus_stats(&c).mean_length, Some(872.0));

        let c = Corpus::new(v, vec![], "t").unwrap();
        let s = corpus_stats(&c);
        assert_eq!((s.sequences, s.total_units, s.mean_length), (0, 0, None));
    }

    #[test]
    fn corpus_new_validates() {
        let v = BaseVocabulary::dau(2);
        assert!(Corpus::new(v, vec![vec![0, 5].into()], "t").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_then_join_is_identity(units in proptest::collection::vec(0u32..8, 0..40)) {
                let labels = (0..8).map(|i| format!("u{i}")).collect();
                let v = BaseVocabulary::from_labels(labels, Some("u3")).unwrap();
                let seq = UnitSequence::new(units);
                let chunks = split_on_boundaries(&seq, &v).unwrap();
                prop_assert!(chunks.iter().all(|c| !c.as_slice().contains(&3)));
                prop_assert_eq!(join_on_boundary(&chunks, 3), seq);
            }

            #[test]
            fn dau_serialize_round_trip(
                lines in proptest::collection::vec(proptest::collection::vec(0u32..50, 0..10), 0..10)
            ) {
                let text: String = lines
                    .iter()
                    .map(|l| l.iter().map(u32::to_string).collect::<Vec<_>>().join("  ") + "\n")
                    .collect();
                let v = BaseVocabulary::dau(50);
                let c = read_corpus(text.as_bytes(), CorpusFormat::DauInt, Some(&v), None, "p").unwrap();
                let mut out = Vec::new();
                c.write(&mut out, CorpusFormat::DauInt).unwrap();
                let back = read_corpus(out.as_slice(), CorpusFormat::DauInt, Some(&v), None, "p").unwrap();
                prop_assert_eq!(back.sequences(), c.sequences());
                prop_assert_eq!(String::from_utf8(out).unwrap(), text.replace("  ", " "));
            }
        }
    }
}
