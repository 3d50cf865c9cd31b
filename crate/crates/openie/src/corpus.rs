//! Data model and IO for annotated sentences, extraction tuples, and
//! embedding tables.
//!
//! Sentences travel in a line-delimited record format (one JSON object per
//! line, see `docs/formats.md`). Every record is validated on load: token
//! annotations must form a single-rooted dependency tree and every extraction
//! span must lie inside the sentence. Malformed records are rejected with
//! their line number.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel head index marking the root token of a dependency tree.
pub const ROOT_HEAD: i32 = -1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: invariant violation: {message}")]
    Invariant { line: usize, message: String },
    #[error("line {line}: sentence has no extractions but gold data was required")]
    MissingGold { line: usize },
    #[error("embedding file {path} is empty")]
    EmptyEmbeddings { path: String },
    #[error("line {line}: expected {expected} dimensions, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// One token of an annotated sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Coarse POS tag.
    pub pos: String,
    /// Index of the syntactic parent, or [`ROOT_HEAD`] for the root.
    pub dep_head: i32,
    /// Dependency relation to the parent.
    pub dep_rel: String,
}

/// An annotated sentence: tokens with POS tags and dependency arcs.
///
/// Invariants (checked by [`Sentence::validate`]): non-empty, exactly one
/// root, every head in range and distinct from its own index, arcs acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks the dependency-tree invariants, returning a description of the
    /// first violation found.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("sentence has no tokens".into());
        }
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.dep_head == ROOT_HEAD {
                roots += 1;
                continue;
            }
            if tok.dep_head < 0 || tok.dep_head as usize >= n {
                return Err(format!(
                    "token {i}: dep_head {} out of range for length {n}",
                    tok.dep_head
                ));
            }
            if tok.dep_head as usize == i {
                return Err(format!("token {i}: dep_head points at itself"));
            }
        }
        if roots != 1 {
            return Err(format!("expected exactly one root token, found {roots}"));
        }
        // Walk each parent chain; a chain longer than n tokens means a cycle.
        for start in 0..n {
            let mut cur = start;
            let mut hops = 0;
            while self.tokens[cur].dep_head != ROOT_HEAD {
                cur = self.tokens[cur].dep_head as usize;
                hops += 1;
                if hops > n {
                    return Err(format!("dependency arcs contain a cycle through token {start}"));
                }
            }
        }
        Ok(())
    }

    /// Index of the root token. Sentences are validated on load, so this
    /// cannot fail on loaded data.
    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .position(|t| t.dep_head == ROOT_HEAD)
            .expect("validated sentence has a root")
    }
}

/// A contiguous token interval with inclusive, 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }

    /// True iff the two intervals share at least one token.
    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// True iff `self` lies inside `other` and the two differ.
    pub fn contained_in(&self, other: &Span) -> bool {
        self.start >= other.start && self.end <= other.end && self != other
    }

    pub fn in_bounds(&self, sentence_len: usize) -> bool {
        self.start <= self.end && self.end < sentence_len
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.start, self.end)
    }
}

/// The four argument labels. The label set is fixed and closed.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum ArgLabel {
    A0,
    A1,
    A2,
    A3,
}

impl ArgLabel {
    pub const ALL: [ArgLabel; 4] = [ArgLabel::A0, ArgLabel::A1, ArgLabel::A2, ArgLabel::A3];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            ArgLabel::A0 => 0,
            ArgLabel::A1 => 1,
            ArgLabel::A2 => 2,
            ArgLabel::A3 => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<ArgLabel> {
        Self::ALL.get(i).copied()
    }

    pub fn parse(s: &str) -> Option<ArgLabel> {
        match s {
            "A0" => Some(ArgLabel::A0),
            "A1" => Some(ArgLabel::A1),
            "A2" => Some(ArgLabel::A2),
            "A3" => Some(ArgLabel::A3),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArgLabel::A0 => "A0",
            ArgLabel::A1 => "A1",
            ArgLabel::A2 => "A2",
            ArgLabel::A3 => "A3",
        }
    }
}

impl fmt::Display for ArgLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A predicate span plus its argument spans and a confidence score.
///
/// Arguments are a partial map: absent labels were dropped (the model selected
/// the NULL span for them). Confidence is in `[0, 1]` for bootstrapped
/// training tuples and `[0, 1 + 4]` for system output.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub predicate: Span,
    /// Fixed-size map indexed by [`ArgLabel::index`]; `None` = label absent.
    pub args: [Option<Span>; ArgLabel::COUNT],
    pub confidence: f64,
}

impl Extraction {
    pub fn new(predicate: Span, confidence: f64) -> Self {
        Extraction {
            predicate,
            args: [None; ArgLabel::COUNT],
            confidence,
        }
    }

    pub fn arg(&self, label: ArgLabel) -> Option<Span> {
        self.args[label.index()]
    }

    pub fn set_arg(&mut self, label: ArgLabel, span: Span) {
        self.args[label.index()] = Some(span);
    }

    /// Present `(label, span)` pairs in label order.
    pub fn args_present(&self) -> impl Iterator<Item = (ArgLabel, Span)> + '_ {
        ArgLabel::ALL
            .iter()
            .filter_map(|&l| self.args[l.index()].map(|s| (l, s)))
    }

    fn validate(&self, sentence_len: usize) -> Result<(), String> {
        if !self.predicate.in_bounds(sentence_len) {
            return Err(format!(
                "predicate span {} out of range for sentence length {sentence_len}",
                self.predicate
            ));
        }
        for (label, span) in self.args_present() {
            if !span.in_bounds(sentence_len) {
                return Err(format!(
                    "argument {label} span {span} out of range for sentence length {sentence_len}"
                ));
            }
            if span.overlaps(&self.predicate) {
                return Err(format!(
                    "argument {label} span {span} overlaps predicate span {}",
                    self.predicate
                ));
            }
        }
        if !self.confidence.is_finite() || self.confidence < 0.0 {
            return Err(format!("confidence {} is not a finite nonnegative value", self.confidence));
        }
        Ok(())
    }
}

/// A loaded corpus: sentences in file order, each with its extractions.
pub type Dataset = Vec<(Sentence, Vec<Extraction>)>;

/// Counters for records the loader accepted with reservations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Argument entries whose label was outside `A0..A3`, dropped from their
    /// extraction and counted here.
    pub skipped_labels: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawExtraction {
    pred: [usize; 2],
    #[serde(default)]
    args: BTreeMap<String, [usize; 2]>,
    confidence: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    tokens: Vec<String>,
    pos: Vec<String>,
    dep_head: Vec<i32>,
    dep_rel: Vec<String>,
    #[serde(default)]
    extractions: Vec<RawExtraction>,
}

fn record_to_sentence(raw: &RawRecord, line: usize) -> Result<Sentence, CorpusError> {
    let n = raw.tokens.len();
    if raw.pos.len() != n || raw.dep_head.len() != n || raw.dep_rel.len() != n {
        return Err(CorpusError::Malformed {
            line,
            message: format!(
                "annotation lists disagree on length: tokens={n}, pos={}, dep_head={}, dep_rel={}",
                raw.pos.len(),
                raw.dep_head.len(),
                raw.dep_rel.len()
            ),
        });
    }
    let tokens = (0..n)
        .map(|i| Token {
            surface: raw.tokens[i].clone(),
            pos: raw.pos[i].clone(),
            dep_head: raw.dep_head[i],
            dep_rel: raw.dep_rel[i].clone(),
        })
        .collect();
    let sentence = Sentence {
        id: raw.id.clone(),
        tokens,
    };
    sentence
        .validate()
        .map_err(|message| CorpusError::Invariant { line, message })?;
    Ok(sentence)
}

/// Loads a corpus from the line-delimited record format.
///
/// With `require_gold` set, a sentence without extractions is an error.
/// Returns the dataset in file order together with a [`LoadReport`].
pub fn load_corpus(
    path: impl AsRef<Path>,
    require_gold: bool,
) -> Result<(Dataset, LoadReport), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut dataset = Dataset::new();
    let mut report = LoadReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let sentence = record_to_sentence(&raw, line_no)?;
        let mut extractions = Vec::with_capacity(raw.extractions.len());
        for raw_ext in &raw.extractions {
            let mut ext = Extraction::new(Span::new_checked(raw_ext.pred, line_no)?, raw_ext.confidence);
            for (key, &[s, e]) in &raw_ext.args {
                match ArgLabel::parse(key) {
                    Some(label) => ext.set_arg(label, Span::new_checked([s, e], line_no)?),
                    None => report.skipped_labels += 1,
                }
            }
            ext.validate(sentence.len())
                .map_err(|message| CorpusError::Invariant { line: line_no, message })?;
            extractions.push(ext);
        }
        if require_gold && extractions.is_empty() {
            return Err(CorpusError::MissingGold { line: line_no });
        }
        dataset.push((sentence, extractions));
    }
    Ok((dataset, report))
}

impl Span {
    fn new_checked(pair: [usize; 2], line: usize) -> Result<Span, CorpusError> {
        if pair[0] > pair[1] {
            return Err(CorpusError::Invariant {
                line,
                message: format!("span start {} exceeds end {}", pair[0], pair[1]),
            });
        }
        Ok(Span::new(pair[0], pair[1]))
    }
}

/// Writes a dataset in the same record format that [`load_corpus`] reads.
pub fn save_extractions(
    path: impl AsRef<Path>,
    dataset: &[(Sentence, Vec<Extraction>)],
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    for (sentence, extractions) in dataset {
        let raw = RawRecord {
            id: sentence.id.clone(),
            tokens: sentence.tokens.iter().map(|t| t.surface.clone()).collect(),
            pos: sentence.tokens.iter().map(|t| t.pos.clone()).collect(),
            dep_head: sentence.tokens.iter().map(|t| t.dep_head).collect(),
            dep_rel: sentence.tokens.iter().map(|t| t.dep_rel.clone()).collect(),
            extractions: extractions
                .iter()
                .map(|e| RawExtraction {
                    pred: [e.predicate.start, e.predicate.end],
                    args: e
                        .args_present()
                        .map(|(l, s)| (l.as_str().to_string(), [s.start, s.end]))
                        .collect(),
                    confidence: e.confidence,
                })
                .collect(),
        };
        let mut line = serde_json::to_string(&raw).expect("record serialization cannot fail");
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    out.flush().map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A vocabulary of word surfaces with row indices into an embedding matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocabulary: HashMap<String, usize>,
    /// `(|V| + 1) x dim`; the last row is the UNK vector.
    pub matrix: Array2<f64>,
    pub unk_index: usize,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row index for a surface form: exact match, then lowercased match,
    /// then the UNK row.
    pub fn lookup_index(&self, surface: &str) -> usize {
        if let Some(&i) = self.vocabulary.get(surface) {
            return i;
        }
        let lower = surface.to_lowercase();
        if let Some(&i) = self.vocabulary.get(&lower) {
            return i;
        }
        self.unk_index
    }

    /// Embedding row for a surface form, under the same fallback order.
    pub fn lookup_token(&self, surface: &str) -> Array1<f64> {
        self.matrix.row(self.lookup_index(surface)).to_owned()
    }

    /// Builds a table directly from `(surface, vector)` pairs, appending a
    /// mean-initialized UNK row. Used by tests and checkpoint loading.
    pub fn from_rows(entries: Vec<(String, Vec<f64>)>, dim: usize) -> Self {
        let n = entries.len();
        let mut matrix = Array2::zeros((n + 1, dim));
        let mut vocabulary = HashMap::with_capacity(n);
        for (i, (surface, vector)) in entries.into_iter().enumerate() {
            assert_eq!(vector.len(), dim);
            vocabulary.insert(surface, i);
            for (j, v) in vector.into_iter().enumerate() {
                matrix[(i, j)] = v;
            }
        }
        if n > 0 {
            let mean = matrix.slice(ndarray::s![..n, ..]).mean_axis(ndarray::Axis(0)).unwrap();
            matrix.row_mut(n).assign(&mean);
        }
        EmbeddingTable {
            vocabulary,
            matrix,
            unk_index: n,
        }
    }

    /// Surfaces in row order (excluding the UNK row).
    pub fn surfaces(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.unk_index];
        for (s, &i) in &self.vocabulary {
            out[i] = s.clone();
        }
        out
    }
}

/// Loads a plain-text embedding file: one token per line, surface followed by
/// `dim` reals, whitespace-separated. An UNK row initialized to the mean of
/// all loaded vectors is appended.
pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<EmbeddingTable, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let mut parts = text.split_whitespace();
        let surface = parts.next().unwrap().to_string();
        let values: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
        let values = values.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: format!("bad embedding value: {e}"),
        })?;
        if values.len() != dim {
            return Err(CorpusError::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        // First occurrence wins on duplicate surfaces.
        if seen.insert(surface.clone(), ()).is_none() {
            entries.push((surface, values));
        }
    }
    if entries.is_empty() {
        return Err(CorpusError::EmptyEmbeddings {
            path: path.display().to_string(),
        });
    }
    Ok(EmbeddingTable::from_rows(entries, dim))
}
