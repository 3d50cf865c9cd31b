//! The differentiable core: feature embedding, a stacked BiLSTM encoder,
//! span featurization, feed-forward scoring heads, and softmax
//! normalization, all with exact hand-written backpropagation in `f64`.
//!
//! The same architecture backs both pipeline stages; a model's
//! [`HeadKind`] decides whether its feed-forward head scores two predicate
//! labels per span or the four argument labels.

mod lstm;
mod model;

pub use lstm::LstmCell;
pub use model::{
    encode, featurize, forward, score_spans, softmax_over_candidates, softmax_over_labels,
    span_features, DropoutMasks, Features, Forward, SpanFeatureSet, SyntaxContext,
};

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EmbeddingTable;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint shape mismatch for {name}: expected {expected:?}, found {found:?}")]
    Shape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

/// Which scoring head a model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Predicate,
    Argument,
}

impl HeadKind {
    /// Output labels of the feed-forward head: {PRED, NOT_PRED} for the
    /// predicate model, {A0..A3} for the argument model.
    pub fn label_count(self) -> usize {
        match self {
            HeadKind::Predicate => 2,
            HeadKind::Argument => 4,
        }
    }
}

/// Index of the PRED label in the predicate head's output.
pub const PRED_LABEL: usize = 0;
/// Index of the NOT_PRED label in the predicate head's output.
pub const NOT_PRED_LABEL: usize = 1;

/// Model dimensions and switches. The defaults are the published settings;
/// tests shrink them for speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub pos_dim: usize,
    pub dep_dim: usize,
    /// Embedding size for the binary in-predicate flag; absent from the
    /// published settings, fixed at 10 (same as the POS size).
    pub pred_flag_dim: usize,
    /// Hidden size per BiLSTM direction.
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    /// Width of the feed-forward head's single hidden layer.
    pub ff_hidden: usize,
    /// Append the hidden state of the span head's parent to the span feature.
    pub use_syntax_feature: bool,
    /// Update word embeddings during training (pretrained vectors stay
    /// frozen by default).
    pub train_word_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 100,
            pos_dim: 10,
            dep_dim: 20,
            pred_flag_dim: 10,
            hidden: 200,
            layers: 2,
            dropout: 0.3,
            ff_hidden: 300,
            use_syntax_feature: false,
            train_word_embeddings: false,
        }
    }
}

impl ModelConfig {
    /// Per-token input dimension: word, POS, predicate-flag, and dependency
    /// embeddings concatenated in that order.
    pub fn input_dim(&self) -> usize {
        self.word_dim + self.pos_dim + self.pred_flag_dim + self.dep_dim
    }

    /// Encoder output per token: forward and backward halves concatenated.
    pub fn hidden_out(&self) -> usize {
        2 * self.hidden
    }

    /// Span feature width: four blocks of `hidden_out`, five with the
    /// syntax feature.
    pub fn span_feature_dim(&self) -> usize {
        let blocks = if self.use_syntax_feature { 5 } else { 4 };
        blocks * self.hidden_out()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.word_dim == 0
            || self.pos_dim == 0
            || self.dep_dim == 0
            || self.pred_flag_dim == 0
            || self.hidden == 0
            || self.layers == 0
            || self.ff_hidden == 0
        {
            return Err("all model dimensions must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(format!("dropout {} outside [0, 1)", self.dropout));
        }
        Ok(())
    }
}

/// A label vocabulary with an implicit UNK entry after the named entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    entries: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new(entries: Vec<String>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocab { entries, index }
    }

    /// Collects distinct values in first-appearance order.
    pub fn collect<'a>(values: impl Iterator<Item = &'a str>) -> Self {
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for v in values {
            if !index.contains_key(v) {
                index.insert(v.to_string(), entries.len());
                entries.push(v.to_string());
            }
        }
        Vocab { entries, index }
    }

    /// Number of embedding rows this vocabulary needs (entries + UNK).
    pub fn rows(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn unk_index(&self) -> usize {
        self.entries.len()
    }

    /// Exact match or UNK; for POS and dependency labels.
    pub fn lookup(&self, value: &str) -> usize {
        self.index.get(value).copied().unwrap_or(self.unk_index())
    }

    /// Exact match, then lowercased match, then UNK; for word surfaces.
    pub fn lookup_word(&self, surface: &str) -> usize {
        if let Some(&i) = self.index.get(surface) {
            return i;
        }
        let lower = surface.to_lowercase();
        self.index.get(&lower).copied().unwrap_or(self.unk_index())
    }
}

impl From<Vec<String>> for Vocab {
    fn from(entries: Vec<String>) -> Self {
        Vocab::new(entries)
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Vec<String> {
        v.entries
    }
}

/// The feed-forward scoring head: one hidden layer with ReLU, then a linear
/// output over the head's labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForward {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// One BiLSTM layer: independent cells per direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmLayer {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

/// All trainable tensors of one model. The same struct doubles as the
/// gradient container, aligned tensor-for-tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Word embedding rows (vocabulary + UNK). Frozen unless
    /// `train_word_embeddings` is set; gradients are still computed so
    /// checks cover the lookup path.
    pub word: Array2<f64>,
    pub pos: Array2<f64>,
    pub dep: Array2<f64>,
    /// Two rows: index 0 = outside the predicate span, 1 = inside.
    pub flag: Array2<f64>,
    pub lstm: Vec<BiLstmLayer>,
    pub ff: FeedForward,
    /// Learned feature vector for the NULL candidate, full span-feature width.
    pub null_feature: Array1<f64>,
    /// Learned stand-in for the span head's parent when that head is the
    /// sentence root (syntax feature only).
    pub root_context: Array1<f64>,
}

fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

fn small_uniform_2d(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-0.1..0.1))
}

fn small_uniform_1d(n: usize, rng: &mut impl Rng) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.random_range(-0.1..0.1))
}

impl Parameters {
    /// Random initialization. The draw order is fixed by the field order
    /// here, so a seed pins every tensor.
    pub fn init(
        head: HeadKind,
        config: &ModelConfig,
        word_matrix: Array2<f64>,
        pos_rows: usize,
        dep_rows: usize,
        rng: &mut impl Rng,
    ) -> Self {
        assert_eq!(word_matrix.ncols(), config.word_dim);
        let pos = small_uniform_2d(pos_rows, config.pos_dim, rng);
        let dep = small_uniform_2d(dep_rows, config.dep_dim, rng);
        let flag = small_uniform_2d(2, config.pred_flag_dim, rng);
        let mut lstm = Vec::with_capacity(config.layers);
        for layer in 0..config.layers {
            let input = if layer == 0 {
                config.input_dim()
            } else {
                config.hidden_out()
            };
            let fwd = LstmCell::init(input, config.hidden, rng);
            let bwd = LstmCell::init(input, config.hidden, rng);
            lstm.push(BiLstmLayer { fwd, bwd });
        }
        let span_dim = config.span_feature_dim();
        let ff = FeedForward {
            w1: xavier(config.ff_hidden, span_dim, rng),
            b1: Array1::zeros(config.ff_hidden),
            w2: xavier(head.label_count(), config.ff_hidden, rng),
            b2: Array1::zeros(head.label_count()),
        };
        let null_feature = small_uniform_1d(span_dim, rng);
        let root_context = small_uniform_1d(config.hidden_out(), rng);
        Parameters {
            word: word_matrix,
            pos,
            dep,
            flag,
            lstm,
            ff,
            null_feature,
            root_context,
        }
    }

    /// A same-shaped parameter set with every value zero; the gradient
    /// container.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.for_each_tensor_mut(&mut |_, slice| slice.fill(0.0));
        out
    }

    /// Visits every tensor as a named flat slice, in a fixed order.
    pub fn for_each_tensor(&self, f: &mut impl FnMut(&str, &[f64])) {
        f("word", self.word.as_slice().unwrap());
        f("pos", self.pos.as_slice().unwrap());
        f("dep", self.dep.as_slice().unwrap());
        f("flag", self.flag.as_slice().unwrap());
        for (i, layer) in self.lstm.iter().enumerate() {
            for (dir, cell) in [("fwd", &layer.fwd), ("bwd", &layer.bwd)] {
                f(&format!("lstm{i}.{dir}.w_ih"), cell.w_ih.as_slice().unwrap());
                f(&format!("lstm{i}.{dir}.w_hh"), cell.w_hh.as_slice().unwrap());
                f(&format!("lstm{i}.{dir}.bias"), cell.bias.as_slice().unwrap());
            }
        }
        f("ff.w1", self.ff.w1.as_slice().unwrap());
        f("ff.b1", self.ff.b1.as_slice().unwrap());
        f("ff.w2", self.ff.w2.as_slice().unwrap());
        f("ff.b2", self.ff.b2.as_slice().unwrap());
        f("null_feature", self.null_feature.as_slice().unwrap());
        f("root_context", self.root_context.as_slice().unwrap());
    }

    /// Mutable variant of [`Parameters::for_each_tensor`], same order.
    pub fn for_each_tensor_mut(&mut self, f: &mut impl FnMut(&str, &mut [f64])) {
        f("word", self.word.as_slice_mut().unwrap());
        f("pos", self.pos.as_slice_mut().unwrap());
        f("dep", self.dep.as_slice_mut().unwrap());
        f("flag", self.flag.as_slice_mut().unwrap());
        for (i, layer) in self.lstm.iter_mut().enumerate() {
            for (dir, cell) in [("fwd", &mut layer.fwd), ("bwd", &mut layer.bwd)] {
                f(&format!("lstm{i}.{dir}.w_ih"), cell.w_ih.as_slice_mut().unwrap());
                f(&format!("lstm{i}.{dir}.w_hh"), cell.w_hh.as_slice_mut().unwrap());
                f(&format!("lstm{i}.{dir}.bias"), cell.bias.as_slice_mut().unwrap());
            }
        }
        f("ff.w1", self.ff.w1.as_slice_mut().unwrap());
        f("ff.b1", self.ff.b1.as_slice_mut().unwrap());
        f("ff.w2", self.ff.w2.as_slice_mut().unwrap());
        f("ff.b2", self.ff.b2.as_slice_mut().unwrap());
        f("null_feature", self.null_feature.as_slice_mut().unwrap());
        f("root_context", self.root_context.as_slice_mut().unwrap());
    }

    /// Tensor names in visit order.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.for_each_tensor(&mut |name, _| names.push(name.to_string()));
        names
    }

    /// True if any value is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        let mut bad = false;
        self.for_each_tensor(&mut |_, slice| {
            if !bad && slice.iter().any(|v| !v.is_finite()) {
                bad = true;
            }
        });
        bad
    }
}

/// A complete model: head kind, configuration, vocabularies, and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub head: HeadKind,
    pub config: ModelConfig,
    pub word_vocab: Vocab,
    pub pos_vocab: Vocab,
    pub dep_vocab: Vocab,
    pub params: Parameters,
}

impl Model {
    /// Builds a freshly initialized model. Word vectors and vocabulary come
    /// from the embedding table; POS and dependency vocabularies from the
    /// label lists (usually collected from the training corpus).
    pub fn init(
        head: HeadKind,
        config: ModelConfig,
        embeddings: &EmbeddingTable,
        pos_labels: Vec<String>,
        dep_labels: Vec<String>,
        rng: &mut impl Rng,
    ) -> Self {
        config.validate().expect("invalid model config");
        assert_eq!(
            embeddings.dim(),
            config.word_dim,
            "embedding table dimension {} does not match word_dim {}",
            embeddings.dim(),
            config.word_dim
        );
        let word_vocab = Vocab::new(embeddings.surfaces());
        let pos_vocab = Vocab::collect(pos_labels.iter().map(String::as_str));
        let dep_vocab = Vocab::collect(dep_labels.iter().map(String::as_str));
        let params = Parameters::init(
            head,
            &config,
            embeddings.matrix.clone(),
            pos_vocab.rows(),
            dep_vocab.rows(),
            rng,
        );
        Model {
            head,
            config,
            word_vocab,
            pos_vocab,
            dep_vocab,
            params,
        }
    }

    /// Validates parameter shapes against the config echo.
    pub fn validate_shapes(&self) -> Result<(), NeuralError> {
        let c = &self.config;
        let checks: Vec<(String, Vec<usize>, Vec<usize>)> = vec![
            (
                "word".into(),
                vec![self.word_vocab.rows(), c.word_dim],
                self.params.word.shape().to_vec(),
            ),
            (
                "pos".into(),
                vec![self.pos_vocab.rows(), c.pos_dim],
                self.params.pos.shape().to_vec(),
            ),
            (
                "dep".into(),
                vec![self.dep_vocab.rows(), c.dep_dim],
                self.params.dep.shape().to_vec(),
            ),
            ("flag".into(), vec![2, c.pred_flag_dim], self.params.flag.shape().to_vec()),
            (
                "ff.w1".into(),
                vec![c.ff_hidden, c.span_feature_dim()],
                self.params.ff.w1.shape().to_vec(),
            ),
            (
                "ff.w2".into(),
                vec![self.head.label_count(), c.ff_hidden],
                self.params.ff.w2.shape().to_vec(),
            ),
            (
                "null_feature".into(),
                vec![c.span_feature_dim()],
                self.params.null_feature.shape().to_vec(),
            ),
            (
                "root_context".into(),
                vec![c.hidden_out()],
                self.params.root_context.shape().to_vec(),
            ),
        ];
        for (name, expected, found) in checks {
            if expected != found {
                return Err(NeuralError::Shape { name, expected, found });
            }
        }
        if self.params.lstm.len() != c.layers {
            return Err(NeuralError::Shape {
                name: "lstm".into(),
                expected: vec![c.layers],
                found: vec![self.params.lstm.len()],
            });
        }
        for (i, layer) in self.params.lstm.iter().enumerate() {
            let input = if i == 0 { c.input_dim() } else { c.hidden_out() };
            for (dir, cell) in [("fwd", &layer.fwd), ("bwd", &layer.bwd)] {
                if cell.w_ih.shape() != [4 * c.hidden, input] {
                    return Err(NeuralError::Shape {
                        name: format!("lstm{i}.{dir}.w_ih"),
                        expected: vec![4 * c.hidden, input],
                        found: cell.w_ih.shape().to_vec(),
                    });
                }
                if cell.w_hh.shape() != [4 * c.hidden, c.hidden] {
                    return Err(NeuralError::Shape {
                        name: format!("lstm{i}.{dir}.w_hh"),
                        expected: vec![4 * c.hidden, c.hidden],
                        found: cell.w_hh.shape().to_vec(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    model: Model,
}

/// Writes a model checkpoint: a self-describing JSON archive with a version
/// field, the config echo, vocabularies, and all named parameter tensors.
pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<(), NeuralError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| NeuralError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer(BufWriter::new(file), &checkpoint)?;
    Ok(())
}

/// Loads and validates a model checkpoint.
pub fn load_model(path: impl AsRef<Path>) -> Result<Model, NeuralError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| NeuralError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let checkpoint: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(NeuralError::Version {
            found: checkpoint.version,
            expected: CHECKPOINT_VERSION,
        });
    }
    checkpoint.model.validate_shapes()?;
    Ok(checkpoint.model)
}
