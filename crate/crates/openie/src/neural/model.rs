//! Forward and backward passes through the whole scoring pipeline:
//! embedding lookup, stacked BiLSTM encoding, span featurization, and the
//! feed-forward head.
//!
//! [`Forward`] caches everything the exact backward pass needs, so training
//! runs `forward` once, derives the score gradients from its loss, and calls
//! [`Forward::backward_into`].

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;

use crate::corpus::{Sentence, Span};
use crate::spans::{self, Candidate};

use super::lstm::CellCache;
use super::{Model, ModelConfig, Parameters};

/// Embedding row indices and assembled per-token input vectors.
pub struct Features {
    pub word_rows: Vec<usize>,
    pub pos_rows: Vec<usize>,
    pub flag_rows: Vec<usize>,
    pub dep_rows: Vec<usize>,
    /// `x_i`: word ⊕ pos ⊕ predicate-flag ⊕ dependency embeddings.
    pub xs: Vec<Array1<f64>>,
}

/// Builds per-token input features. With `predicate` absent (the predicate
/// model's view) the flag embedding for "outside" is used at every position.
pub fn featurize(
    sentence: &Sentence,
    predicate: Option<Span>,
    model: &Model,
) -> Features {
    let params = &model.params;
    let config = &model.config;
    let n = sentence.len();
    let mut features = Features {
        word_rows: Vec::with_capacity(n),
        pos_rows: Vec::with_capacity(n),
        flag_rows: Vec::with_capacity(n),
        dep_rows: Vec::with_capacity(n),
        xs: Vec::with_capacity(n),
    };
    for (i, token) in sentence.tokens.iter().enumerate() {
        let word_row = model.word_vocab.lookup_word(&token.surface);
        let pos_row = model.pos_vocab.lookup(&token.pos);
        let flag_row = match predicate {
            Some(p) if p.contains(i) => 1,
            _ => 0,
        };
        let dep_row = model.dep_vocab.lookup(&token.dep_rel);

        let mut x = Array1::zeros(config.input_dim());
        let mut offset = 0;
        for (row, table, dim) in [
            (word_row, &params.word, config.word_dim),
            (pos_row, &params.pos, config.pos_dim),
            (flag_row, &params.flag, config.pred_flag_dim),
            (dep_row, &params.dep, config.dep_dim),
        ] {
            x.slice_mut(s![offset..offset + dim]).assign(&table.row(row));
            offset += dim;
        }

        features.word_rows.push(word_row);
        features.pos_rows.push(pos_row);
        features.flag_rows.push(flag_row);
        features.dep_rows.push(dep_row);
        features.xs.push(x);
    }
    features
}

/// Inverted-dropout masks for each BiLSTM layer's inputs. Values are
/// `1/(1-p)` for kept units and `0` for dropped ones, so inference needs no
/// rescaling.
pub struct DropoutMasks {
    /// One `(sequence length, layer input dim)` mask per layer.
    pub masks: Vec<Array2<f64>>,
}

impl DropoutMasks {
    /// Samples masks for a sentence of length `n`.
    pub fn sample(config: &ModelConfig, n: usize, rng: &mut impl Rng) -> Self {
        let keep = 1.0 - config.dropout;
        let masks = (0..config.layers)
            .map(|layer| {
                let dim = if layer == 0 {
                    config.input_dim()
                } else {
                    config.hidden_out()
                };
                Array2::from_shape_fn((n, dim), |_| {
                    if rng.random_range(0.0..1.0) < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        DropoutMasks { masks }
    }
}

struct LayerCache {
    fwd: CellCache,
    bwd: CellCache,
}

pub(crate) struct EncoderCache {
    layers: Vec<LayerCache>,
}

/// Runs the stacked BiLSTM. Returns the top layer's concatenated
/// forward ⊕ backward states per token and the cache for backprop.
/// Dropout masks, when given, multiply each layer's inputs.
pub(crate) fn encode_cached(
    params: &Parameters,
    xs: &[Array1<f64>],
    dropout: Option<&DropoutMasks>,
) -> (Vec<Array1<f64>>, EncoderCache) {
    let n = xs.len();
    assert!(n > 0, "cannot encode an empty sequence");
    let mut current: Vec<Array1<f64>> = xs.to_vec();
    let mut layers = Vec::with_capacity(params.lstm.len());

    for (li, layer) in params.lstm.iter().enumerate() {
        if let Some(d) = dropout {
            for (t, x) in current.iter_mut().enumerate() {
                *x *= &d.masks[li].row(t);
            }
        }
        let fwd = layer.fwd.forward(&current);
        let reversed: Vec<Array1<f64>> = current.iter().rev().cloned().collect();
        let bwd = layer.bwd.forward(&reversed);

        let hidden = layer.fwd.hidden_size();
        let mut outputs = Vec::with_capacity(n);
        for t in 0..n {
            let mut h = Array1::zeros(2 * hidden);
            h.slice_mut(s![0..hidden]).assign(&fwd.hs[t]);
            h.slice_mut(s![hidden..2 * hidden]).assign(&bwd.hs[n - 1 - t]);
            outputs.push(h);
        }
        layers.push(LayerCache { fwd, bwd });
        current = outputs;
    }
    (current, EncoderCache { layers })
}

/// Encoder output without the backprop cache; the spec-level `encode`
/// operation. Dropout applies only when masks are given (training mode).
pub fn encode(
    model: &Model,
    features: &Features,
    dropout: Option<&DropoutMasks>,
) -> Vec<Array1<f64>> {
    encode_cached(&model.params, &features.xs, dropout).0
}

fn encoder_backward(
    params: &Parameters,
    cache: &EncoderCache,
    mut douts: Vec<Array1<f64>>,
    dropout: Option<&DropoutMasks>,
    grads: &mut Parameters,
) -> Vec<Array1<f64>> {
    let n = douts.len();
    for (li, layer) in params.lstm.iter().enumerate().rev() {
        let lc = &cache.layers[li];
        let hidden = layer.fwd.hidden_size();

        let dh_fwd: Vec<Array1<f64>> = douts
            .iter()
            .map(|d| d.slice(s![0..hidden]).to_owned())
            .collect();
        let dh_bwd: Vec<Array1<f64>> = (0..n)
            .map(|r| douts[n - 1 - r].slice(s![hidden..2 * hidden]).to_owned())
            .collect();

        let dx_fwd = layer.fwd.backward(&lc.fwd, &dh_fwd, &mut grads.lstm[li].fwd);
        let dx_bwd = layer.bwd.backward(&lc.bwd, &dh_bwd, &mut grads.lstm[li].bwd);

        let mut dinputs: Vec<Array1<f64>> = (0..n)
            .map(|t| &dx_fwd[t] + &dx_bwd[n - 1 - t])
            .collect();
        if let Some(d) = dropout {
            for (t, dx) in dinputs.iter_mut().enumerate() {
                *dx *= &d.masks[li].row(t);
            }
        }
        douts = dinputs;
    }
    douts
}

/// Where the syntax-aware span feature's extra block comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxContext {
    /// The hidden state of this token (the parent of the span's head).
    Token(usize),
    /// The span's head is the sentence root; the learned root vector is used.
    Root,
}

/// Span features for a candidate list, plus the bookkeeping needed to route
/// gradients back to hidden states.
pub struct SpanFeatureSet {
    pub candidates: Vec<Candidate>,
    pub feats: Vec<Array1<f64>>,
    /// Per candidate: where the syntax block came from (`None` for the NULL
    /// candidate or when the syntax feature is off).
    pub contexts: Vec<Option<SyntaxContext>>,
}

/// Assembles `h_i ⊕ h_j ⊕ (h_i + h_j) ⊕ (h_i − h_j)` per candidate, with the
/// head-parent block appended when the syntax feature is on. The NULL
/// candidate maps to the learned NULL vector.
pub fn span_features(
    hs: &[Array1<f64>],
    candidates: &[Candidate],
    sentence: &Sentence,
    params: &Parameters,
    config: &ModelConfig,
) -> SpanFeatureSet {
    let b = config.hidden_out();
    let dim = config.span_feature_dim();
    let mut feats = Vec::with_capacity(candidates.len());
    let mut contexts = Vec::with_capacity(candidates.len());

    for cand in candidates {
        match cand {
            Candidate::Null => {
                feats.push(params.null_feature.clone());
                contexts.push(None);
            }
            Candidate::Span(span) => {
                let hi = &hs[span.start];
                let hj = &hs[span.end];
                let mut f = Array1::zeros(dim);
                f.slice_mut(s![0..b]).assign(hi);
                f.slice_mut(s![b..2 * b]).assign(hj);
                f.slice_mut(s![2 * b..3 * b]).assign(&(hi + hj));
                f.slice_mut(s![3 * b..4 * b]).assign(&(hi - hj));
                let context = if config.use_syntax_feature {
                    let ctx = match spans::span_head_parent(span, sentence) {
                        Some(parent) => SyntaxContext::Token(parent),
                        None => SyntaxContext::Root,
                    };
                    let block = match ctx {
                        SyntaxContext::Token(parent) => &hs[parent],
                        SyntaxContext::Root => &params.root_context,
                    };
                    f.slice_mut(s![4 * b..5 * b]).assign(block);
                    Some(ctx)
                } else {
                    None
                };
                feats.push(f);
                contexts.push(context);
            }
        }
    }
    SpanFeatureSet {
        candidates: candidates.to_vec(),
        feats,
        contexts,
    }
}

struct FfCache {
    /// Candidate features stacked into a `(candidates, span dim)` matrix.
    feat_matrix: Array2<f64>,
    /// Post-ReLU hidden activations, `(candidates, ff hidden)`.
    hidden: Array2<f64>,
}

/// Raw (pre-softmax) scores for each candidate feature under the model's
/// feed-forward head: one hidden ReLU layer, then a linear output.
/// Returns a `(candidates, labels)` matrix.
pub fn score_spans(params: &Parameters, feats: &[Array1<f64>]) -> Array2<f64> {
    ff_forward(params, feats).0
}

fn ff_forward(params: &Parameters, feats: &[Array1<f64>]) -> (Array2<f64>, FfCache) {
    let c = feats.len();
    assert!(c > 0, "candidate list is empty");
    let dim = params.ff.w1.ncols();
    let mut feat_matrix = Array2::zeros((c, dim));
    for (k, f) in feats.iter().enumerate() {
        feat_matrix.row_mut(k).assign(f);
    }
    let mut hidden = feat_matrix.dot(&params.ff.w1.t());
    hidden += &params.ff.b1;
    hidden.mapv_inplace(|v| v.max(0.0));
    let mut scores = hidden.dot(&params.ff.w2.t());
    scores += &params.ff.b2;
    (
        scores,
        FfCache {
            feat_matrix,
            hidden,
        },
    )
}

fn ff_backward(
    params: &Parameters,
    cache: &FfCache,
    dscores: &Array2<f64>,
    grads: &mut Parameters,
) -> Array2<f64> {
    // d w2 += dS^T · H;  d b2 += column sums of dS
    general_mat_mul(1.0, &dscores.t(), &cache.hidden, 1.0, &mut grads.ff.w2);
    grads.ff.b2 += &dscores.sum_axis(Axis(0));

    let mut dhidden = dscores.dot(&params.ff.w2);
    dhidden.zip_mut_with(&cache.hidden, |d, &h| {
        if h <= 0.0 {
            *d = 0.0;
        }
    });

    general_mat_mul(1.0, &dhidden.t(), &cache.feat_matrix, 1.0, &mut grads.ff.w1);
    grads.ff.b1 += &dhidden.sum_axis(Axis(0));

    dhidden.dot(&params.ff.w1)
}

/// Normalizes one label's scores over the candidate axis with
/// max-subtraction. `scores` is `(candidates, labels)`.
pub fn softmax_over_candidates(scores: &Array2<f64>, label: usize) -> Array1<f64> {
    let column = scores.column(label);
    let max = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Array1<f64> = column.mapv(|v| (v - max).exp());
    let sum = out.sum();
    out /= sum;
    out
}

/// Normalizes each candidate's scores over the label axis (the predicate
/// model's per-span binary softmax). Returns a matrix of probabilities.
pub fn softmax_over_labels(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// One cached forward pass over a (sentence, candidate list) pair.
pub struct Forward {
    pub features: Features,
    pub hs: Vec<Array1<f64>>,
    pub span_set: SpanFeatureSet,
    /// Raw scores, `(candidates, labels)`.
    pub scores: Array2<f64>,
    encoder: EncoderCache,
    ff: FfCache,
    used_dropout: bool,
}

/// Runs the full pipeline for a sentence and candidate list. `predicate` is
/// `Some` for the argument model and `None` for the predicate model.
pub fn forward(
    model: &Model,
    sentence: &Sentence,
    predicate: Option<Span>,
    candidates: &[Candidate],
    dropout: Option<&DropoutMasks>,
) -> Forward {
    let features = featurize(sentence, predicate, model);
    let (hs, encoder) = encode_cached(&model.params, &features.xs, dropout);
    let span_set = span_features(&hs, candidates, sentence, &model.params, &model.config);
    let (scores, ff) = ff_forward(&model.params, &span_set.feats);
    Forward {
        features,
        hs,
        span_set,
        scores,
        encoder,
        ff,
        used_dropout: dropout.is_some(),
    }
}

impl Forward {
    /// Exact backward pass from score-space gradients down to every
    /// parameter tensor, accumulated into `grads`. `dropout` must be the
    /// masks used in the forward pass (or `None` if none were).
    pub fn backward_into(
        &self,
        model: &Model,
        dscores: &Array2<f64>,
        dropout: Option<&DropoutMasks>,
        grads: &mut Parameters,
    ) {
        assert_eq!(dropout.is_some(), self.used_dropout, "dropout mask mismatch");
        let params = &model.params;
        let config = &model.config;
        let b = config.hidden_out();
        let n = self.hs.len();

        let dfeats = ff_backward(params, &self.ff, dscores, grads);

        let mut dhs: Vec<Array1<f64>> = vec![Array1::zeros(b); n];
        for (k, cand) in self.span_set.candidates.iter().enumerate() {
            let df = dfeats.row(k);
            match cand {
                Candidate::Null => {
                    grads.null_feature += &df;
                }
                Candidate::Span(span) => {
                    let d0 = df.slice(s![0..b]);
                    let d1 = df.slice(s![b..2 * b]);
                    let d2 = df.slice(s![2 * b..3 * b]);
                    let d3 = df.slice(s![3 * b..4 * b]);
                    {
                        let dhi = &mut dhs[span.start];
                        *dhi += &d0;
                        *dhi += &d2;
                        *dhi += &d3;
                    }
                    {
                        let dhj = &mut dhs[span.end];
                        *dhj += &d1;
                        *dhj += &d2;
                        *dhj -= &d3;
                    }
                    match self.span_set.contexts[k] {
                        Some(SyntaxContext::Token(parent)) => {
                            dhs[parent] += &df.slice(s![4 * b..5 * b]);
                        }
                        Some(SyntaxContext::Root) => {
                            grads.root_context += &df.slice(s![4 * b..5 * b]);
                        }
                        None => {}
                    }
                }
            }
        }

        let dxs = encoder_backward(params, &self.encoder, dhs, dropout, grads);

        for (t, dx) in dxs.iter().enumerate() {
            let mut offset = 0;
            for (row, table, dim) in [
                (self.features.word_rows[t], &mut grads.word, config.word_dim),
                (self.features.pos_rows[t], &mut grads.pos, config.pos_dim),
                (self.features.flag_rows[t], &mut grads.flag, config.pred_flag_dim),
                (self.features.dep_rows[t], &mut grads.dep, config.dep_dim),
            ] {
                let mut target = table.row_mut(row);
                target += &dx.slice(s![offset..offset + dim]);
                offset += dim;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Token, ROOT_HEAD};
    use crate::neural::HeadKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn tiny_config() -> ModelConfig {
        ModelConfig {
            word_dim: 5,
            pos_dim: 3,
            dep_dim: 3,
            pred_flag_dim: 2,
            hidden: 4,
            layers: 2,
            dropout: 0.3,
            ff_hidden: 6,
            use_syntax_feature: false,
            train_word_embeddings: true,
        }
    }

    fn tiny_model(config: ModelConfig, seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<(String, Vec<f64>)> = ["the", "cat", "sat", "here"]
            .iter()
            .map(|w| {
                (
                    w.to_string(),
                    (0..config.word_dim)
                        .map(|_| rng.random_range(-0.5..0.5))
                        .collect(),
                )
            })
            .collect();
        let table = crate::corpus::EmbeddingTable::from_rows(entries, config.word_dim);
        Model::init(
            HeadKind::Argument,
            config,
            &table,
            vec!["DET".into(), "NOUN".into(), "VERB".into()],
            vec!["det".into(), "nsubj".into(), "root".into()],
            &mut rng,
        )
    }

    fn tiny_sentence() -> Sentence {
        let mk = |s: &str, p: &str, h: i32, r: &str| Token {
            surface: s.into(),
            pos: p.into(),
            dep_head: h,
            dep_rel: r.into(),
        };
        let s = Sentence {
            id: "t".into(),
            tokens: vec![
                mk("the", "DET", 1, "det"),
                mk("cat", "NOUN", 2, "nsubj"),
                mk("sat", "VERB", ROOT_HEAD, "root"),
            ],
        };
        s.validate().unwrap();
        s
    }

    #[test]
    fn feature_dimensions_follow_config() {
        let model = tiny_model(tiny_config(), 1);
        let s = tiny_sentence();
        let feats = featurize(&s, Some(Span::new(1, 1)), &model);
        assert_eq!(feats.xs.len(), 3);
        for x in &feats.xs {
            assert_eq!(x.len(), 5 + 3 + 2 + 3);
        }
        // Flag row is 1 only inside the predicate span.
        assert_eq!(feats.flag_rows, vec![0, 1, 0]);
        // Predicate absent: flag 0 everywhere.
        let feats = featurize(&s, None, &model);
        assert_eq!(feats.flag_rows, vec![0, 0, 0]);
    }

    #[test]
    fn unknown_pos_and_dep_map_to_unk_rows() {
        let model = tiny_model(tiny_config(), 1);
        let mut s = tiny_sentence();
        s.tokens[0].pos = "XUNSEEN".into();
        s.tokens[0].dep_rel = "relunseen".into();
        let feats = featurize(&s, None, &model);
        assert_eq!(feats.pos_rows[0], model.pos_vocab.unk_index());
        assert_eq!(feats.dep_rows[0], model.dep_vocab.unk_index());
    }

    #[test]
    fn encode_handles_length_one() {
        let model = tiny_model(tiny_config(), 2);
        let s = Sentence {
            id: "one".into(),
            tokens: vec![Token {
                surface: "cat".into(),
                pos: "NOUN".into(),
                dep_head: ROOT_HEAD,
                dep_rel: "root".into(),
            }],
        };
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].len(), 8);
    }

    #[test]
    fn single_token_span_feature_algebra() {
        let model = tiny_model(tiny_config(), 3);
        let s = tiny_sentence();
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        let set = span_features(
            &hs,
            &[Candidate::Span(Span::new(1, 1))],
            &s,
            &model.params,
            &model.config,
        );
        let b = model.config.hidden_out();
        let f = &set.feats[0];
        for k in 0..b {
            assert_eq!(f[k], hs[1][k]);
            assert_eq!(f[b + k], hs[1][k]);
            assert!((f[2 * b + k] - 2.0 * hs[1][k]).abs() < 1e-15);
            assert_eq!(f[3 * b + k], 0.0);
        }
    }

    #[test]
    fn null_candidate_uses_the_learned_vector() {
        let model = tiny_model(tiny_config(), 4);
        let s = tiny_sentence();
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        let set = span_features(&hs, &[Candidate::Null, Candidate::Null], &s, &model.params, &model.config);
        assert_eq!(set.feats[0], set.feats[1]);
        assert_eq!(set.feats[0], model.params.null_feature);
    }

    #[test]
    fn syntax_feature_appends_head_parent_state() {
        let mut config = tiny_config();
        config.use_syntax_feature = true;
        let model = tiny_model(config, 5);
        let s = tiny_sentence();
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        let b = model.config.hidden_out();
        // Span [the cat]: head is "cat" (parent "sat" outside), parent index 2.
        let set = span_features(
            &hs,
            &[Candidate::Span(Span::new(0, 1)), Candidate::Span(Span::new(0, 2))],
            &s,
            &model.params,
            &model.config,
        );
        assert_eq!(set.feats[0].len(), 5 * b);
        assert_eq!(set.contexts[0], Some(SyntaxContext::Token(2)));
        for k in 0..b {
            assert_eq!(set.feats[0][4 * b + k], hs[2][k]);
        }
        // The whole sentence is headed by the root: learned vector.
        assert_eq!(set.contexts[1], Some(SyntaxContext::Root));
        for k in 0..b {
            assert_eq!(set.feats[1][4 * b + k], model.params.root_context[k]);
        }
    }

    #[test]
    fn zero_head_weights_give_uniform_scores() {
        let mut model = tiny_model(tiny_config(), 6);
        model.params.ff.w1.fill(0.0);
        model.params.ff.b1.fill(0.0);
        model.params.ff.w2.fill(0.0);
        model.params.ff.b2.fill(0.0);
        let s = tiny_sentence();
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        let cands = vec![
            Candidate::Span(Span::new(0, 0)),
            Candidate::Span(Span::new(1, 2)),
            Candidate::Null,
        ];
        let set = span_features(&hs, &cands, &s, &model.params, &model.config);
        let scores = score_spans(&model.params, &set.feats);
        assert!(scores.iter().all(|&v| v == 0.0));
        let probs = softmax_over_candidates(&scores, 0);
        for &p in probs.iter() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn permuting_candidates_permutes_score_rows() {
        let model = tiny_model(tiny_config(), 7);
        let s = tiny_sentence();
        let feats = featurize(&s, None, &model);
        let hs = encode(&model, &feats, None);
        let a = Candidate::Span(Span::new(0, 0));
        let b = Candidate::Span(Span::new(1, 2));
        let set1 = span_features(&hs, &[a, b], &s, &model.params, &model.config);
        let set2 = span_features(&hs, &[b, a], &s, &model.params, &model.config);
        let s1 = score_spans(&model.params, &set1.feats);
        let s2 = score_spans(&model.params, &set2.feats);
        assert_eq!(s1.row(0), s2.row(1));
        assert_eq!(s1.row(1), s2.row(0));
    }

    #[test]
    fn softmax_matches_closed_form_and_shift_invariance() {
        let scores = ndarray::array![[0.0], [3.0_f64.ln()]];
        let p = softmax_over_candidates(&scores, 0);
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 0.75).abs() < 1e-12);

        let shifted = scores.mapv(|v| v + 1000.0);
        let q = softmax_over_candidates(&shifted, 0);
        assert!((p[0] - q[0]).abs() < 1e-12);
        assert!((q.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inference_passes_are_identical() {
        let model = tiny_model(tiny_config(), 8);
        let s = tiny_sentence();
        let cands = vec![Candidate::Span(Span::new(0, 1)), Candidate::Null];
        let f1 = forward(&model, &s, None, &cands, None);
        let f2 = forward(&model, &s, None, &cands, None);
        assert_eq!(f1.scores, f2.scores);
    }
}
