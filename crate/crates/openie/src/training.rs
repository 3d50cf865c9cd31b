//! Loss computation, the Adam optimization schedule, and the two training
//! loops (predicate model, argument model).
//!
//! Each argument-model example is one `(sentence, gold predicate,
//! gold argument map)` triple; its loss is the cross-entropy of the gold
//! candidate under the per-label softmax, summed over the four labels, with
//! absent labels training the NULL candidate. Each predicate-model example
//! is one `(sentence, gold predicate span set)` pair; every candidate span
//! gets a binary target and per-span binary cross-entropy.
//!
//! With confidence weighting on, an example's whole loss is multiplied by
//! its bootstrapped confidence, scaling the gradients identically.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArgLabel, Dataset, Extraction, Sentence, Span};
use crate::neural::{
    forward, softmax_over_candidates, softmax_over_labels, DropoutMasks, HeadKind, Model,
    Parameters, NOT_PRED_LABEL, PRED_LABEL,
};
use crate::spans::{candidate_spans, Candidate, CandidateConfig};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("gold candidate index {index} out of range for {count} candidates")]
    GoldIndexOutOfRange { index: usize, count: usize },
    #[error("extraction confidence {confidence} outside [0, 1] in sentence {sentence_id}; confidence-weighted training requires bootstrapped scores")]
    BadConfidence { sentence_id: String, confidence: f64 },
    #[error("non-finite loss at step {step} on sentence {sentence_id}")]
    NonFiniteLoss { step: u64, sentence_id: String },
    #[error("non-finite parameter values detected at step {step}")]
    NonFiniteParams { step: u64 },
    #[error("training set is empty after preparation")]
    NoExamples,
    #[error("model head {found:?} does not match training mode")]
    HeadMismatch { found: HeadKind },
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("checkpoint callback failed: {0}")]
    Checkpoint(String),
}

/// Which pipeline stage is being trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    Predicate,
    Argument,
}

impl TrainMode {
    pub fn head(self) -> HeadKind {
        match self {
            TrainMode::Predicate => HeadKind::Predicate,
            TrainMode::Argument => HeadKind::Argument,
        }
    }
}

/// Optimization schedule and training-time policies. Defaults are the
/// published settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Multiplicative decay: `lr <- lr * (1 - decay)` after every 100 steps.
    pub decay_per_100_steps: f64,
    pub max_steps: u64,
    /// Multiply each example's loss by its bootstrapped confidence.
    pub weight_extractions_by_confidence: bool,
    /// Extractions below this confidence are excluded from training.
    pub confidence_floor: f64,
    /// Maximum-length constraint for argument candidates (strict: spans of
    /// this length or longer are pruned).
    pub max_arg_len: usize,
    /// Maximum-length constraint for predicate candidates.
    pub max_pred_len: usize,
    /// Apply the syntactic constraint to training candidates.
    pub enforce_syntactic: bool,
    pub seed: u64,
    /// Invoke the checkpoint callback every this many steps (0 = never).
    pub checkpoint_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 20,
            learning_rate: 0.01,
            decay_per_100_steps: 0.005,
            max_steps: 55470,
            weight_extractions_by_confidence: true,
            confidence_floor: 0.0,
            max_arg_len: 10,
            max_pred_len: 5,
            enforce_syntactic: true,
            seed: 42,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.learning_rate <= 0.0 {
            return Err(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.decay_per_100_steps) {
            return Err(format!("decay {} outside [0, 1)", self.decay_per_100_steps));
        }
        if self.batch_size == 0 {
            return Err("batch size must be at least 1".into());
        }
        Ok(())
    }
}

/// Cross-entropy of the gold candidates under given per-label candidate
/// distributions: `-Σ_l ln P(gold_l | l)`. `probabilities` is
/// `(candidates, labels)` with each column normalized; `gold[l]` is the gold
/// candidate index for label `l` (the NULL candidate's index when the label
/// is absent).
pub fn cross_entropy_loss(
    probabilities: &Array2<f64>,
    gold: &[usize; ArgLabel::COUNT],
) -> Result<f64, TrainError> {
    let count = probabilities.nrows();
    let mut loss = 0.0;
    for (label, &index) in gold.iter().enumerate() {
        if index >= count {
            return Err(TrainError::GoldIndexOutOfRange { index, count });
        }
        loss -= probabilities[(index, label)].ln();
    }
    Ok(loss)
}

/// The confidence-weighted loss: the cross entropy multiplied by the
/// extraction's bootstrapped confidence. Gradients scale identically.
pub fn weighted_loss(loss: f64, cs4: f64) -> f64 {
    cs4 * loss
}

/// Loss and score-space gradients for one argument-model example.
///
/// `gold[l]` is `Some(candidate index)`; `None` skips the label's term
/// entirely (its gold span was pruned from the candidate set).
pub fn argument_loss(
    scores: &Array2<f64>,
    gold: &[Option<usize>; ArgLabel::COUNT],
    weight: f64,
) -> (f64, Array2<f64>) {
    let mut loss = 0.0;
    let mut dscores = Array2::zeros(scores.raw_dim());
    for label in 0..ArgLabel::COUNT {
        let Some(gold_index) = gold[label] else {
            continue;
        };
        let probs = softmax_over_candidates(scores, label);
        loss -= weight * probs[gold_index].ln();
        for (c, &p) in probs.iter().enumerate() {
            let target = if c == gold_index { 1.0 } else { 0.0 };
            dscores[(c, label)] = weight * (p - target);
        }
    }
    (loss, dscores)
}

/// Loss and score-space gradients for one predicate-model example:
/// per-candidate binary cross-entropy against the PRED/NOT_PRED targets,
/// summed over candidates.
pub fn predicate_loss(
    scores: &Array2<f64>,
    positives: &[bool],
    weight: f64,
) -> (f64, Array2<f64>) {
    assert_eq!(scores.nrows(), positives.len());
    let probs = softmax_over_labels(scores);
    let mut loss = 0.0;
    let mut dscores = Array2::zeros(scores.raw_dim());
    for (c, &is_pred) in positives.iter().enumerate() {
        let gold = if is_pred { PRED_LABEL } else { NOT_PRED_LABEL };
        loss -= weight * probs[(c, gold)].ln();
        for label in [PRED_LABEL, NOT_PRED_LABEL] {
            let target = if label == gold { 1.0 } else { 0.0 };
            dscores[(c, label)] = weight * (probs[(c, label)] - target);
        }
    }
    (loss, dscores)
}

/// Adam with bias correction. Moment buffers align with the parameter
/// visit order.
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, params: &Parameters) -> Self {
        let mut buffers = Vec::new();
        params.for_each_tensor(&mut |_, slice| buffers.push(vec![0.0; slice.len()]));
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: buffers.clone(),
            v: buffers,
        }
    }

    /// One update. Tensors for which `trainable` returns false are skipped
    /// (frozen word embeddings).
    pub fn update(
        &mut self,
        params: &mut Parameters,
        grads: &Parameters,
        trainable: impl Fn(&str) -> bool,
    ) {
        self.step += 1;
        let bias1 = 1.0 - self.beta1.powi(self.step as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step as i32);

        let mut grad_slices: Vec<&[f64]> = Vec::with_capacity(self.m.len());
        grads.for_each_tensor(&mut |_, slice| grad_slices.push(slice));

        let (beta1, beta2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
        let (ms, vs) = (&mut self.m, &mut self.v);
        let mut idx = 0;
        params.for_each_tensor_mut(&mut |name, values| {
            let g = grad_slices[idx];
            let m = &mut ms[idx];
            let v = &mut vs[idx];
            idx += 1;
            if !trainable(name) {
                return;
            }
            for k in 0..values.len() {
                m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                values[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        });
    }
}

/// A training example with its candidate set and targets resolved.
#[derive(Debug, Clone)]
pub struct PreparedExample {
    pub sentence_idx: usize,
    /// The known predicate span (argument mode only).
    pub predicate: Option<Span>,
    pub candidates: Vec<Candidate>,
    pub target: ExampleTarget,
    /// Loss multiplier: the extraction confidence under weighting, else 1.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub enum ExampleTarget {
    /// Gold candidate index per label; `None` = gold span pruned, term skipped.
    Argument { gold: [Option<usize>; ArgLabel::COUNT] },
    /// PRED/NOT_PRED target per candidate.
    Predicate { positives: Vec<bool> },
}

/// Counters from example preparation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrepReport {
    pub examples: usize,
    /// Gold argument spans absent from their candidate set (term skipped).
    pub skipped_gold_labels: usize,
    /// Gold predicate spans absent from the predicate candidate set.
    pub unreachable_gold_predicates: usize,
    /// Extractions excluded by the confidence floor.
    pub below_floor: usize,
}

fn candidate_index(candidates: &[Candidate], span: Span) -> Option<usize> {
    candidates.iter().position(|c| c.as_span() == Some(span))
}

fn null_index(candidates: &[Candidate]) -> usize {
    candidates
        .iter()
        .position(Candidate::is_null)
        .expect("candidate sets include NULL")
}

/// Builds the per-mode example list from a loaded dataset. Confidences are
/// validated here when weighting is on.
pub fn prepare_examples(
    dataset: &Dataset,
    mode: TrainMode,
    config: &TrainConfig,
) -> Result<(Vec<PreparedExample>, PrepReport), TrainError> {
    let mut out = Vec::new();
    let mut report = PrepReport::default();

    for (sentence_idx, (sentence, extractions)) in dataset.iter().enumerate() {
        if config.weight_extractions_by_confidence {
            for e in extractions {
                if !(0.0..=1.0).contains(&e.confidence) {
                    return Err(TrainError::BadConfidence {
                        sentence_id: sentence.id.clone(),
                        confidence: e.confidence,
                    });
                }
            }
        }
        let usable: Vec<&Extraction> = extractions
            .iter()
            .filter(|e| {
                let keep = e.confidence >= config.confidence_floor;
                if !keep {
                    report.below_floor += 1;
                }
                keep
            })
            .collect();

        match mode {
            TrainMode::Argument => {
                for extraction in &usable {
                    let mut cand_cfg = CandidateConfig::for_arguments(
                        extraction.predicate,
                        true,
                        config.enforce_syntactic,
                    );
                    cand_cfg.max_arg_len = config.max_arg_len;
                    cand_cfg.max_pred_len = config.max_pred_len;
                    let candidates = candidate_spans(sentence, &cand_cfg);
                    let null = null_index(&candidates);
                    let mut gold = [None; ArgLabel::COUNT];
                    for label in ArgLabel::ALL {
                        gold[label.index()] = match extraction.arg(label) {
                            None => Some(null),
                            Some(span) => {
                                let found = candidate_index(&candidates, span);
                                if found.is_none() {
                                    report.skipped_gold_labels += 1;
                                }
                                found
                            }
                        };
                    }
                    out.push(PreparedExample {
                        sentence_idx,
                        predicate: Some(extraction.predicate),
                        candidates,
                        target: ExampleTarget::Argument { gold },
                        weight: if config.weight_extractions_by_confidence {
                            extraction.confidence
                        } else {
                            1.0
                        },
                    });
                }
            }
            TrainMode::Predicate => {
                let mut cand_cfg =
                    CandidateConfig::for_predicates(true, config.enforce_syntactic);
                cand_cfg.max_arg_len = config.max_arg_len;
                cand_cfg.max_pred_len = config.max_pred_len;
                let candidates: Vec<Candidate> = candidate_spans(sentence, &cand_cfg)
                    .into_iter()
                    .filter(|c| !c.is_null())
                    .collect();
                let mut positives = vec![false; candidates.len()];
                let mut gold_spans: Vec<Span> = usable.iter().map(|e| e.predicate).collect();
                gold_spans.sort();
                gold_spans.dedup();
                for span in &gold_spans {
                    match candidate_index(&candidates, *span) {
                        Some(i) => positives[i] = true,
                        None => report.unreachable_gold_predicates += 1,
                    }
                }
                // Sentence-level weight: the mean extraction confidence, so a
                // batch of zero-confidence sentences contributes no gradient.
                let weight = if config.weight_extractions_by_confidence && !usable.is_empty() {
                    usable.iter().map(|e| e.confidence).sum::<f64>() / usable.len() as f64
                } else {
                    1.0
                };
                out.push(PreparedExample {
                    sentence_idx,
                    predicate: None,
                    candidates,
                    target: ExampleTarget::Predicate { positives },
                    weight,
                });
            }
        }
    }
    report.examples = out.len();
    Ok((out, report))
}

/// Loss and gradients (accumulated into `grads`, scaled by `scale`) for one
/// prepared example. Returns the example's weighted loss.
pub fn example_gradients(
    model: &Model,
    sentence: &Sentence,
    example: &PreparedExample,
    dropout: Option<&DropoutMasks>,
    scale: f64,
    grads: &mut Parameters,
) -> f64 {
    let fwd = forward(model, sentence, example.predicate, &example.candidates, dropout);
    let (loss, mut dscores) = match &example.target {
        ExampleTarget::Argument { gold } => argument_loss(&fwd.scores, gold, example.weight),
        ExampleTarget::Predicate { positives } => {
            predicate_loss(&fwd.scores, positives, example.weight)
        }
    };
    dscores *= scale;
    fwd.backward_into(model, &dscores, dropout, grads);
    loss
}

/// One row of the loss curve: the step, the learning rate in effect, and
/// the mean batch loss over the last 100-step window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPoint {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainOutcome {
    pub loss_curve: Vec<LossPoint>,
    pub prep: PrepReport,
}

/// One optimizer step over a batch: accumulates mean example gradients,
/// applies Adam, and returns the mean weighted loss.
pub fn train_step(
    model: &mut Model,
    dataset: &Dataset,
    batch: &[&PreparedExample],
    optimizer: &mut Adam,
    grads: &mut Parameters,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
    step: u64,
) -> Result<f64, TrainError> {
    assert!(!batch.is_empty());
    grads.for_each_tensor_mut(&mut |_, slice| slice.fill(0.0));
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;

    for example in batch {
        let sentence = &dataset[example.sentence_idx].0;
        let masks = match dropout_rng.as_deref_mut() {
            Some(r) if model.config.dropout > 0.0 => {
                Some(DropoutMasks::sample(&model.config, sentence.len(), r))
            }
            _ => None,
        };
        let loss = example_gradients(model, sentence, example, masks.as_ref(), scale, grads);
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss {
                step,
                sentence_id: sentence.id.clone(),
            });
        }
        total += loss;
    }
    let train_words = model.config.train_word_embeddings;
    optimizer.update(&mut model.params, grads, |name| {
        name != "word" || train_words
    });
    Ok(total * scale)
}

/// Runs the full training loop. `on_checkpoint` fires every
/// `checkpoint_every` steps (when nonzero) and once more after the last
/// step.
pub fn train(
    model: &mut Model,
    dataset: &Dataset,
    mode: TrainMode,
    config: &TrainConfig,
    mut on_checkpoint: impl FnMut(u64, &Model) -> Result<(), String>,
) -> Result<TrainOutcome, TrainError> {
    config.validate().map_err(TrainError::BadConfig)?;
    if model.head != mode.head() {
        return Err(TrainError::HeadMismatch { found: model.head });
    }
    let (examples, prep) = prepare_examples(dataset, mode, config)?;
    let mut outcome = TrainOutcome {
        loss_curve: Vec::new(),
        prep,
    };
    if config.max_steps == 0 {
        return Ok(outcome);
    }
    if examples.is_empty() {
        return Err(TrainError::NoExamples);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Adam::new(config.learning_rate, &model.params);
    let mut grads = model.params.zeros_like();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0usize;

    let mut window_sum = 0.0;
    let mut window_count = 0u64;

    for step in 1..=config.max_steps {
        let mut batch: Vec<&PreparedExample> = Vec::with_capacity(config.batch_size);
        while batch.len() < config.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(&examples[order[cursor]]);
            cursor += 1;
        }

        let loss = train_step(
            model,
            dataset,
            &batch,
            &mut optimizer,
            &mut grads,
            Some(&mut rng),
            step,
        )?;
        window_sum += loss;
        window_count += 1;

        if step % 100 == 0 || step == config.max_steps {
            outcome.loss_curve.push(LossPoint {
                step,
                lr: optimizer.lr,
                loss: window_sum / window_count as f64,
            });
            window_sum = 0.0;
            window_count = 0;
            if model.params.has_non_finite() {
                return Err(TrainError::NonFiniteParams { step });
            }
        }
        if step % 100 == 0 {
            optimizer.lr *= 1.0 - config.decay_per_100_steps;
        }
        if config.checkpoint_every > 0 && step % config.checkpoint_every == 0 {
            on_checkpoint(step, model).map_err(TrainError::Checkpoint)?;
        }
    }
    on_checkpoint(config.max_steps, model).map_err(TrainError::Checkpoint)?;
    Ok(outcome)
}

/// Per-label argmax selection accuracy of an argument model against gold
/// data, measured over all four labels of every example (absent labels
/// count the NULL candidate as gold). The overfit check's metric.
pub fn argument_selection_accuracy(
    model: &Model,
    dataset: &Dataset,
    config: &TrainConfig,
) -> f64 {
    let (examples, _) =
        prepare_examples(dataset, TrainMode::Argument, config).expect("accuracy preparation");
    let mut total = 0usize;
    let mut correct = 0usize;
    for example in &examples {
        let sentence = &dataset[example.sentence_idx].0;
        let fwd = forward(model, sentence, example.predicate, &example.candidates, None);
        let ExampleTarget::Argument { gold } = &example.target else {
            unreachable!()
        };
        for label in 0..ArgLabel::COUNT {
            let Some(gold_index) = gold[label] else {
                continue;
            };
            let probs = softmax_over_candidates(&fwd.scores, label);
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            total += 1;
            if argmax == gold_index {
                correct += 1;
            }
        }
    }
    correct as f64 / total.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Token, ROOT_HEAD};
    use crate::neural::ModelConfig;
    use ndarray::array;
    use rand::Rng;

    fn uniform_probs(candidates: usize, labels: usize) -> Array2<f64> {
        Array2::from_elem((candidates, labels), 1.0 / candidates as f64)
    }

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let mut probs = Array2::zeros((3, 4));
        for l in 0..4 {
            probs[(1, l)] = 1.0;
        }
        let loss = cross_entropy_loss(&probs, &[1, 1, 1, 1]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn uniform_distribution_loss_closed_form() {
        let probs = uniform_probs(11, 4);
        let loss = cross_entropy_loss(&probs, &[0, 3, 7, 10]).unwrap();
        assert!((loss - 4.0 * (11.0_f64).ln()).abs() < 1e-12);
        assert!((loss - 9.5915).abs() < 1e-3);
    }

    #[test]
    fn loss_matches_straight_line_reference() {
        // Independent reference: plain negative log sum over gold entries.
        let probs = array![
            [0.1, 0.4, 0.25, 0.05],
            [0.7, 0.1, 0.25, 0.05],
            [0.2, 0.5, 0.50, 0.90],
        ];
        let gold = [2, 0, 1, 2];
        let mut reference = 0.0;
        for (l, &g) in gold.iter().enumerate() {
            reference += -f64::ln(probs[(g, l)]);
        }
        let loss = cross_entropy_loss(&probs, &gold).unwrap();
        assert!((loss - reference).abs() < 1e-10);
    }

    #[test]
    fn gold_index_out_of_range_is_an_error() {
        let probs = uniform_probs(3, 4);
        assert!(matches!(
            cross_entropy_loss(&probs, &[0, 1, 3, 0]),
            Err(TrainError::GoldIndexOutOfRange { index: 3, count: 3 })
        ));
    }

    #[test]
    fn weighted_loss_scales_exactly() {
        let base = 1.7320508075688772;
        assert_eq!(weighted_loss(base, 1.0), base);
        assert_eq!(weighted_loss(base, 0.0), 0.0);
        assert!((weighted_loss(base, 0.388) - 0.388 * base).abs() < 1e-12);
    }

    #[test]
    fn weighted_gradients_scale_with_confidence() {
        let scores = array![[0.3, -0.2, 0.1, 0.9], [-0.5, 0.4, 0.0, 0.2]];
        let gold = [Some(0), Some(1), Some(0), Some(1)];
        let (l1, d1) = argument_loss(&scores, &gold, 1.0);
        let (lw, dw) = argument_loss(&scores, &gold, 0.388);
        assert!((lw - 0.388 * l1).abs() < 1e-12);
        for (a, b) in d1.iter().zip(dw.iter()) {
            assert!((b - 0.388 * a).abs() < 1e-12);
        }
        let (l0, d0) = argument_loss(&scores, &gold, 0.0);
        assert_eq!(l0, 0.0);
        assert!(d0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn skipped_labels_contribute_nothing() {
        let scores = array![[0.3, -0.2, 0.1, 0.9], [-0.5, 0.4, 0.0, 0.2]];
        let gold = [Some(0), None, Some(0), None];
        let (_, d) = argument_loss(&scores, &gold, 1.0);
        assert!(d.column(1).iter().all(|&v| v == 0.0));
        assert!(d.column(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lr_schedule_after_250_steps() {
        // Two decays applied (after steps 100 and 200).
        let config = TrainConfig::default();
        let mut lr = config.learning_rate;
        for step in 1..=250u64 {
            if step % 100 == 0 {
                lr *= 1.0 - config.decay_per_100_steps;
            }
        }
        assert!((lr - 0.0099005).abs() < 1e-12);
    }

    pub(crate) fn toy_dataset() -> Dataset {
        let mk = |s: &str, p: &str, h: i32, r: &str| Token {
            surface: s.into(),
            pos: p.into(),
            dep_head: h,
            dep_rel: r.into(),
        };
        let sentence = Sentence {
            id: "toy".into(),
            tokens: vec![
                mk("the", "DET", 1, "det"),
                mk("cat", "NOUN", 2, "nsubj"),
                mk("chased", "VERB", ROOT_HEAD, "root"),
                mk("the", "DET", 4, "det"),
                mk("mouse", "NOUN", 2, "dobj"),
            ],
        };
        sentence.validate().unwrap();
        let mut e = Extraction::new(Span::new(2, 2), 1.0);
        e.set_arg(ArgLabel::A0, Span::new(0, 1));
        e.set_arg(ArgLabel::A1, Span::new(3, 4));
        vec![(sentence, vec![e])]
    }

    pub(crate) fn toy_model(head: HeadKind, seed: u64) -> Model {
        let config = ModelConfig {
            word_dim: 4,
            pos_dim: 2,
            dep_dim: 2,
            pred_flag_dim: 2,
            hidden: 3,
            layers: 2,
            dropout: 0.0,
            ff_hidden: 5,
            use_syntax_feature: false,
            train_word_embeddings: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = ["the", "cat", "chased", "mouse"]
            .iter()
            .map(|w| {
                (
                    w.to_string(),
                    (0..4).map(|_| rng.random_range(-0.5..0.5)).collect(),
                )
            })
            .collect();
        let table = crate::corpus::EmbeddingTable::from_rows(entries, 4);
        Model::init(
            head,
            config,
            &table,
            vec!["DET".into(), "NOUN".into(), "VERB".into()],
            vec!["det".into(), "nsubj".into(), "root".into(), "dobj".into()],
            &mut rng,
        )
    }

    #[test]
    fn zero_steps_leaves_parameters_unchanged() {
        let mut model = toy_model(HeadKind::Argument, 5);
        let before = model.params.clone();
        let dataset = toy_dataset();
        let config = TrainConfig {
            max_steps: 0,
            ..TrainConfig::default()
        };
        let outcome =
            train(&mut model, &dataset, TrainMode::Argument, &config, |_, _| Ok(())).unwrap();
        assert_eq!(model.params, before);
        assert!(outcome.loss_curve.is_empty());
    }

    #[test]
    fn two_steps_on_one_batch_decrease_loss() {
        let mut model = toy_model(HeadKind::Argument, 6);
        let dataset = toy_dataset();
        let config = TrainConfig {
            batch_size: 1,
            max_steps: 2,
            seed: 1,
            ..TrainConfig::default()
        };
        let (examples, _) = prepare_examples(&dataset, TrainMode::Argument, &config).unwrap();
        let mut optimizer = Adam::new(config.learning_rate, &model.params);
        let mut grads = model.params.zeros_like();
        let batch: Vec<&PreparedExample> = examples.iter().collect();
        let l1 =
            train_step(&mut model, &dataset, &batch, &mut optimizer, &mut grads, None, 1).unwrap();
        let l2 =
            train_step(&mut model, &dataset, &batch, &mut optimizer, &mut grads, None, 2).unwrap();
        assert!(l2 < l1, "loss did not decrease: {l1} -> {l2}");
    }

    #[test]
    fn batch_gradient_equals_mean_of_single_gradients() {
        let model = toy_model(HeadKind::Argument, 7);
        let mut dataset = toy_dataset();
        // A second extraction on the same sentence gives two examples.
        let mut e = Extraction::new(Span::new(2, 2), 0.7);
        e.set_arg(ArgLabel::A1, Span::new(0, 1));
        dataset[0].1.push(e);
        let config = TrainConfig::default();
        let (examples, _) = prepare_examples(&dataset, TrainMode::Argument, &config).unwrap();
        assert_eq!(examples.len(), 2);

        let mut batch_grads = model.params.zeros_like();
        for ex in &examples {
            example_gradients(&model, &dataset[0].0, ex, None, 0.5, &mut batch_grads);
        }

        let mut mean_grads = model.params.zeros_like();
        for ex in &examples {
            let mut single = model.params.zeros_like();
            example_gradients(&model, &dataset[0].0, ex, None, 1.0, &mut single);
            let mut flats: Vec<Vec<f64>> = Vec::new();
            single.for_each_tensor(&mut |_, s| flats.push(s.to_vec()));
            let mut idx = 0;
            mean_grads.for_each_tensor_mut(&mut |_, acc| {
                for (a, &g) in acc.iter_mut().zip(&flats[idx]) {
                    *a += 0.5 * g;
                }
                idx += 1;
            });
        }

        let mut lhs: Vec<f64> = Vec::new();
        batch_grads.for_each_tensor(&mut |_, s| lhs.extend_from_slice(s));
        let mut rhs: Vec<f64> = Vec::new();
        mean_grads.for_each_tensor(&mut |_, s| rhs.extend_from_slice(s));
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_seeds_give_identical_parameters() {
        let dataset = toy_dataset();
        let config = TrainConfig {
            batch_size: 2,
            max_steps: 30,
            seed: 11,
            ..TrainConfig::default()
        };
        let mut run = || {
            let mut model = toy_model(HeadKind::Argument, 8);
            train(&mut model, &dataset, TrainMode::Argument, &config, |_, _| Ok(())).unwrap();
            model.params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn weighting_off_matches_all_ones_confidence() {
        let dataset = toy_dataset(); // confidence 1.0
        let on = TrainConfig {
            weight_extractions_by_confidence: true,
            max_steps: 20,
            batch_size: 1,
            seed: 3,
            ..TrainConfig::default()
        };
        let off = TrainConfig {
            weight_extractions_by_confidence: false,
            ..on.clone()
        };
        let mut m1 = toy_model(HeadKind::Argument, 9);
        let mut m2 = m1.clone();
        let o1 = train(&mut m1, &dataset, TrainMode::Argument, &on, |_, _| Ok(())).unwrap();
        let o2 = train(&mut m2, &dataset, TrainMode::Argument, &off, |_, _| Ok(())).unwrap();
        assert_eq!(m1.params, m2.params);
        assert_eq!(o1.loss_curve, o2.loss_curve);
    }

    #[test]
    fn zero_confidence_batch_leaves_parameters_unchanged() {
        let mut dataset = toy_dataset();
        for e in &mut dataset[0].1 {
            e.confidence = 0.0;
        }
        let mut model = toy_model(HeadKind::Argument, 10);
        let before = model.params.clone();
        let config = TrainConfig {
            batch_size: 1,
            max_steps: 3,
            ..TrainConfig::default()
        };
        train(&mut model, &dataset, TrainMode::Argument, &config, |_, _| Ok(())).unwrap();
        // Zero gradient through a fresh optimizer moves nothing.
        assert_eq!(model.params, before);
    }

    #[test]
    fn predicate_mode_prepares_binary_targets() {
        let dataset = toy_dataset();
        let config = TrainConfig::default();
        let (examples, report) =
            prepare_examples(&dataset, TrainMode::Predicate, &config).unwrap();
        assert_eq!(examples.len(), 1);
        let ExampleTarget::Predicate { positives } = &examples[0].target else {
            panic!("wrong target kind")
        };
        let pred_at = candidate_index(&examples[0].candidates, Span::new(2, 2)).unwrap();
        assert!(positives[pred_at]);
        assert_eq!(positives.iter().filter(|&&b| b).count(), 1);
        assert!(!examples[0].candidates.iter().any(|c| c.is_null()));
        assert_eq!(report.unreachable_gold_predicates, 0);
    }

    #[test]
    fn bad_confidence_rejected_when_weighting() {
        let mut dataset = toy_dataset();
        dataset[0].1[0].confidence = 1.5;
        let config = TrainConfig::default();
        assert!(matches!(
            prepare_examples(&dataset, TrainMode::Argument, &config),
            Err(TrainError::BadConfidence { .. })
        ));
        let off = TrainConfig {
            weight_extractions_by_confidence: false,
            ..TrainConfig::default()
        };
        assert!(prepare_examples(&dataset, TrainMode::Argument, &off).is_ok());
    }

    #[test]
    fn confidence_floor_filters_extractions() {
        let mut dataset = toy_dataset();
        dataset[0].1[0].confidence = 0.2;
        let config = TrainConfig {
            confidence_floor: 0.5,
            ..TrainConfig::default()
        };
        let (examples, report) = prepare_examples(&dataset, TrainMode::Argument, &config).unwrap();
        assert!(examples.is_empty());
        assert_eq!(report.below_floor, 1);
    }

    #[test]
    fn head_mismatch_is_rejected() {
        let mut model = toy_model(HeadKind::Predicate, 12);
        let dataset = toy_dataset();
        let config = TrainConfig {
            max_steps: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&mut model, &dataset, TrainMode::Argument, &config, |_, _| Ok(())),
            Err(TrainError::HeadMismatch { .. })
        ));
    }
}
