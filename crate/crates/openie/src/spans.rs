//! Candidate span enumeration under the three pruning constraints:
//! maximum length (training only), no overlap with the given predicate span,
//! and the syntactic constraint.
//!
//! A sentence of length `n` has `n(n+1)/2` spans; the constraints cut that
//! set down before scoring. Candidate order is fixed as lexicographic
//! `(start, end)` with the NULL candidate last, so softmax indexing is
//! deterministic across runs.

use crate::corpus::{Sentence, Span, ROOT_HEAD};

/// Whether candidates are being generated for the predicate model or the
/// argument model; selects which maximum length applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanRole {
    Predicate,
    Argument,
}

/// Configuration for [`candidate_spans`].
///
/// The maximum-length constraint reads "less than" strictly: with
/// `max_arg_len = 10`, argument spans of length 10 or more are pruned
/// (lengths up to 9 are kept); with `max_pred_len = 5`, predicates keep
/// lengths up to 4.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateConfig {
    pub role: SpanRole,
    pub max_arg_len: usize,
    pub max_pred_len: usize,
    /// True at training, false at inference.
    pub enforce_max_len: bool,
    pub enforce_syntactic: bool,
    /// Present when generating argument candidates for a known predicate;
    /// spans overlapping it are pruned.
    pub predicate_span: Option<Span>,
}

impl CandidateConfig {
    /// Candidates for the predicate model.
    pub fn for_predicates(enforce_max_len: bool, enforce_syntactic: bool) -> Self {
        CandidateConfig {
            role: SpanRole::Predicate,
            max_arg_len: 10,
            max_pred_len: 5,
            enforce_max_len,
            enforce_syntactic,
            predicate_span: None,
        }
    }

    /// Candidates for the argument model, given the predicate span.
    pub fn for_arguments(
        predicate: Span,
        enforce_max_len: bool,
        enforce_syntactic: bool,
    ) -> Self {
        CandidateConfig {
            role: SpanRole::Argument,
            max_arg_len: 10,
            max_pred_len: 5,
            enforce_max_len,
            enforce_syntactic,
            predicate_span: Some(predicate),
        }
    }

    fn max_len(&self) -> usize {
        match self.role {
            SpanRole::Predicate => self.max_pred_len,
            SpanRole::Argument => self.max_arg_len,
        }
    }
}

/// A candidate for span selection: a real span or the NULL sentinel meaning
/// "this label is absent".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Candidate {
    Span(Span),
    Null,
}

impl Candidate {
    pub fn as_span(&self) -> Option<Span> {
        match self {
            Candidate::Span(s) => Some(*s),
            Candidate::Null => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Candidate::Null)
    }
}

/// All `n(n+1)/2` spans of a sentence of length `n`, in lexicographic
/// `(start, end)` order. The NULL candidate is not included.
pub fn enumerate_all_spans(n: usize) -> Result<Vec<Span>, String> {
    if n == 0 {
        return Err("cannot enumerate spans of an empty sentence".into());
    }
    let mut spans = Vec::with_capacity(n * (n + 1) / 2);
    for start in 0..n {
        for end in start..n {
            spans.push(Span::new(start, end));
        }
    }
    Ok(spans)
}

/// True iff the closed intervals of `a` and `b` intersect.
pub fn overlaps(a: &Span, b: &Span) -> bool {
    a.overlaps(b)
}

/// The syntactic constraint for multi-word spans: every word must either be
/// the parent of another word in the span, or have its own parent inside the
/// span. Single-token spans pass vacuously.
pub fn satisfies_syntactic_constraint(span: &Span, sentence: &Sentence) -> bool {
    debug_assert!(span.in_bounds(sentence.len()));
    if span.len() == 1 {
        return true;
    }
    for i in span.start..=span.end {
        let head = sentence.tokens[i].dep_head;
        let parent_inside = head != ROOT_HEAD && span.contains(head as usize);
        if parent_inside {
            continue;
        }
        let heads_someone_inside = (span.start..=span.end)
            .any(|j| j != i && sentence.tokens[j].dep_head == i as i32);
        if !heads_someone_inside {
            return false;
        }
    }
    true
}

/// The syntactic head of a span: the token whose parent lies outside the span
/// (or is the root). When several tokens qualify — possible for spans that do
/// not satisfy the syntactic constraint — the leftmost is taken.
pub fn span_syntactic_head(span: &Span, sentence: &Sentence) -> usize {
    debug_assert!(span.in_bounds(sentence.len()));
    for i in span.start..=span.end {
        let head = sentence.tokens[i].dep_head;
        if head == ROOT_HEAD || !span.contains(head as usize) {
            return i;
        }
    }
    // A valid tree always has a token whose parent leaves the span.
    unreachable!("span without an external-headed token");
}

/// The parent index of a span's syntactic head, or `None` when that head is
/// the sentence root.
pub fn span_head_parent(span: &Span, sentence: &Sentence) -> Option<usize> {
    let head = span_syntactic_head(span, sentence);
    match sentence.tokens[head].dep_head {
        ROOT_HEAD => None,
        parent => Some(parent as usize),
    }
}

/// Enumerates candidate spans for a sentence under the configured
/// constraints, appending the NULL candidate last.
pub fn candidate_spans(sentence: &Sentence, config: &CandidateConfig) -> Vec<Candidate> {
    let all = enumerate_all_spans(sentence.len()).expect("sentences are non-empty");
    let mut out: Vec<Candidate> = all
        .into_iter()
        .filter(|span| {
            if config.enforce_max_len && span.len() >= config.max_len() {
                return false;
            }
            if let Some(pred) = &config.predicate_span {
                if span.overlaps(pred) {
                    return false;
                }
            }
            if config.enforce_syntactic && !satisfies_syntactic_constraint(span, sentence) {
                return false;
            }
            true
        })
        .map(Candidate::Span)
        .collect();
    out.push(Candidate::Null);
    out
}
