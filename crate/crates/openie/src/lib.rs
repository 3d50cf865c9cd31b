//! Span-selection open information extraction.
//!
//! The pipeline has two stages. A predicate model scores candidate spans of a
//! sentence and keeps those classified as predicates; an argument model then
//! selects one span (or the NULL span) per argument label `A0..A3` for each
//! predicate. Both models share the same architecture: embedded word features
//! run through a stacked BiLSTM, span features are assembled from the hidden
//! states, and a feed-forward head scores each candidate.
//!
//! Modules follow the pipeline:
//!
//! - [`corpus`]: annotated sentences, extraction tuples, embedding tables, IO.
//! - [`spans`]: candidate span enumeration under the pruning constraints.
//! - [`neural`]: the differentiable model with exact backpropagation.
//! - [`training`]: losses, the Adam schedule, and the two training loops.
//! - [`inference`]: predicate detection, greedy argument decoding, confidence.
//! - [`evaluation`]: tuple matching, precision-recall sweeps, AUC, best F1.
//! - [`manifest`]: run manifests written next to every output artifact.

pub mod corpus;
pub mod evaluation;
pub mod inference;
pub mod manifest;
pub mod neural;
pub mod spans;
pub mod training;

pub use corpus::{Dataset, EmbeddingTable, Extraction, Sentence, Span, Token};
pub use spans::{candidate_spans, Candidate, CandidateConfig};
