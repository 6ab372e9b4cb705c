//! Core library for an artificial-language laboratory: two small English
//! fragments generated from context-free grammars, an identity/question-
//! formation dataset with a withheld generalization case, sequence-to-sequence
//! recurrent models (SRN/GRU/LSTM, optional attention) trained from scratch,
//! and the evaluation, probing, and error-taxonomy machinery that goes with
//! them.
//!
//! Modules map one-to-one onto the stages of the pipeline:
//!
//! - [`grammar`]: the two language fragments, sampling, annotation, recognition
//! - [`transform`]: identity / hierarchical-question / linear-question oracles
//! - [`dataset`]: split construction with uniqueness and the withheld case
//! - [`nn`]: tensors, reverse-mode gradients, SGD, dropout, losses
//! - [`rnn`]: encoder/decoder cells, attention, training loop, greedy decoding
//! - [`eval`]: word/POS match, first-auxiliary diagnostic, cross-seed stats
//! - [`probe`]: linear diagnostic classifiers on sentence encodings
//! - [`analysis`]: prepose/delete taxonomy of generalization-set outputs

pub mod analysis;
pub mod dataset;
pub mod eval;
pub mod grammar;
pub mod nn;
pub mod probe;
pub mod rng;
pub mod rnn;
pub mod transform;

pub use dataset::{DatasetSplits, Example};
pub use rnn::{CellKind, ModelConfig, Seq2Seq};
pub use grammar::{Grammar, Language, Lexicon, LexicalCategory, ParseTree, SentenceAnnotation};
pub use transform::TaskToken;
