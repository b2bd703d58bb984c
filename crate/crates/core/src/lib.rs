//! Seed-word weak supervision for aspect-based sentiment analysis.
//!
//! The crate turns a handful of seed words per aspect category into
//! pseudo-labels for three tasks (aspect category detection, aspect term
//! extraction and aspect term polarity), grows the seed set automatically,
//! mines extra training sentences from an unlabeled data bank by exact
//! nearest-neighbour retrieval, and trains a small multitask network on the
//! result.
//!
//! Stages, in pipeline order:
//!
//! - [`corpus`]: tokenization, POS tagging, file formats and splits.
//! - [`embedding`]: CBOW word vectors with negative sampling.
//! - [`pseudolabel`]: seed similarity, connection scores and BIO pseudo-labels.
//! - [`sec`]: seed-word enhancement from boundary and uncertain keywords.
//! - [`retrieval`]: task-embedding queries over a data bank.
//! - [`classifier`]: shared encoder with three task heads.
//! - [`eval`], [`config`], [`pipeline`]: metrics, configuration and orchestration.

pub mod classifier;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod pipeline;
pub mod pseudolabel;
pub mod retrieval;
pub mod sec;
pub mod synthetic;

mod hashing;
mod vecmath;

pub use corpus::{PosTag, TaggedSentence, Token};
pub use embedding::EmbeddingTable;
pub use pseudolabel::{AspectLexicon, Polarity, PseudoLabeledSentence};
