//! flagit-core: indicator mining over sentence corpora.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] ingests documents, segments them into sentences, normalizes,
//!    deduplicates, and annotates tokens.
//! 2. [`les`] matches categorized pattern rules (P / Sp / N / Sn) against the
//!    sentences and partitions the corpus into seven rules-set bins.
//! 3. [`sampling`] draws a small labeling budget across the bins with
//!    iterative redistribution and stores the human labels.
//! 4. [`classifier`] trains a linear model over hashed n-gram embeddings from
//!    those labels.
//! 5. [`semisup`] grows the training set by pseudo-labeling the extreme ends
//!    of the unlabeled pool's probability distribution, retrains, and tags
//!    the whole corpus per indicator.
//! 6. [`eval`] scores everything against a bag-of-words baseline and a
//!    rules-only baseline on identical splits.
//!
//! [`pipeline`] wires the stages over a project directory with content-hash
//! markers, so stale artifacts are detected and stages re-run only when their
//! inputs changed.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod les;
pub mod pipeline;
pub mod sampling;
pub mod semisup;

pub use error::{Error, Result};
