//! Tooling for machine-in-the-loop story generation.
//!
//! - [`text`]: tokenizers, stopwords, sentence truncation.
//! - [`metrics`]: USER, ROUGE-L/W, diff views, Pearson r and Fleiss' kappa.
//! - [`packing`]: constraint-hierarchy token budgeting and segment embeddings.
//! - [`dataset`]: story schema, corpus statistics, splits, generation examples.
//! - [`topics`]: a small dictionary-learning topic model.
//! - [`service`]: the HTTP frontend, model backends and the record log.
//! - [`cli`]: the `storyloop` command.

pub mod cli;
pub mod dataset;
mod error;
pub mod metrics;
pub mod packing;
pub mod service;
pub mod text;
pub mod topics;

pub use error::{Error, Result};
