//! Forward and inverse surrogate models for microfluidic fiber fabrication,
//! trained on synthetic data.
//!
//! The workflow this crate covers end to end:
//!
//! 1. [`synthdata`] — synthesize per-condition Gaussian datasets from the
//!    baseline microfiber statistics, split them, and persist them as CSV.
//! 2. [`neuralnet`] — a dependency-free dense ReLU network: seeded
//!    initialization, backpropagation, Adam, the training loop, gradient
//!    checking, and versioned JSON model files.
//! 3. [`pipelines`] — the predictive task (flows + bath in, fiber features
//!    out) and the design task (the exact swap), plus the batch-size sweep.
//! 4. [`evaluation`] — percentage errors against holdout cell means,
//!    overfit diagnostics, and CSV/SVG report emission.
//!
//! Every stochastic step is a pure function of a 64-bit seed (see [`rng`]),
//! so datasets, trained models, and reports are bit-reproducible.

pub mod error;
pub mod evaluation;
pub mod neuralnet;
pub mod pipelines;
pub mod rng;
pub mod synthdata;

pub use error::{Error, Result};
