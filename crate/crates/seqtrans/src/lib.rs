//! Continual-learning experimentation engine.
//!
//! The crate trains a small multilayer perceptron through a sequence of
//! classification tasks, measures how much earlier learning helps later tasks
//! (and vice versa), and uses those transferability estimates to pick a task
//! order greedily before any full training run happens.
//!
//! Modules, bottom up:
//! - [`dataset`]: synthetic Gaussian task suites, CSV ingestion, splits.
//! - [`learner`]: the shared-trunk/per-head model and the continual-training
//!   strategies (naive fine-tuning, experience replay, gradient projection).
//! - [`metrics`]: training-free transferability scores of a snapshot's
//!   features against a candidate dataset.
//! - [`measures`]: sequence-level quantities — average accuracy, total
//!   forward/reverse transferability, and their correlation.
//! - [`ordersel`]: greedy task-order selection from a pairwise score matrix.
//! - [`harness`]: end-to-end experiments and report emission.
//! - [`cli`]: the `seqtrans` command-line front end.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod learner;
pub mod measures;
pub mod metrics;
pub mod ordersel;
pub mod rng;

pub use error::{Error, Result};
