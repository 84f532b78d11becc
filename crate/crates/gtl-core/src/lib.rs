//! Training engine for guidance-masked gradient descent.
//!
//! This crate is the pure computational core: dense networks with exact
//! reverse-mode gradients, per-parameter guidance matrices built from scout
//! trainings, synthetic tasks and one-shot episodes, and the three experiment
//! pipelines (one-shot transfer, plateau breakthrough, knowledge
//! accumulation). It is `no_std` + `alloc`; everything that touches files,
//! threads, or the terminal lives in the companion `gtl` crate.
//!
//! Determinism is a hard contract throughout: every random choice is driven
//! by an explicit 64-bit seed, and re-running any operation with the same
//! inputs reproduces the same bits.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod experiments;
pub mod guidance;
pub mod mat;
pub mod net;
pub mod rng;
pub mod scouting;
pub mod tasks;
pub mod train;

pub use error::Error;
pub use guidance::{DeviationStat, GuidanceMatrix, NormKind, NormScope, StatKind};
pub use mat::Matrix;
pub use net::{Activation, Batch, GradSet, NetworkSpec, OutputHead, ParamSet, Sgd};
pub use tasks::{BitMappingTask, Episode, TaskDataset, TaskSource};

/// A parameter counts as "changed" when it moved more than this far from its
/// block-start value.
pub const CHANGED_PARAM_EPS: f64 = 1e-8;
