//! Config-driven semi-supervised classification.
//!
//! A YAML [`ExperimentConfig`] names a dataset, a sampling scheme, an
//! optional graph and a method. Transductive methods propagate labels over a
//! [`SparseGraph`]; inductive strategies wrap a supervised base learner and
//! pseudo-label the unlabeled pool. [`run_experiment`] executes the whole
//! pipeline and writes a fingerprint-named artifact directory.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the pipeline uses.

// `!(x > 0.0)` is the NaN-rejecting form used by every argument check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canon;
pub mod config;
pub mod data;
pub mod graph;
pub mod inductive;
pub mod metrics;
pub mod params;
pub mod rng;
pub mod runner;
pub mod sampling;
pub mod scalar;
pub mod transductive;

pub use config::{load_config, parse_config, validate, ConfigError, ExperimentConfig, Issue, Task};
pub use runner::{cache_gc, cache_ls, grid_sweep, run_experiment, RunArtifacts, RunError, RunOptions, SweepOutcome};
pub use scalar::Scalar;

pub type Graph = graph::SparseGraph<f64>;
pub type Dataset = data::Dataset<f64>;
pub type Labels = transductive::LabelMatrix<f64>;
pub type Propagation = transductive::PropagationResult<f64>;
pub type Model = inductive::TrainedModel<f64>;

pub use graph::SparseGraph;
