//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by instance construction, evaluators, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An instance or component of one violated a structural invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A parameter was outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects that must agree on worker/task counts did not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The additive evaluator was given a task with two or more workers.
    #[error("task {0} has multiple assigned workers; use the majority evaluator")]
    MultiWorkerTask(usize),

    /// Task utilities were required to be equal but were not.
    #[error("task utilities are not homogeneous")]
    NonHomogeneousUtilities,

    /// An exhaustive enumeration would exceed its safety bound.
    #[error("enumeration of {required} states exceeds the limit of {limit}")]
    EnumerationLimit { required: u128, limit: u128 },

    /// Capacities cannot absorb the tasks a method must place.
    #[error("infeasible capacities: {0}")]
    InfeasibleCapacity(String),

    /// An experiment configuration was rejected.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Reading or writing an external file format failed.
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
