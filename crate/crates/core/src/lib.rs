//! Robust task assignment against worker-disabling attacks.
//!
//! A defender assigns tasks to unreliable workers; a rational adversary then
//! observes the assignment and disables a fixed number of workers so as to
//! hurt the defender the most. This crate computes assignments that maximize
//! the defender's expected utility under that best-responding attack:
//!
//! * exact solver for homogeneous task utilities ([`homogeneous`]),
//! * exact single-worker-per-task solver and a multi-worker improvement
//!   heuristic for heterogeneous utilities ([`heterogeneous`]),
//! * attacker best responses, closed-form and enumerative ([`attacker`]),
//! * Monte-Carlo outcome sampling and the sample-average utility estimator
//!   ([`saa`]),
//! * baselines and an exhaustive brute-force oracle ([`baselines`]),
//! * random instance generation and a reproducible experiment harness
//!   ([`generate`], [`experiments`]).
//!
//! See the `book/` guide for worked examples; its code snippets run as
//! doctests of this crate.

pub mod attacker;
pub mod baselines;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod heterogeneous;
pub mod homogeneous;
pub mod model;
pub mod rng;
pub mod saa;

pub use error::{Error, Result};
pub use model::{
    evaluate_additive, evaluate_majority_exact, worker_contributions, Assignment, Attack,
    ContributionVector, DecisionRule, GameInstance, Task, Worker, UTILITY_TOL,
};

/// Book chapters compile and run as doctests so the guide stays in sync
/// with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/homogeneous.md")]
    mod homogeneous {}
    #[doc = include_str!("../../../book/src/heterogeneous.md")]
    mod heterogeneous {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
