//! Joint placement, proactive caching and data-rate selection for
//! edge-cloud supported metaverse AR services under user mobility.
//!
//! The crate formulates the service assignment problem as a 0-1 integer
//! linear program, solves it with a built-in branch-and-bound solver,
//! evaluates any assignment with an independent closed-form metric engine,
//! and reproduces the experiment sweeps against the RandS / CEC baselines.

pub mod baselines;
pub mod error;
pub mod evaluator;
pub mod harness;
pub mod ilp;
pub mod radio;
pub mod solver;
pub mod topology;
pub mod workload;

pub use error::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
