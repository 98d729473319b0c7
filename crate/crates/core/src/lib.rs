//! Collision-based uniformity testers defined by comparison graphs.
//!
//! A tester is a pair `(G, tau)`: the comparison graph `G` says which pairs of
//! samples are compared for equality, and `tau` places the decision threshold
//! `T = |E| (1 + tau eps^2) / n`. The tester answers YES when the number of
//! colliding edges `Z` is strictly below `T`.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: distributions over `[n]`, collision moments, seeded sampling.
//! - [`graph`]: comparison graphs, their statistics and structural inequalities.
//! - [`tester`]: collision counting, thresholds, exact moments and an
//!   enumeration oracle for error probabilities.
//! - [`conditions`]: sufficiency checks for a `(G, tau)` pair, per-model
//!   parameter planners and conjecture-conditional lower bounds.
//! - [`models`]: resource-accounting simulators for the simultaneous,
//!   asymmetric-cost, streaming and combined models.
//! - [`congest`]: a round-accurate CONGEST simulator with a per-edge bit meter.
//! - [`harness`]: scenario execution, error-rate tables and moment audits.
//!
//! Trial loops go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and a plain sequential loop otherwise. Results are
//! identical either way because every trial draws from its own RNG stream.

pub mod conditions;
pub mod congest;
pub mod dist;
pub mod error;
pub mod exec;
pub mod graph;
pub mod harness;
pub mod models;
pub mod rng;
pub mod tester;

pub use conditions::{ConditionReport, Plan, PlanFamily};
pub use dist::{Distribution, SampleLabeling};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{ComparisonGraph, GraphStats};
pub use rng::StreamId;
pub use tester::{Decision, TestOutcome, TesterSpec};
