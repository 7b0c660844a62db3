//! Participant selection for group activities.
//!
//! Given a social graph with per-node interest scores and per-edge social
//! tightness, the goal is to pick a connected group of at most `k_max`
//! members maximizing total preference (interest plus tightness of internal
//! ties) minus a size-dependent activity cost.
//!
//! The crate provides an exact enumeration oracle for small instances
//! ([`oracle`]), deterministic and randomized greedy baselines
//! ([`baselines`]), and the staged budget-allocating randomized solver
//! ([`bargs`]) that splits a run budget over start nodes and group sizes and
//! adapts its expansion probabilities by cross-entropy updates. [`data_io`]
//! covers instance files, synthetic generation, and result CSVs.

pub mod bargs;
pub mod baselines;
pub mod data_io;
pub mod demo;
mod exec;
pub mod graph;
pub mod oracle;

pub use graph::{CostFunction, CostSegment, GroupSelection, SocialGraph, UtilityParams};
