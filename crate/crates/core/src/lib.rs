//! Multi-period fuel treatment scheduling on a polygon-based landscape.
//!
//! The planning problem: a landscape is divided into treatment units, each
//! made of one or more vegetation patches with their own age and ecological
//! parameters. A unit becomes high-risk once enough of its area passes the
//! vegetation risk-age threshold; the objective is to minimise the weighted
//! number of adjacent high-risk unit pairs over the horizon, subject to a
//! yearly area budget and tolerable fire interval (TFI) rules.
//!
//! The crate provides:
//! - [`landscape`]: the immutable problem instance (loading, validation,
//!   adjacency derivation from boundary geometry, edge weighting),
//! - [`dynamics`]: the deterministic simulator that ages vegetation under a
//!   schedule and classifies risk/young/old status — the ground truth every
//!   other component is checked against,
//! - [`mip`]: the mixed-integer model builder with LP/MPS export, solution
//!   ingestion and a full assignment checker,
//! - [`search`]: internal exact (exhaustive, branch-and-bound) and heuristic
//!   (greedy + local search) solvers over the schedule space,
//! - [`pipeline`]: the two-phase planning procedure, report emission and a
//!   synthetic instance generator.

pub mod dynamics;
mod error;
pub mod landscape;
pub mod mip;
pub mod pipeline;
pub mod search;

pub use error::{Error, Result};
