// SPDX-License-Identifier: MIT OR Apache-2.0
//! Exact-arithmetic toolkit for analysing contextuality and nonlocality
//! through classical causal models.
//!
//! Everything here runs on arbitrary-precision rationals: no-disturbance
//! checks, conditional-independence tests, d-separation queries, and the
//! linear-feasibility decision for factorisability are all exact, with no
//! tolerance parameter anywhere in a decision path.

pub mod ci;
pub mod cli;
pub mod corpus;
pub mod doc;
pub mod error;
pub mod faithfulness;
pub mod graph;
pub mod model;
pub mod polytope;
pub mod rational;
pub mod scenario;
pub mod simplex;
pub mod verify;

pub use error::Error;
pub use rational::Q;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
