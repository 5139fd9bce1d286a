//! Compiles MAX-E3-LIN2 systems through bounded-occurrence linear systems and
//! 1-in-3-SAT into weighted TSP instances, and provides the tour/assignment
//! correspondences together with exhaustive oracles that certify them on
//! small instances.
//!
//! Pipeline stages:
//!
//! 1. [`csp::Lin2System`]: equations `x_i + x_j + x_k = b (mod 2)`.
//! 2. [`csp::CloudedSystem`]: every variable replaced by a cloud of copies and
//!    checkers tied together by a certified [`amplifier::BipartiteAmplifier`].
//! 3. [`csp::OneInThreeInstance`]: size-2 clauses from the cloud equations and
//!    three-clause clusters from the size-3 equations.
//! 4. [`tsp::TspInstance`]: terminals, clause gadgets and forced edges, with all
//!    weights held exactly in quarter units.
//!
//! The [`tours`] module turns assignments into quasi-tours and back, and the
//! [`oracles`] module computes exact optima for cross-checking.

pub mod amplifier;
pub mod corpus;
pub mod csp;
pub mod formats;
pub mod oracles;
pub mod quarters;
pub mod reductions;
pub mod tours;
pub mod tsp;

pub use amplifier::BipartiteAmplifier;
pub use csp::{Assignment, CloudedSystem, Lin2System, OneInThreeInstance, Role};
pub use quarters::Quarters;
pub use reductions::{Pipeline, PipelineConfig};
pub use tours::QuasiTour;
pub use tsp::{build_tsp, BuildMode, TspInstance};
