//! Online windowed non-bipartite matching.
//!
//! Vertices arrive one per time step and reveal directed edges back to the
//! `d` vertices that arrived before them. Two online pipelines are provided:
//!
//! * [`edge_weighted`]: greedy submodular auction allocation, frozen into a
//!   semi-matching, then rounded to a matching by alternating random colours.
//!   The expected matching weight is at least a quarter of the offline optimum.
//! * [`vertex_weighted`]: perturbed greedy with a random origin/destination
//!   branch, followed by an online 3-matching that keeps every matched vertex.
//!   The expected 3-matching weight is at least `(1 - 1/e) / 2` of the optimum.
//!
//! [`oracle`] computes the exact offline optimum for small instances and
//! [`generators`] produces random, geometric ride-sharing and adversarial
//! instances. All weight arithmetic is generic over [`Weight`]; the aliases
//! below fix the common choices.

pub mod edge_weighted;
pub mod format;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod vertex_weighted;

pub use model::{
    measure, stream, validate_instance, validate_matching, validate_semi_matching,
    validate_three_matching, ArrivalEvent, Edge, Instance, Matching, ModelError, Pick, SemiMatching,
    Structure, ThreeMatchAction, ThreeMatchEvent, ThreeMatching, ValidationReport, VertexId,
    Violation, WeightMode, WindowedGraph,
};
pub use random::{RandomSource, Scripted};
pub use scalar::{Rational64, Weight};

/// Double-precision instance, the interchange type for files and the CLI.
pub type InstanceF64 = Instance<f64>;
pub type InstanceF32 = Instance<f32>;
/// Instance with exact rational weights.
pub type ExactInstance = Instance<Rational64>;

pub type EdgeRunF64 = edge_weighted::EdgeRun<f64>;
pub type ExactEdgeRun = edge_weighted::EdgeRun<Rational64>;
pub type VertexRunF64 = vertex_weighted::VertexRun<f64>;
pub type ExactVertexRun = vertex_weighted::VertexRun<Rational64>;
pub type OracleResultF64 = oracle::OracleResult<f64>;
pub type ExactOracleResult = oracle::OracleResult<Rational64>;
