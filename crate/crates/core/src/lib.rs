//! Greedy base packings for graphic and bicircular matroids.
//!
//! The crate is organised bottom-up: [`graph`] holds the multigraph and the
//! input formats, [`dyntree`] the dynamic forest, [`pseudoforest`] the dynamic
//! minimum-weight maximal pseudoforest, [`packing`] and [`dynpacking`] the
//! static and layered packings, [`density`] and [`orientation`] the estimators
//! built on top, [`ideal`] exact small-instance oracles and [`lab`] the
//! experiment bench.
//!
//! Numeric code that is not inherently integral is generic over a scalar
//! type; see [`scalar::Scalar`] and the aliases below.

pub mod density;
pub mod dynpacking;
pub mod dyntree;
pub mod graph;
pub mod ideal;
pub mod lab;
pub mod orientation;
pub mod packing;
pub mod pseudoforest;
pub mod scalar;

pub use graph::{EdgeId, Graph, GraphError, MatroidKind, UpdateEvent};
pub use scalar::Scalar;

/// Exact rational used by the oracles.
pub type Rational = num_rational::BigRational;

/// Exact per-edge loads.
pub type ExactLoads = packing::LoadsVector<Rational>;
/// Double precision per-edge loads.
pub type Loads64 = packing::LoadsVector<f64>;
/// Single precision per-edge loads.
pub type Loads32 = packing::LoadsVector<f32>;

/// Convergence record in double precision.
pub type Record64 = lab::convergence::ConvergenceRecord<f64>;
/// Convergence record in single precision.
pub type Record32 = lab::convergence::ConvergenceRecord<f32>;
