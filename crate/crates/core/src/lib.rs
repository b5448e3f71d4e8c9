//! Exact induced-copy counting and inducibility computations for complete
//! multipartite patterns.

pub mod counting;
pub mod error;
pub mod exactmath;
pub mod graph;
pub mod landscape;
pub mod oracle;
pub mod profile;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod simplex;
pub mod verify;

pub use counting::MultipartitePartition;
pub use error::{Error, Result};
pub use exactmath::{ExactInt, ExactRat};
pub use graph::AdjacencyGraph;
pub use profile::PatternSpec;
pub use scalar::{BigFloat, Rational, Scalar};
pub use simplex::LimitPoint;

pub type LimitPointF64 = simplex::LimitPoint<f64>;
pub type LimitPointQ = simplex::LimitPoint<Rational>;
pub type LimitPointBig = simplex::LimitPoint<BigFloat>;
pub type AscentF64 = simplex::AscentResult<f64>;
pub type AscentBig = simplex::AscentResult<BigFloat>;
