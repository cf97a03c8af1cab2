//! Numerical laboratory for cyclicity in Dirichlet-type spaces on the unit
//! ball of C^2: truncated power series with weighted norms, Korányi geometry,
//! Cantor-type boundary sets, Riesz capacities, explicit extremal-function
//! surrogates and the reduced integral chains that locate critical indices.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod constructions;
pub mod cyclicity;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod quad;
pub mod series;
pub mod sets;

pub use error::{Error, Result};
pub use fit::LineFit;
pub use geometry::{koranyi_distance, BallPoint, CurveChart};
pub use num_complex::Complex64;
pub use series::{monomial_weight, MultiIndex, PowerSeries, SpaceParams};

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
