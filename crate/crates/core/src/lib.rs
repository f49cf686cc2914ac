//! Exact spectral projector kernels on round spheres and flat tori, together
//! with the Bessel scaling limit, smoothed projectors, eigenvalue clustering
//! and monochromatic random-wave covariances built on top of them.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clusters;
pub mod error;
pub mod models;
pub mod projector;
pub mod randomwaves;
pub mod rng;
pub mod smoothing;
pub mod specfun;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
