//! Gauge-orbit path spaces over SU(2), regularized spectral traces, and
//! axisymmetric mean curvature flow in the round 3-sphere, with the meshed
//! quotient-geometry checks that tie the three together.

pub mod cli;
pub mod error;
pub mod flow;
pub mod orbifold;
pub mod path_space;
pub mod su2;
pub mod trace;

pub use error::{Error, Result};
