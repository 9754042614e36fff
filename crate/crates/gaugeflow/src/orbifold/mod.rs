//! Geometry of the base: geodesic balls in the round 3-sphere and its finite
//! two-sided quotients, meshed hypersurfaces, the explicit-constant Sobolev
//! inequality with its admissibility conditions, the closed-surface
//! divergence identity, and the Myers diameter bound.

mod divergence;
mod mesh;
mod myers;
mod sobolev;
mod suite;

pub use divergence::{divergence_theorem_check, SphereVectorField};
pub use suite::{run_sobolev_suite, SobolevSuiteReport};
pub use mesh::{
    check_ball_condition, euclidean_sphere_mesh, geodesic_sphere_mesh, profile_mesh, Ambient,
    MeshedHypersurface,
};
pub use myers::{myers_check, MyersReport};
pub use sobolev::{
    check_volume_condition, sobolev_constant, sobolev_test, CurvatureBound, SobolevParams,
    SobolevReport,
};

use crate::error::{Error, Result};
use crate::path_space::BoundarySubgroup;

/// Relative tolerance for inequality checks that involve discretized
/// curvature or graph-geodesic distances.
pub const MESH_TOL: f64 = 0.05;

/// Margin used by purely metric checks (ball inclusion).
pub const METRIC_MARGIN: f64 = 1e-6;

/// A two-sided finite quotient of the group, reduced to the data the
/// analytic estimates consume: the acting subgroup and the cardinality l of
/// the local group at the reference point (supplied by the caller, since the
/// stabilizer depends on where the reference point sits relative to the
/// singular set; l = 1 at non-singular points).
#[derive(Debug, Clone)]
pub struct OrbifoldQuotient {
    gamma: BoundarySubgroup,
    l: usize,
}

impl OrbifoldQuotient {
    /// The local group embeds in gamma x gamma, so l may not exceed |Γ|².
    pub fn new(gamma: BoundarySubgroup, l: usize) -> Result<Self> {
        let order = gamma.order();
        if l == 0 || l > order * order {
            return Err(Error::PreconditionViolated(format!(
                "local group cardinality l = {l} outside 1..=|Gamma|^2 = {}",
                order * order
            )));
        }
        Ok(Self { gamma, l })
    }

    /// Trivial quotient (no identification, non-singular reference point).
    pub fn trivial() -> Self {
        Self {
            gamma: BoundarySubgroup::full(),
            l: 1,
        }
    }

    pub fn gamma(&self) -> &BoundarySubgroup {
        &self.gamma
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn order(&self) -> usize {
        self.gamma.order()
    }
}
