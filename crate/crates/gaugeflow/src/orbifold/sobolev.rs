//! Explicit-constant Sobolev inequality on meshed suborbifolds, with its two
//! admissibility conditions: the ball-inclusion condition and the volume
//! condition. The constant is the displayed product
//!
//!   C = l^(1/n) * n/(n-1) * pi/2 * alpha^(-1) * alpha_hat^(n-2)
//!       * (1-alpha)^(-1/n) * omega_n^(-1/n),
//!
//! and the inequality compares (integral rho^(n/(n-1)))^((n-1)/n) against
//! C * integral(|grad rho| + rho |H|) by discrete mesh calculus.

use crate::error::{Error, Result};
use crate::orbifold::mesh::check_ball_condition;
use crate::orbifold::{MeshedHypersurface, OrbifoldQuotient, MESH_TOL};
use crate::su2::GroupElement;

/// Upper bound b = sqrt(K) for the ambient sectional curvature. The
/// hyperbolic branch (purely imaginary b, K = -|b|^2) is accepted by the
/// parameter set but only the constant formula and the volume condition are
/// defined for it; mesh checks require a real bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureBound {
    Real(f64),
    /// Stores |b|; the bound is i|b|, so its square is -|b|^2.
    Imaginary(f64),
}

impl CurvatureBound {
    /// b^2, negative on the hyperbolic branch.
    pub fn squared(self) -> f64 {
        match self {
            CurvatureBound::Real(b) => b * b,
            CurvatureBound::Imaginary(b) => -(b * b),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, CurvatureBound::Real(_))
    }

    fn validate(self) -> Result<()> {
        let m = match self {
            CurvatureBound::Real(b) => b,
            CurvatureBound::Imaginary(b) => b,
        };
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::OutOfRange {
                name: "b",
                value: m,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// Parameters of the inequality. alpha is the interpolation knob in (0,1),
/// alpha_hat >= 1 enters only for n > 2, omega_n is the volume of the unit
/// n-ball (pi for n = 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevParams {
    pub alpha: f64,
    pub alpha_hat: f64,
    pub n: usize,
    pub omega_n: f64,
    pub b: CurvatureBound,
}

impl SobolevParams {
    pub fn new(
        alpha: f64,
        alpha_hat: f64,
        n: usize,
        omega_n: f64,
        b: CurvatureBound,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !(alpha_hat >= 1.0) || !alpha_hat.is_finite() {
            return Err(Error::OutOfRange {
                name: "alpha_hat",
                value: alpha_hat,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        if n < 2 {
            return Err(Error::PreconditionViolated(format!(
                "dimension n = {n} below 2"
            )));
        }
        if !(omega_n > 0.0) || !omega_n.is_finite() {
            return Err(Error::OutOfRange {
                name: "omega_n",
                value: omega_n,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        b.validate()?;
        Ok(Self {
            alpha,
            alpha_hat,
            n,
            omega_n,
            b,
        })
    }

    /// Surfaces in the unit round 3-sphere: n = 2, omega_2 = pi, alpha_hat 1.
    pub fn surface(alpha: f64, b: CurvatureBound) -> Result<Self> {
        Self::new(alpha, 1.0, 2, std::f64::consts::PI, b)
    }
}

/// The displayed product; l is the local group cardinality of the quotient.
pub fn sobolev_constant(params: &SobolevParams, l: usize) -> f64 {
    let n = params.n as f64;
    (l as f64).powf(1.0 / n)
        * (n / (n - 1.0))
        * (std::f64::consts::PI / 2.0)
        * params.alpha.recip()
        * params.alpha_hat.powf(n - 2.0)
        * (1.0 - params.alpha).powf(-1.0 / n)
        * params.omega_n.powf(-1.0 / n)
}

/// Volume condition: b^2 (1-alpha)^(-2/n) (omega_n^-1 l Vol)^(2/n) <= 1,
/// boundary inclusive. Trivially true on the hyperbolic branch (b^2 < 0).
pub fn check_volume_condition(params: &SobolevParams, l: usize, supp_volume: f64) -> bool {
    debug_assert!(supp_volume > 0.0, "volume condition needs positive volume");
    let n = params.n as f64;
    let lhs = params.b.squared()
        * (1.0 - params.alpha).powf(-2.0 / n)
        * (l as f64 * supp_volume / params.omega_n).powf(2.0 / n);
    lhs <= 1.0
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy)]
pub struct SobolevReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs; infinite when rhs vanishes while lhs does not.
    pub ratio: f64,
    pub constant: f64,
    /// Total area weight of vertices where rho > 0.
    pub supp_volume: f64,
    pub pass: bool,
}

/// Checks the inequality for a per-vertex density rho >= 0. The volume in
/// the admissibility condition is the volume of supp rho, which for full
/// support coincides with the total volume. Whether the ambient curvature
/// really is bounded by b^2 is the caller's hypothesis; this routine checks
/// the two displayed conditions and then the inequality itself.
pub fn sobolev_test(
    mesh: &MeshedHypersurface,
    rho: &[f64],
    params: &SobolevParams,
    quotient: &OrbifoldQuotient,
    x0: &GroupElement,
) -> Result<SobolevReport> {
    if rho.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            context: "sobolev_test density",
            expected: mesh.n_vertices(),
            got: rho.len(),
        });
    }
    if rho.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::PreconditionViolated(
            "density must be finite and nonnegative".into(),
        ));
    }
    let b = match params.b {
        CurvatureBound::Real(b) => b,
        CurvatureBound::Imaginary(_) => {
            return Err(Error::PreconditionViolated(
                "mesh checks need a real curvature bound; the imaginary branch is constant-only"
                    .into(),
            ));
        }
    };

    let l = quotient.l();
    let constant = sobolev_constant(params, l);
    let supp_volume: f64 = mesh
        .vertex_areas()
        .iter()
        .zip(rho)
        .filter(|&(_, &r)| r > 0.0)
        .map(|(a, _)| a)
        .sum();

    if supp_volume == 0.0 {
        // rho identically zero: both sides vanish, nothing to gate on.
        return Ok(SobolevReport {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            constant,
            supp_volume,
            pass: true,
        });
    }

    if !check_ball_condition(mesh, x0, b) {
        return Err(Error::PreconditionViolated(
            "ball-inclusion condition fails for the given base point and bound".into(),
        ));
    }
    if !check_volume_condition(params, l, supp_volume) {
        return Err(Error::PreconditionViolated(
            "volume condition fails for the support of the density".into(),
        ));
    }

    let n = params.n as f64;
    let p = n / (n - 1.0);
    let mut lhs_sum = 0.0;
    let mut curvature_term = 0.0;
    for ((&r, &a), &h) in rho.iter().zip(mesh.vertex_areas()).zip(mesh.h()) {
        lhs_sum += r.powf(p) * a;
        curvature_term += r * h.abs() * a;
    }
    let mut gradient_term = 0.0;
    for (f, &area) in (0..mesh.n_faces()).zip(mesh.face_areas()) {
        gradient_term += mesh.face_gradient_norm(rho, f) * area;
    }
    let lhs = lhs_sum.powf(1.0 / p);
    let rhs = constant * (gradient_term + curvature_term);
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(SobolevReport {
        lhs,
        rhs,
        ratio,
        constant,
        supp_volume,
        pass: lhs <= rhs * (1.0 + MESH_TOL),
    })
}
