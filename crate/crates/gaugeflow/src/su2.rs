//! SU(2) as unit quaternions, with a scaled bi-invariant metric.
//!
//! Algebra vectors are stored in an orthonormal basis for the *working*
//! metric, which is the reference bi-invariant form divided by the path
//! length `a` (and scaled by `scale`). All curvature constants downstream
//! reduce to the single number `kappa = a / scale`; the default `scale = a`
//! gives the unit round 3-sphere.

use crate::error::{Error, Result};

/// Imaginary-part threshold below which a quaternion with negative real part
/// counts as the antipode for `log_group`.
const CUT_LOCUS_TOL: f64 = 1e-9;

/// Gram-determinant threshold for rejecting a curvature plane.
const DEGENERATE_PLANE_TOL: f64 = 1e-14;

/// Raw Hamilton product on 4-vectors, no unit normalization. Used where the
/// factors are deliberately non-unit: embedded mesh points, Killing fields.
pub(crate) fn quaternion_multiply(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let [a0, a1, a2, a3] = a;
    let [b0, b1, b2, b3] = b;
    [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]
}

/// Fixes the metric on the group: path length `a` and the normalization
/// `scale` of the reference bi-invariant form. The curvature of the induced
/// round metric is `kappa = a / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConvention {
    a: f64,
    scale: f64,
}

impl MetricConvention {
    /// Metric with explicit `a` and `scale`; both must be positive.
    pub fn new(a: f64, scale: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::OutOfRange {
                name: "scale",
                value: scale,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { a, scale })
    }

    /// Unit-round convention (`kappa = 1`) for the given path length.
    pub fn unit_round(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sectional curvature of the group under this convention.
    pub fn kappa(&self) -> f64 {
        self.a / self.scale
    }

    fn sqrt_kappa(&self) -> f64 {
        self.kappa().sqrt()
    }
}

impl Default for MetricConvention {
    fn default() -> Self {
        Self { a: 1.0, scale: 1.0 }
    }
}

/// Unit quaternion `(w, x, y, z)`; the group invariant |q| = 1 is restored
/// after every product so drift never exceeds one rounding step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    q: [f64; 4],
}

impl GroupElement {
    pub fn identity() -> Self {
        Self {
            q: [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// The antipode -e, the unique cut point of the identity.
    pub fn antipode() -> Self {
        Self {
            q: [-1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Builds from raw components, normalizing. Errors if the norm is too far
    /// from 1 to be a rounding artifact of a unit quaternion (> 1e-6) or zero.
    pub fn from_components(q: [f64; 4]) -> Result<Self> {
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
            return Err(Error::PreconditionViolated(format!(
                "quaternion norm {n} is not within 1e-6 of 1"
            )));
        }
        Ok(Self {
            q: [q[0] / n, q[1] / n, q[2] / n, q[3] / n],
        })
    }

    pub fn components(&self) -> [f64; 4] {
        self.q
    }

    pub fn real(&self) -> f64 {
        self.q[0]
    }

    pub fn imaginary(&self) -> [f64; 3] {
        [self.q[1], self.q[2], self.q[3]]
    }

    fn renormalized(q: [f64; 4]) -> Self {
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        Self {
            q: [q[0] / n, q[1] / n, q[2] / n, q[3] / n],
        }
    }

    /// Group product, renormalized.
    pub fn multiply(&self, rhs: &GroupElement) -> GroupElement {
        let [a0, a1, a2, a3] = self.q;
        let [b0, b1, b2, b3] = rhs.q;
        GroupElement::renormalized([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }

    /// Group inverse (conjugate; exact for unit quaternions).
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            q: [self.q[0], -self.q[1], -self.q[2], -self.q[3]],
        }
    }

    /// Adjoint action on algebra components. Conjugation rotates the
    /// imaginary part, and the component scaling cancels, so this is the
    /// quaternion's rotation matrix applied to `x`.
    pub fn adjoint(&self, x: &AlgebraVector) -> AlgebraVector {
        let [w, qx, qy, qz] = self.q;
        let [vx, vy, vz] = x.0;
        // q v q* expanded for pure-imaginary v.
        let tx = 2.0 * (qy * vz - qz * vy);
        let ty = 2.0 * (qz * vx - qx * vz);
        let tz = 2.0 * (qx * vy - qy * vx);
        AlgebraVector([
            vx + w * tx + (qy * tz - qz * ty),
            vy + w * ty + (qz * tx - qx * tz),
            vz + w * tz + (qx * ty - qy * tx),
        ])
    }

    pub fn norm_error(&self) -> f64 {
        let n2 = self.q.iter().map(|c| c * c).sum::<f64>();
        (n2.sqrt() - 1.0).abs()
    }
}

/// Tangent vector at the identity, components in the working orthonormal
/// basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgebraVector(pub [f64; 3]);

impl AlgebraVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn zero() -> Self {
        Self([0.0; 3])
    }

    pub fn inner(&self, other: &AlgebraVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> AlgebraVector {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    fn cross(&self, other: &AlgebraVector) -> AlgebraVector {
        let [ax, ay, az] = self.0;
        let [bx, by, bz] = other.0;
        Self([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx])
    }
}

impl std::ops::Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl std::ops::Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }
}

/// Group exponential. A component vector of working norm t maps to the point
/// at arc distance t along the corresponding one-parameter subgroup; the
/// quaternion rotation angle is sqrt(kappa) * t.
pub fn exp_group(x: &AlgebraVector, conv: &MetricConvention) -> GroupElement {
    let theta = conv.sqrt_kappa() * x.norm();
    // sin(theta)/theta * sqrt(kappa), stable near zero.
    let s = if theta < 1e-6 {
        conv.sqrt_kappa() * (1.0 - theta * theta / 6.0)
    } else {
        conv.sqrt_kappa() * theta.sin() / theta
    };
    GroupElement::renormalized([
        theta.cos(),
        s * x.0[0],
        s * x.0[1],
        s * x.0[2],
    ])
}

/// Principal branch of the group logarithm. Errors with `CutLocus` when `g`
/// is within tolerance of the antipode, where no principal branch exists.
pub fn log_group(g: &GroupElement, conv: &MetricConvention) -> Result<AlgebraVector> {
    let w = g.real();
    let im = g.imaginary();
    let r = (im[0] * im[0] + im[1] * im[1] + im[2] * im[2]).sqrt();
    if r <= CUT_LOCUS_TOL && w < 0.0 {
        return Err(Error::CutLocus { tol: CUT_LOCUS_TOL });
    }
    let theta = r.atan2(w);
    // theta/(r*sqrt(kappa)), stable near the identity where r -> 0.
    let s = if r < 1e-6 && w > 0.0 {
        (1.0 + r * r / (3.0 * w * w)) / (conv.sqrt_kappa() * w)
    } else {
        theta / (r * conv.sqrt_kappa())
    };
    Ok(AlgebraVector([s * im[0], s * im[1], s * im[2]]))
}

/// Lie bracket in working components: [x, y] = 2 sqrt(kappa) (x cross y).
pub fn bracket(x: &AlgebraVector, y: &AlgebraVector, conv: &MetricConvention) -> AlgebraVector {
    x.cross(y).scale(2.0 * conv.sqrt_kappa())
}

/// Bi-invariant geodesic distance; defined everywhere, including the cut
/// locus where it equals pi/sqrt(kappa).
pub fn geodesic_distance(g: &GroupElement, h: &GroupElement, conv: &MetricConvention) -> f64 {
    let d = g.inverse().multiply(h);
    let im = d.imaginary();
    let r = (im[0] * im[0] + im[1] * im[1] + im[2] * im[2]).sqrt();
    r.atan2(d.real()) / conv.sqrt_kappa()
}

/// Sectional curvature of the plane spanned by `x`, `y` via the bi-invariant
/// formula K = |[x,y]|^2 / (4 Gram(x,y)). Constant kappa by construction;
/// computing it through the bracket keeps this an end-to-end consistency
/// probe rather than a constant.
pub fn sectional_curvature_probe(
    x: &AlgebraVector,
    y: &AlgebraVector,
    conv: &MetricConvention,
) -> Result<f64> {
    let gram = x.inner(x) * y.inner(y) - x.inner(y).powi(2);
    if gram < DEGENERATE_PLANE_TOL {
        return Err(Error::DegeneratePlane { det: gram });
    }
    let b = bracket(x, y, conv);
    Ok(0.25 * b.inner(&b) / gram)
}
