//! Closed-surface divergence identity, checked by direct quadrature on a
//! geodesic sphere of radius r (or a cyclic quotient of one) in polar
//! coordinates (psi, theta) about the first imaginary axis: the induced
//! metric is sn(r)^2 (dpsi^2 + sin^2 psi dtheta^2) with
//! sn(r) = sin(sqrt(kappa) r)/sqrt(kappa), so dv = sn^2 sin(psi) dpsi dtheta.
//!
//! The integrand is the analytic surface divergence of the field:
//! for the tangential part of an ambient Killing field K the identity
//! div_M(K_T) = -H <K, nu> holds because div_M K vanishes by antisymmetry;
//! for gradient fields the divergence is the Laplace-Beltrami of f, and for
//! f = f(psi) the area factor cancels to (sin(psi) f'(psi))' up to the
//! theta measure.

use crate::error::{Error, Result};
use crate::su2::{quaternion_multiply, GroupElement};

/// Analytic tangent fields on the geodesic sphere used by the identity
/// check. Gradient variants are axisymmetric, hence well defined on every
/// cyclic quotient; the Killing variant descends only when its axis is the
/// quotient's rotation axis (the first imaginary direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereVectorField {
    Zero,
    /// Tangential projection of q -> xi q, xi the pure-imaginary axis.
    KillingTangent { axis: [f64; 3] },
    /// grad of f = cos(psi).
    GradientCosPsi,
    /// grad of f = cos(2 psi).
    GradientCos2Psi,
}

impl SphereVectorField {
    /// Axisymmetric fields descend to any cyclic quotient; a Killing field
    /// only if it rotates about the quotient axis.
    fn descends_to_quotient(&self) -> bool {
        match self {
            SphereVectorField::KillingTangent { axis } => {
                axis[1] == 0.0 && axis[2] == 0.0
            }
            _ => true,
        }
    }
}

/// Quadrature value of the divergence integral over the (quotient) sphere.
/// Trapezoid rule in psi, periodic trapezoid in theta over one fundamental
/// domain [0, 2 pi / quotient_order).
pub fn divergence_theorem_check(
    x0: &GroupElement,
    r: f64,
    kappa: f64,
    field: &SphereVectorField,
    n_psi: usize,
    n_theta: usize,
    quotient_order: usize,
) -> Result<f64> {
    crate::flow::check_kappa(kappa)?;
    let sk = kappa.sqrt();
    if !(r > 0.0 && r < std::f64::consts::PI / sk) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            lo: 0.0,
            hi: std::f64::consts::PI / sk,
        });
    }
    if n_psi < 3 || n_theta < 3 {
        return Err(Error::PreconditionViolated(format!(
            "quadrature grid {n_psi} x {n_theta} too small"
        )));
    }
    if quotient_order == 0 {
        return Err(Error::PreconditionViolated(
            "quotient order must be positive".into(),
        ));
    }
    if quotient_order > 1 && !field.descends_to_quotient() {
        return Err(Error::PreconditionViolated(
            "field does not descend to the quotient: Killing axis must be the rotation axis"
                .into(),
        ));
    }

    let radius = 1.0 / sk;
    let (s, c) = (sk * r).sin_cos();
    let sn = s / sk;
    // Inward-positive mean curvature of the geodesic sphere.
    let h_surf = 2.0 * sk * c / s;
    let q0 = x0.components();

    let h_psi = std::f64::consts::PI / (n_psi - 1) as f64;
    let theta_period = 2.0 * std::f64::consts::PI / quotient_order as f64;
    let h_theta = theta_period / n_theta as f64;

    let mut integral = 0.0;
    for i in 0..n_psi {
        let psi = if i == n_psi - 1 {
            std::f64::consts::PI
        } else {
            i as f64 * h_psi
        };
        let w_psi = if i == 0 || i == n_psi - 1 { 0.5 } else { 1.0 };
        let (sin_psi, cos_psi) = psi.sin_cos();

        match field {
            SphereVectorField::Zero => {}
            SphereVectorField::KillingTangent { axis } => {
                let xi = [0.0, axis[0], axis[1], axis[2]];
                let dv_psi = sn * sn * sin_psi;
                for j in 0..n_theta {
                    let theta = j as f64 * h_theta;
                    let (sin_t, cos_t) = theta.sin_cos();
                    let d = [cos_psi, sin_psi * cos_t, sin_psi * sin_t];
                    let qd = quaternion_multiply(q0, [0.0, d[0], d[1], d[2]]);
                    let point = [
                        radius * (c * q0[0] + s * qd[0]),
                        radius * (c * q0[1] + s * qd[1]),
                        radius * (c * q0[2] + s * qd[2]),
                        radius * (c * q0[3] + s * qd[3]),
                    ];
                    let nu = [
                        -s * q0[0] + c * qd[0],
                        -s * q0[1] + c * qd[1],
                        -s * q0[2] + c * qd[2],
                        -s * q0[3] + c * qd[3],
                    ];
                    let k_field = quaternion_multiply(xi, point);
                    let k_dot_nu = k_field[0] * nu[0]
                        + k_field[1] * nu[1]
                        + k_field[2] * nu[2]
                        + k_field[3] * nu[3];
                    let div = -h_surf * k_dot_nu;
                    integral += div * dv_psi * w_psi * h_psi * h_theta;
                }
            }
            SphereVectorField::GradientCosPsi | SphereVectorField::GradientCos2Psi => {
                // div grad f = ((sin psi) f')' / (sn^2 sin psi); the volume
                // element sn^2 sin psi cancels it exactly, including at the
                // poles where both factors vanish.
                let g = match field {
                    SphereVectorField::GradientCosPsi => {
                        // f' = -sin psi: (sin psi f')' = -sin(2 psi).
                        -(2.0 * psi).sin()
                    }
                    _ => {
                        // f' = -2 sin(2 psi):
                        // (sin psi f')' = -2 (cos psi sin 2psi + 2 sin psi cos 2psi).
                        -2.0 * (cos_psi * (2.0 * psi).sin()
                            + 2.0 * sin_psi * (2.0 * psi).cos())
                    }
                };
                integral += g * w_psi * h_psi * theta_period;
            }
        }
    }
    Ok(integral)
}
