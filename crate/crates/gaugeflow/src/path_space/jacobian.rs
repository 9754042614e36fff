//! Differential of the transport map, its kernel, and the horizontal
//! splitting of the discrete connection space.

use super::{gauge::parallel_transport, DiscretePath};
use crate::error::{Error, Result};
use crate::su2::{log_group, MetricConvention};
use nalgebra::{DMatrix, DVector};

/// Finite-difference step for the transport Jacobian.
const FD_STEP: f64 = 1e-6;

/// Differential of the transport map at u as a 3 x 3m matrix: column (i, c)
/// is the central difference of log(phi(u') phi(u)^{-1}) under perturbation
/// of coordinate c of segment i, i.e. the right-trivialized tangent at
/// phi(u) in working components.
pub fn transport_jacobian(u: &DiscretePath, conv: &MetricConvention) -> DMatrix<f64> {
    let n = 3 * u.m();
    let base_inv = parallel_transport(u, conv).inverse();
    let coords = u.coords();
    let mut jac = DMatrix::zeros(3, n);
    let mut work = coords.clone();
    for j in 0..n {
        let mut col = [0.0; 3];
        for (sign, weight) in [(1.0, 0.5 / FD_STEP), (-1.0, -0.5 / FD_STEP)] {
            work[j] = coords[j] + sign * FD_STEP;
            let shifted = DiscretePath::from_coords(u.a(), &work).expect("same shape");
            let log = log_group(&parallel_transport(&shifted, conv).multiply(&base_inv), conv)
                .expect("transport perturbation stays near the base point");
            for (c, l) in col.iter_mut().zip(log.0) {
                *c += weight * l;
            }
        }
        work[j] = coords[j];
        for c in 0..3 {
            jac[(c, j)] = col[c];
        }
    }
    jac
}

/// Rank of the transport differential by singular-value count.
pub fn transport_rank(u: &DiscretePath, conv: &MetricConvention) -> usize {
    let jac = transport_jacobian(u, conv);
    let sv = jac.svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * max).count()
}

/// Applies the Jacobian to a path's coordinates.
fn apply(jac: &DMatrix<f64>, v: &DiscretePath) -> [f64; 3] {
    let out = jac * DVector::from_vec(v.coords());
    [out[0], out[1], out[2]]
}

/// Orthogonal projector onto the row space of the Jacobian (the horizontal
/// space). The L² weight (a/m) is a scalar multiple of the coordinate dot
/// product, so coordinate-orthogonal projection is L²-orthogonal too.
fn horizontal_coords(jac: &DMatrix<f64>, v: &DiscretePath) -> Vec<f64> {
    let jv = jac * DVector::from_vec(v.coords());
    let gram = jac * jac.transpose();
    let sol = gram
        .lu()
        .solve(&jv)
        .expect("transport differential is surjective");
    let h = jac.transpose() * sol;
    h.iter().cloned().collect()
}

/// Component of v orthogonal (in L²) to the kernel of the transport
/// differential at u. Idempotent; the differential is injective on its image.
pub fn horizontal_projection(
    u: &DiscretePath,
    v: &DiscretePath,
    conv: &MetricConvention,
) -> Result<DiscretePath> {
    if u.m() != v.m() {
        return Err(Error::DimensionMismatch {
            context: "base point and vector segment counts differ",
            expected: u.m(),
            got: v.m(),
        });
    }
    let jac = transport_jacobian(u, conv);
    DiscretePath::from_coords(u.a(), &horizontal_coords(&jac, v))
}

/// Coordinate-orthonormal basis of the kernel of the transport differential
/// at u (the tangent space of the fibre through u), as columns.
pub fn vertical_basis(u: &DiscretePath, conv: &MetricConvention) -> DMatrix<f64> {
    let n = 3 * u.m();
    let jac = transport_jacobian(u, conv);
    let gram = jac.transpose() * (&jac * &jac.transpose()).try_inverse().expect("full rank") * &jac;
    let projector = DMatrix::identity(n, n) - gram;
    let qr = projector.col_piv_qr();
    let q = qr.q();
    let r = qr.r();
    let rmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rank = (0..n).filter(|&i| r[(i, i)].abs() > 1e-6 * rmax).count();
    q.columns(0, rank).into_owned()
}

/// |<dphi h1, dphi h2> - <h1, h2>_0| after projecting both test vectors
/// horizontally at u. In working components the two sides agree up to the
/// factor a (exactly 1 at the default a = 1) and a discretization error that
/// vanishes quadratically in the segment width.
pub fn submersion_isometry_residual(
    u: &DiscretePath,
    v: &DiscretePath,
    w: &DiscretePath,
    conv: &MetricConvention,
) -> Result<f64> {
    let jac = transport_jacobian(u, conv);
    let h1 = DiscretePath::from_coords(u.a(), &horizontal_coords(&jac, v))?;
    let h2 = DiscretePath::from_coords(u.a(), &horizontal_coords(&jac, w))?;
    let d1 = apply(&jac, &h1);
    let d2 = apply(&jac, &h2);
    let lhs = d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2];
    let rhs = h1.inner_l2(&h2)?;
    Ok((lhs - rhs).abs())
}
