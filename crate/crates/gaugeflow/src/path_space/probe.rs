//! Shape-operator probe for the fibres of the transport map.
//!
//! The fibre through u is the level set phi(v) = phi(u). For a fixed algebra
//! direction w, the scalar f_w(v) = <log(phi(v) phi(u)^{-1}), w> vanishes
//! identically on the fibre, so the classical level-set identity
//! II_nu = -Hess f_w / |grad f_w| is exact on the fibre's tangent space, with
//! nu the unit normal along grad f_w. The probe eigendecomposes the shape
//! operator and returns the paired partial trace (i-th largest plus i-th
//! smallest), the discrete stand-in for a regularized trace.

use super::{
    gauge::parallel_transport,
    jacobian::vertical_basis,
    BoundarySubgroup, DiscretePath,
};
use crate::error::{Error, Result};
use crate::su2::{log_group, AlgebraVector, MetricConvention};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Step for the second differences of f_w along fibre directions. With unit
/// basis vectors the truncation error h² and the rounding floor eps/h² meet
/// near 1e-3.
const HESS_STEP: f64 = 1e-3;

/// Step for the first differences giving |grad f_w|.
const GRAD_STEP: f64 = 1e-6;

/// Paired partial trace of the fibre's shape operator at u, in the fixed
/// unit normal direction obtained by right-translating the first basis
/// vector to phi(u).
///
/// The boundary regime selects which global family of fibres (full, based,
/// or two-sided quotient) the probe is read against; a finite covering is a
/// local isometry, so the local spectrum computed here is the same in every
/// mode. The parameter is validated and recorded, not branched on.
pub fn fibre_mean_curvature_probe(
    u: &DiscretePath,
    _mode: &BoundarySubgroup,
    trunc: usize,
    conv: &MetricConvention,
) -> Result<f64> {
    let m = u.m();
    let dim = 3 * m - 3;
    if trunc == 0 {
        return Ok(0.0);
    }
    if 2 * trunc > dim {
        return Err(Error::TruncationTooLarge { trunc, dim });
    }

    let normal = AlgebraVector([1.0, 0.0, 0.0]);
    let base_inv = parallel_transport(u, conv).inverse();
    let coords = u.coords();
    let f = |delta: &[f64]| -> f64 {
        let shifted: Vec<f64> = coords.iter().zip(delta).map(|(c, d)| c + d).collect();
        let path = DiscretePath::from_coords(u.a(), &shifted).expect("same shape");
        let log = log_group(&parallel_transport(&path, conv).multiply(&base_inv), conv)
            .expect("probe perturbations stay near phi(u)");
        log.inner(&normal)
    };

    // |grad f|_0: Euclidean coordinate gradient, dualized by the (a/m)
    // weight of the L² metric.
    let n = 3 * m;
    let grad_norm_sq: f64 = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut delta = vec![0.0; n];
            delta[j] = GRAD_STEP;
            let fp = f(&delta);
            delta[j] = -GRAD_STEP;
            let fm = f(&delta);
            let g = (fp - fm) / (2.0 * GRAD_STEP);
            g * g
        })
        .sum();
    let grad_norm = (m as f64 / u.a() * grad_norm_sq).sqrt();

    let basis = vertical_basis(u, conv);
    debug_assert_eq!(basis.ncols(), dim);
    let column = |k: usize| -> Vec<f64> { basis.column(k).iter().cloned().collect() };

    // Hessian of f in the fibre basis by central second differences;
    // f(u) = 0 exactly, which the diagonal formula uses.
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|k| {
            let tk = column(k);
            let mut row = vec![0.0; dim];
            let mut delta = vec![0.0; n];
            let h = HESS_STEP;
            for (d, t) in delta.iter_mut().zip(&tk) {
                *d = h * t;
            }
            let fp = f(&delta);
            for (d, t) in delta.iter_mut().zip(&tk) {
                *d = -h * t;
            }
            let fm = f(&delta);
            row[k] = (fp + fm) / (h * h);
            for l in (k + 1)..dim {
                let tl = column(l);
                let mut quad = 0.0;
                for (sk, sl, w) in [
                    (h, h, 1.0),
                    (h, -h, -1.0),
                    (-h, h, -1.0),
                    (-h, -h, 1.0),
                ] {
                    for ((d, a), b) in delta.iter_mut().zip(&tk).zip(&tl) {
                        *d = sk * a + sl * b;
                    }
                    quad += w * f(&delta);
                }
                row[l] = quad / (4.0 * h * h);
            }
            row
        })
        .collect();

    // The basis is coordinate-orthonormal, so converting the bilinear form
    // to the L²-self-adjoint operator multiplies by (m/a).
    let scale = -(m as f64 / u.a()) / grad_norm;
    let mut shape = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        for l in k..dim {
            let v = scale * rows[k][l];
            shape[(k, l)] = v;
            shape[(l, k)] = v;
        }
    }

    let mut eig: Vec<f64> = shape
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    eig.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok((0..trunc).map(|i| eig[i] + eig[dim - 1 - i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_space::BoundaryMode;

    fn conv() -> MetricConvention {
        MetricConvention::default()
    }

    #[test]
    fn paired_trace_vanishes_at_the_zero_connection() {
        // Reversing the path and flipping signs is an isometry of the fibre
        // through 0 fixing it, so the spectrum is symmetric and pairs cancel.
        let u = DiscretePath::zero(1.0, 64).unwrap();
        let v = fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 20, &conv()).unwrap();
        assert!(v.abs() <= 1e-3, "paired trace {v}");
    }

    #[test]
    fn truncation_zero_gives_zero() {
        let u = DiscretePath::zero(1.0, 8).unwrap();
        let v = fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 0, &conv()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn oversized_truncation_is_rejected() {
        let u = DiscretePath::zero(1.0, 8).unwrap();
        // dim = 21, so 11 pairs cannot be formed.
        assert!(matches!(
            fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 11, &conv()),
            Err(Error::TruncationTooLarge { trunc: 11, dim: 21 })
        ));
        assert!(
            fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 10, &conv()).is_ok()
        );
    }

    #[test]
    fn mode_does_not_change_the_local_spectrum() {
        let u = DiscretePath::zero(1.0, 16).unwrap();
        let full = fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 5, &conv()).unwrap();
        let based =
            fibre_mean_curvature_probe(&u, &BoundarySubgroup::based(), 5, &conv()).unwrap();
        let gamma = BoundarySubgroup::cyclic(4, BoundaryMode::GammaPair).unwrap();
        let quot = fibre_mean_curvature_probe(&u, &gamma, 5, &conv()).unwrap();
        assert_eq!(full, based);
        assert_eq!(full, quot);
    }

    #[test]
    fn probe_stays_small_off_zero() {
        // Exploratory: small |value| is expected at moderate amplitude, not
        // proved; keep the tolerance loose and the path gentle.
        let u = DiscretePath::from_fn(1.0, 32, |s| {
            AlgebraVector([
                0.3 * (2.0 * std::f64::consts::PI * s).sin(),
                0.2 * (2.0 * std::f64::consts::PI * s).cos(),
                0.1,
            ])
        })
        .unwrap();
        let v = fibre_mean_curvature_probe(&u, &BoundarySubgroup::full(), 10, &conv()).unwrap();
        assert!(v.abs() <= 5e-2, "paired trace {v}");
    }
}
