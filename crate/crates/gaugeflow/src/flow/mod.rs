//! Mean curvature flow in the round 3-sphere base.
//!
//! The infinite-dimensional flow upstairs is represented solely by its base
//! projection: the correspondence between the two is structural (the
//! projection intertwines the flows), so everything here lives on
//! hypersurfaces of the base. Two modes: an exact ODE for geodesic spheres
//! and an axisymmetric radial-graph PDE for convex rotationally symmetric
//! surfaces, instrumented with the monitors the qualitative theory bounds.

mod monitors;
mod profile;
mod sphere;
mod suite;

pub use monitors::{
    pinching_extinction_report, volume_law_check, volume_law_refinement, PinchingReport,
    VolumeLawReport,
};
pub use profile::{
    convexity_certificate, monitors_profile, profile_flow_solve, profile_flow_step,
    profile_geometry, AxisymmetricProfile, ProfileFlowConfig, ProfileGeometry, ProfileRun,
};
pub use sphere::{
    monitors_sphere, sphere_area, sphere_flow_solve, sphere_flow_step, sphere_mean_curvature,
    SphereFlowState,
};
pub use suite::{seeded_convex_profile, run_profile_suite, SuiteRunReport};

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};

/// Default exponent in the pinching quantity psi_delta.
pub const DEFAULT_DELTA: f64 = 0.25;

/// Coefficient b in the gradient-estimate monitor |grad H|^2 - b H^4.
pub const GRADIENT_MONITOR_B: f64 = 0.01;

/// Radius below which a sphere flow counts as extinct.
pub const R_FLOOR: f64 = 1e-8;

/// Extinction floor for axisymmetric profile runs. The radial graph's metric
/// determinant scales like r⁴; below roughly 5.6e-4 it crosses the 1e-12
/// degeneracy guard, so profile runs stop here (det still 16x the guard) and
/// extrapolate the remaining ~r²/4 of flow time.
pub const PROFILE_R_FLOOR: f64 = 2e-3;

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

/// Scalar monitors of one flow snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorVector {
    pub h_min: f64,
    pub h_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// max over nodes of the pointwise principal-curvature ratio
    /// max(λ1,λ2)/min(λ1,λ2); the quantity Lemma-9.5-style pinching bounds.
    /// Distinct from lambda_max/lambda_min, whose extrema may sit at
    /// different nodes.
    pub lambda_ratio_max: f64,
    /// max over the surface of (|A|² − H²/n)/H^{2−δ}, n = 2.
    pub psi_delta_max: f64,
    pub grad_h_sq_max: f64,
    /// Surface area (the 2-dimensional volume).
    pub volume: f64,
    /// H_max/H_min, the roundness defect.
    pub ratio: f64,
}

/// Strict-convexity certificate at one snapshot: A ≥ epsilon·H·id, together
/// with the structural constant of the horizontal convexity condition, which
/// vanishes identically for this base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCertificate {
    pub epsilon: f64,
    pub l_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Sphere,
    Profile,
}

/// One recorded snapshot of a flow.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    /// Geodesic radius for sphere mode; max radial value for profile mode.
    pub radius: f64,
    /// Profile snapshot fingerprint (profile mode only).
    pub profile_hash: Option<String>,
    pub monitor: MonitorVector,
    /// ∫ H² dμ at this snapshot.
    pub int_h2: f64,
    /// max over the surface of |grad H|² − b·H⁴ (b = GRADIENT_MONITOR_B).
    pub gradient_gap_max: f64,
}

/// A completed or truncated flow run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub kappa: f64,
    pub delta: f64,
    pub samples: Vec<TrajectorySample>,
    /// Extrapolated extinction time, if the run reached its floor.
    pub extinction: Option<f64>,
}

impl Trajectory {
    /// CSV columns: t, r_or_profile_hash, H_min, H_max, ratio, lambda_min,
    /// psi_delta_max, grad_H_sq_max, area, int_H2.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,r_or_profile_hash,H_min,H_max,ratio,lambda_min,psi_delta_max,grad_H_sq_max,area,int_H2\n",
        );
        for s in &self.samples {
            let ident = match &s.profile_hash {
                Some(h) => h.clone(),
                None => format!("{:.16e}", s.radius),
            };
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t,
                ident,
                s.monitor.h_min,
                s.monitor.h_max,
                s.monitor.ratio,
                s.monitor.lambda_min,
                s.monitor.psi_delta_max,
                s.monitor.grad_h_sq_max,
                s.monitor.volume,
                s.int_h2,
            ));
        }
        out
    }
}

/// Fingerprint of a profile's radial values, stable across runs.
pub(crate) fn profile_fingerprint(r: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in r {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Extinction time from the last three recorded (t, r) states: quadratic
/// extrapolation of r², which is asymptotically linear in time near
/// collapse, to its root.
pub(crate) fn extrapolate_extinction(last: &[(f64, f64)]) -> f64 {
    assert!(last.len() >= 2, "need at least two states");
    let pts: Vec<(f64, f64)> = last
        .iter()
        .rev()
        .take(3)
        .rev()
        .map(|&(t, r)| (t, r * r))
        .collect();
    let (t_end, y_end) = *pts.last().expect("non-empty");
    // Divided differences for the quadratic y(t).
    let d01 = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
    let (slope, curv) = if pts.len() == 3 {
        let d12 = (pts[2].1 - pts[1].1) / (pts[2].0 - pts[1].0);
        let c = (d12 - d01) / (pts[2].0 - pts[0].0);
        // y'(t_end)
        (d12 + c * (pts[2].0 - pts[1].0), c)
    } else {
        (d01, 0.0)
    };
    if !(slope < 0.0) {
        return t_end; // flow stalled at the floor; treat as extinct now
    }
    // Smallest positive root of y_end + slope·dt + curv·dt², in the
    // cancellation-free form q = (−slope + √disc)/2, dt = y_end/q, which is
    // continuous in the curv → 0 (linear) limit.
    let disc = slope * slope - 4.0 * curv * y_end;
    let dt = if disc >= 0.0 {
        y_end / (0.5 * (-slope + disc.sqrt()))
    } else {
        -y_end / slope
    };
    t_end + dt.max(0.0)
}
