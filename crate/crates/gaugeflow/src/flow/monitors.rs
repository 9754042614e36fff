//! Trajectory-level reports: the exact area law and the a-priori
//! pinching/extinction bound.

use super::profile::{profile_flow_solve, AxisymmetricProfile, ProfileFlowConfig};
use super::Trajectory;
use crate::error::{Error, Result};

/// Result of checking dA/dt = −∫H²dμ along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct VolumeLawReport {
    /// max over interior samples of |dA/dt + ∫H²dμ| relative to the larger
    /// of the two magnitudes.
    pub max_rel_deviation: f64,
    pub samples_checked: usize,
}

/// Compare the centered-difference area derivative against −∫H²dμ at every
/// interior sample. Sample spacing may be nonuniform (the last interval of a
/// run usually is); the three-point formula used is exact on quadratics.
/// Trajectories with fewer than three samples yield a vacuous (0, 0) report.
pub fn volume_law_check(traj: &Trajectory) -> VolumeLawReport {
    let s = &traj.samples;
    if s.len() < 3 {
        return VolumeLawReport {
            max_rel_deviation: 0.0,
            samples_checked: 0,
        };
    }
    let mut worst = 0.0f64;
    for i in 1..s.len() - 1 {
        let (t1, a1) = (s[i - 1].t, s[i - 1].monitor.volume);
        let (t2, a2) = (s[i].t, s[i].monitor.volume);
        let (t3, a3) = (s[i + 1].t, s[i + 1].monitor.volume);
        let dadt = a1 * (t2 - t3) / ((t1 - t2) * (t1 - t3))
            + a2 * (2.0 * t2 - t1 - t3) / ((t2 - t1) * (t2 - t3))
            + a3 * (t2 - t1) / ((t3 - t1) * (t3 - t2));
        let rhs = -s[i].int_h2;
        let scale = dadt.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((dadt - rhs).abs() / scale);
    }
    VolumeLawReport {
        max_rel_deviation: worst,
        samples_checked: s.len() - 2,
    }
}

/// Least-squares slope of ln(deviation) against ln(grid step) for the area
/// law under joint (h, dt) refinement of an even-mode perturbed sphere; dt
/// is slaved to h² through the CFL bound, so the fit probes both. Second
/// order means a slope near 2.
pub fn volume_law_refinement(
    r0: f64,
    amplitude: f64,
    r_stop: f64,
    grid_sizes: &[usize],
) -> Result<f64> {
    if grid_sizes.len() < 2 {
        return Err(Error::Config(
            "refinement fit needs at least two grid sizes".into(),
        ));
    }
    let mut points = Vec::with_capacity(grid_sizes.len());
    for &n in grid_sizes {
        let p = AxisymmetricProfile::from_fn(n, |psi| r0 + amplitude * (2.0 * psi).cos())?;
        let cfg = ProfileFlowConfig {
            sample_every: 64,
            r_stop,
            ..ProfileFlowConfig::default()
        };
        let run = profile_flow_solve(&p, &cfg)?;
        let report = volume_law_check(&run.trajectory);
        if report.samples_checked < 2 || !(report.max_rel_deviation > 0.0) {
            return Err(Error::IncompleteRun(format!(
                "no usable deviation at n = {n}"
            )));
        }
        let h = std::f64::consts::PI / (n - 1) as f64;
        points.push((h.ln(), report.max_rel_deviation.ln()));
    }
    let m = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - xbar) * (p.0 - xbar)).sum();
    Ok(num / den)
}

/// Extinction-time report against the a-priori bound T ≤ n/(2·min H₀²),
/// n = 2, with the roundness and pinching state at the final sample.
#[derive(Debug, Clone, Copy)]
pub struct PinchingReport {
    pub extinction_time: f64,
    /// n/(2·(min H₀)²) with n = 2; +inf when the start is minimal (H₀ = 0).
    pub bound: f64,
    pub pass: bool,
    pub final_ratio: f64,
    pub final_psi_delta: f64,
}

/// Build the report from a completed run.
///
/// delta must match the exponent the trajectory's monitors were sampled
/// with. Errors: IncompleteRun if the trajectory never reached its floor;
/// PreconditionViolated on a delta mismatch.
pub fn pinching_extinction_report(traj: &Trajectory, delta: f64) -> Result<PinchingReport> {
    if (delta - traj.delta).abs() > 1e-15 {
        return Err(Error::PreconditionViolated(format!(
            "report delta {delta} does not match the trajectory's sampling delta {}",
            traj.delta
        )));
    }
    let extinction_time = traj.extinction.ok_or_else(|| {
        Error::IncompleteRun("trajectory was truncated before reaching its extinction floor".into())
    })?;
    let first = traj
        .samples
        .first()
        .ok_or_else(|| Error::IncompleteRun("trajectory holds no samples".into()))?;
    let last = traj.samples.last().expect("nonempty by the line above");
    let h0 = first.monitor.h_min;
    let bound = if h0 == 0.0 {
        f64::INFINITY
    } else {
        2.0 / (2.0 * h0 * h0)
    };
    Ok(PinchingReport {
        extinction_time,
        bound,
        pass: extinction_time <= bound,
        final_ratio: last.monitor.ratio,
        final_psi_delta: last.monitor.psi_delta_max,
    })
}
