//! Axisymmetric radial-graph mode of the flow.
//!
//! Hypersurfaces are graphs exp_{x0}(r(ψ)·ν(ψ,θ)) over the unit sphere of
//! directions at a base point x0, rotationally symmetric in θ, in the ambient
//! metric dρ² + sn(ρ)²·g_{S²} with sn(ρ) = sin(√kappa·ρ)/√kappa. Writing
//! cn = sn' and W2 = (∂r/∂ψ)² + sn(r)², the principal curvatures (inward
//! convention) of the graph are
//!
//! ```text
//! λ₁ = (−sn·r'' + sn²·cn + 2·(r')²·cn) / W2^{3/2}        (profile direction)
//! λ₂ = (sn·cn − r'·cot ψ) / (sn·√W2)                      (rotation direction)
//! ```
//!
//! and mean curvature flow in the radial-graph gauge moves the graph value at
//! fixed ψ with the normal-projection correction factor √W2/sn:
//!
//! ```text
//! ∂r/∂t = −(√W2/sn)·(λ₁ + λ₂).
//! ```
//!
//! At the poles smooth caps force ∂r/∂ψ = 0 (Neumann); the one-sided
//! second-order stencil r''(0) = 2(r(h) − r(0))/h² implements it, λ₂ → λ₁
//! there, and the correction factor degenerates to 1. On constant profiles
//! every finite difference vanishes identically, so the mode reproduces the
//! geodesic-sphere ODE exactly (the calibration used in the tests).

use super::{
    check_kappa, extrapolate_extinction, profile_fingerprint, ConvexityCertificate, FlowKind,
    MonitorVector, Trajectory, TrajectorySample, DEFAULT_DELTA, GRADIENT_MONITOR_B,
    PROFILE_R_FLOOR,
};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Threshold on the reduced metric determinant W2·sn² below which the graph
/// counts as degenerate.
const DET_FLOOR: f64 = 1e-12;

/// An axisymmetric radial graph sampled on the uniform grid ψ_i = i·π/(n−1).
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymmetricProfile {
    r: Vec<f64>,
}

impl AxisymmetricProfile {
    /// Wrap per-node radial values. Values must be finite and positive; the
    /// kappa-dependent upper bound r < π/√kappa is enforced where kappa is
    /// known (geometry evaluation). Pole regularity is imposed by the
    /// evaluation stencils rather than validated on input.
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 5 {
            return Err(Error::PreconditionViolated(format!(
                "profile needs at least 5 nodes, got {}",
                r.len()
            )));
        }
        for &v in &r {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::OutOfRange {
                    name: "r",
                    value: v,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
        Ok(Self { r })
    }

    /// Sample r(ψ) on n_psi uniform nodes.
    pub fn from_fn(n_psi: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = PI / (n_psi.max(2) - 1) as f64;
        Self::new((0..n_psi).map(|i| f(i as f64 * h)).collect())
    }

    pub fn n_psi(&self) -> usize {
        self.r.len()
    }

    pub fn h_step(&self) -> f64 {
        PI / (self.r.len() - 1) as f64
    }

    pub fn psi(&self, i: usize) -> f64 {
        i as f64 * self.h_step()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn r_max(&self) -> f64 {
        self.r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Snapshot CSV with columns (psi, r).
    pub fn to_snapshot_csv(&self) -> String {
        let mut out = String::from("psi,r\n");
        for (i, &v) in self.r.iter().enumerate() {
            out.push_str(&format!("{:.16e},{:.16e}\n", self.psi(i), v));
        }
        out
    }
}

/// Per-node curvature data of a profile, plus the integrated quantities the
/// monitors and the time stepper need.
#[derive(Debug, Clone)]
pub struct ProfileGeometry {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// Mean curvature λ₁ + λ₂ per node.
    pub h: Vec<f64>,
    /// Radial-graph velocity −(√W2/sn)·H per node.
    pub speed: Vec<f64>,
    /// Squared intrinsic gradient ‖grad H‖² = (∂H/∂ψ)²/W2 per node.
    pub grad_h_sq: Vec<f64>,
    /// sn·√W2·sin ψ; area = 2π ∫ area_element dψ.
    pub area_element: Vec<f64>,
    pub area: f64,
    pub int_h2: f64,
    /// Largest parabolic diffusivity (1/W2 interior, 2/sn² at poles); the
    /// explicit-Euler CFL bound is 0.4·h²/max_diffusivity.
    pub max_diffusivity: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    w2: Vec<f64>,
    sn: Vec<f64>,
}

impl ProfileGeometry {
    fn empty() -> Self {
        Self {
            lambda1: Vec::new(),
            lambda2: Vec::new(),
            h: Vec::new(),
            speed: Vec::new(),
            grad_h_sq: Vec::new(),
            area_element: Vec::new(),
            area: 0.0,
            int_h2: 0.0,
            max_diffusivity: 0.0,
            h_min: f64::INFINITY,
            h_max: f64::NEG_INFINITY,
            lambda_min: f64::INFINITY,
            lambda_max: f64::NEG_INFINITY,
            w2: Vec::new(),
            sn: Vec::new(),
        }
    }
}

/// Fixed-grid trigonometric tables, reused across time steps.
struct PsiTables {
    sin_psi: Vec<f64>,
    cot_psi: Vec<f64>,
    h_step: f64,
}

impl PsiTables {
    fn new(n: usize) -> Self {
        let h_step = PI / (n - 1) as f64;
        let mut sin_psi = Vec::with_capacity(n);
        let mut cot_psi = Vec::with_capacity(n);
        for i in 0..n {
            let psi = i as f64 * h_step;
            let (s, c) = psi.sin_cos();
            sin_psi.push(s);
            cot_psi.push(if i == 0 || i == n - 1 { 0.0 } else { c / s });
        }
        Self {
            sin_psi,
            cot_psi,
            h_step,
        }
    }
}

fn compute_geometry(
    r: &[f64],
    kappa: f64,
    tables: &PsiTables,
    g: &mut ProfileGeometry,
) -> Result<()> {
    let n = r.len();
    let h_step = tables.h_step;
    let rk = kappa.sqrt();
    let hi = PI / rk;
    for v in [
        &mut g.lambda1,
        &mut g.lambda2,
        &mut g.h,
        &mut g.speed,
        &mut g.grad_h_sq,
        &mut g.area_element,
        &mut g.w2,
        &mut g.sn,
    ] {
        v.clear();
        v.resize(n, 0.0);
    }
    g.max_diffusivity = 0.0;
    for i in 0..n {
        let ri = r[i];
        if !(ri > 0.0 && ri < hi * (1.0 - 1e-9)) || !ri.is_finite() {
            return Err(Error::OutOfRange {
                name: "r",
                value: ri,
                lo: 0.0,
                hi,
            });
        }
        let (s, cn) = (rk * ri).sin_cos();
        let sn = s / rk;
        let (rp, rpp) = if i == 0 {
            (0.0, 2.0 * (r[1] - r[0]) / (h_step * h_step))
        } else if i == n - 1 {
            (0.0, 2.0 * (r[n - 2] - r[n - 1]) / (h_step * h_step))
        } else {
            (
                (r[i + 1] - r[i - 1]) / (2.0 * h_step),
                (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (h_step * h_step),
            )
        };
        let w2 = rp * rp + sn * sn;
        if w2 * sn * sn < DET_FLOOR {
            return Err(Error::SingularProfile { r: ri, node: i });
        }
        let w = w2.sqrt();
        let lambda1 = (-sn * rpp + sn * sn * cn + 2.0 * rp * rp * cn) / (w2 * w);
        let lambda2 = if i == 0 || i == n - 1 {
            lambda1
        } else {
            (sn * cn - rp * tables.cot_psi[i]) / (sn * w)
        };
        let h = lambda1 + lambda2;
        g.sn[i] = sn;
        g.w2[i] = w2;
        g.lambda1[i] = lambda1;
        g.lambda2[i] = lambda2;
        g.h[i] = h;
        g.speed[i] = -(w / sn) * h;
        g.area_element[i] = sn * w * tables.sin_psi[i];
        let diff = if i == 0 || i == n - 1 {
            2.0 / (sn * sn)
        } else {
            1.0 / w2
        };
        g.max_diffusivity = g.max_diffusivity.max(diff);
    }
    // Intrinsic curvature gradient needs the completed H array.
    for i in 1..n - 1 {
        let hp = (g.h[i + 1] - g.h[i - 1]) / (2.0 * h_step);
        g.grad_h_sq[i] = hp * hp / g.w2[i];
    }
    g.grad_h_sq[0] = 0.0;
    g.grad_h_sq[n - 1] = 0.0;
    // Trapezoid in ψ, exact 2π in θ.
    let mut area = 0.0;
    let mut int_h2 = 0.0;
    for i in 0..n {
        let wgt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        area += wgt * g.area_element[i];
        int_h2 += wgt * g.h[i] * g.h[i] * g.area_element[i];
    }
    g.area = 2.0 * PI * h_step * area;
    g.int_h2 = 2.0 * PI * h_step * int_h2;
    g.h_min = g.h.iter().copied().fold(f64::INFINITY, f64::min);
    g.h_max = g.h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let l1 = g.lambda1.iter().copied();
    let l2 = g.lambda2.iter().copied();
    g.lambda_min = l1.clone().chain(l2.clone()).fold(f64::INFINITY, f64::min);
    g.lambda_max = l1.chain(l2).fold(f64::NEG_INFINITY, f64::max);
    Ok(())
}

/// Second-order finite-difference curvature of a profile.
///
/// Errors: OutOfRange if a node leaves (0, π/√kappa); SingularProfile if the
/// reduced metric determinant W2·sn² drops below 1e-12.
pub fn profile_geometry(p: &AxisymmetricProfile, kappa: f64) -> Result<ProfileGeometry> {
    check_kappa(kappa)?;
    let tables = PsiTables::new(p.n_psi());
    let mut g = ProfileGeometry::empty();
    compute_geometry(&p.r, kappa, &tables, &mut g)?;
    Ok(g)
}

fn monitor_of_geometry(g: &ProfileGeometry, delta: f64) -> (MonitorVector, f64) {
    debug_assert!(delta > 0.0 && delta <= 0.5, "delta contract: (0, 1/2]");
    let mut psi_max = f64::NEG_INFINITY;
    let mut gap_max = f64::NEG_INFINITY;
    let mut lr_max = f64::NEG_INFINITY;
    for i in 0..g.h.len() {
        let h = g.h[i];
        let d = g.lambda1[i] - g.lambda2[i];
        let psi = if h > 0.0 {
            d * d / (2.0 * h.powf(2.0 - delta))
        } else {
            f64::INFINITY
        };
        psi_max = psi_max.max(psi);
        gap_max = gap_max.max(g.grad_h_sq[i] - GRADIENT_MONITOR_B * h.powi(4));
        let (lo, hi) = if g.lambda1[i] <= g.lambda2[i] {
            (g.lambda1[i], g.lambda2[i])
        } else {
            (g.lambda2[i], g.lambda1[i])
        };
        lr_max = lr_max.max(if lo > 0.0 { hi / lo } else { f64::INFINITY });
    }
    let ratio = if g.h_min > 0.0 {
        g.h_max / g.h_min
    } else {
        f64::INFINITY
    };
    (
        MonitorVector {
            h_min: g.h_min,
            h_max: g.h_max,
            lambda_min: g.lambda_min,
            lambda_max: g.lambda_max,
            lambda_ratio_max: lr_max,
            psi_delta_max: psi_max,
            grad_h_sq_max: g
                .grad_h_sq
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            volume: g.area,
            ratio,
        },
        gap_max,
    )
}

/// Monitor snapshot of a profile. delta must lie in (0, 1/2]; nodes with
/// H ≤ 0 make the pinching monitor +inf (a blown monitor, not an error).
pub fn monitors_profile(
    p: &AxisymmetricProfile,
    kappa: f64,
    delta: f64,
) -> Result<MonitorVector> {
    let g = profile_geometry(p, kappa)?;
    Ok(monitor_of_geometry(&g, delta).0)
}

/// Strict-convexity certificate: the exact minimum over nodes of λ_min/H,
/// with the structural constant L ≡ 0 for this base.
pub fn convexity_certificate(p: &AxisymmetricProfile, kappa: f64) -> Result<ConvexityCertificate> {
    let g = profile_geometry(p, kappa)?;
    if g.lambda_min <= 0.0 {
        return Err(Error::NotConvex {
            lambda_min: g.lambda_min,
        });
    }
    let mut epsilon = f64::INFINITY;
    for i in 0..g.h.len() {
        epsilon = epsilon.min(g.lambda1[i].min(g.lambda2[i]) / g.h[i]);
    }
    Ok(ConvexityCertificate {
        epsilon,
        l_bound: 0.0,
    })
}

/// One explicit Euler step of the graph flow.
///
/// dt may be negative (time reversal, used to expose the smoothing direction
/// of the equation); the CFL guard applies to |dt| ≤ 0.4·h²/max_diffusivity.
/// Errors: LostConvexity if the input has λ_min ≤ 0; CflViolation on an
/// oversized step; geometry errors as in profile_geometry.
pub fn profile_flow_step(
    p: &AxisymmetricProfile,
    kappa: f64,
    dt: f64,
) -> Result<AxisymmetricProfile> {
    let g = profile_geometry(p, kappa)?;
    if g.lambda_min <= 0.0 {
        return Err(Error::LostConvexity {
            lambda_min: g.lambda_min,
        });
    }
    let bound = 0.4 * p.h_step() * p.h_step() / g.max_diffusivity;
    if !dt.is_finite() || dt.abs() > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let r_new: Vec<f64> = p
        .r
        .iter()
        .zip(&g.speed)
        .map(|(&r, &s)| r + dt * s)
        .collect();
    AxisymmetricProfile::new(r_new)
}

/// Driver settings for profile_flow_solve.
#[derive(Debug, Clone)]
pub struct ProfileFlowConfig {
    pub kappa: f64,
    /// Pinching exponent in (0, 1/2].
    pub delta: f64,
    /// Fraction of the CFL bound used per step, in (0, 1].
    pub safety: f64,
    /// Monitor sampling cadence in steps.
    pub sample_every: usize,
    /// Stop radius. The default sits above the metric-degeneracy guard; the
    /// remaining flow time (~r²/4) is supplied by extrapolation.
    pub r_stop: f64,
    /// Optional time horizon; reaching it truncates the run without an
    /// extinction time.
    pub t_end: Option<f64>,
    pub max_steps: usize,
    /// Optional profile snapshot cadence in steps.
    pub snapshot_every: Option<usize>,
}

impl Default for ProfileFlowConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            delta: DEFAULT_DELTA,
            safety: 0.9,
            sample_every: 256,
            r_stop: PROFILE_R_FLOOR,
            t_end: None,
            max_steps: 100_000_000,
            snapshot_every: None,
        }
    }
}

/// A completed profile run: monitored trajectory, optional profile
/// snapshots, and the terminal profile.
#[derive(Debug, Clone)]
pub struct ProfileRun {
    pub trajectory: Trajectory,
    pub snapshots: Vec<(f64, AxisymmetricProfile)>,
    pub final_profile: AxisymmetricProfile,
    pub steps: usize,
}

/// Integrate the graph flow with explicit Euler at a fixed fraction of the
/// CFL bound, sampling monitors on a step cadence and always recording the
/// terminal state. Terminates at r_stop (extinction time extrapolated from
/// the last three steps' max radius) or at t_end (no extinction time).
///
/// Step semantics match profile_flow_step exactly, including the per-step
/// LostConvexity guard on the input state.
pub fn profile_flow_solve(
    p0: &AxisymmetricProfile,
    cfg: &ProfileFlowConfig,
) -> Result<ProfileRun> {
    check_kappa(cfg.kappa)?;
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(Error::Config(format!(
            "CFL safety fraction must be in (0, 1], got {}",
            cfg.safety
        )));
    }
    if cfg.sample_every == 0 {
        return Err(Error::Config("sample_every must be >= 1".into()));
    }
    if !(cfg.r_stop > 0.0) {
        return Err(Error::Config(format!(
            "r_stop must be positive, got {}",
            cfg.r_stop
        )));
    }
    let n = p0.n_psi();
    let tables = PsiTables::new(n);
    let h_step = tables.h_step;
    let mut r = p0.r.clone();
    let mut g = ProfileGeometry::empty();
    let mut t = 0.0f64;
    let mut steps = 0usize;
    let mut samples: Vec<TrajectorySample> = Vec::new();
    let mut snapshots: Vec<(f64, AxisymmetricProfile)> = Vec::new();
    let mut recent: Vec<(f64, f64)> = Vec::new();
    let mut last_sampled_step = usize::MAX;
    let extinction = loop {
        compute_geometry(&r, cfg.kappa, &tables, &mut g)?;
        if g.lambda_min <= 0.0 {
            return Err(Error::LostConvexity {
                lambda_min: g.lambda_min,
            });
        }
        let r_max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if recent.len() == 3 {
            recent.remove(0);
        }
        recent.push((t, r_max));
        let terminal_floor = r_max <= cfg.r_stop;
        let terminal_time = cfg.t_end.is_some_and(|te| t >= te);
        if steps % cfg.sample_every == 0 || terminal_floor || terminal_time {
            if last_sampled_step != steps {
                let (monitor, gap) = monitor_of_geometry(&g, cfg.delta);
                samples.push(TrajectorySample {
                    t,
                    radius: r_max,
                    profile_hash: Some(profile_fingerprint(&r)),
                    monitor,
                    int_h2: g.int_h2,
                    gradient_gap_max: gap,
                });
                last_sampled_step = steps;
            }
        }
        if let Some(k) = cfg.snapshot_every {
            if steps % k == 0 || terminal_floor || terminal_time {
                snapshots.push((t, AxisymmetricProfile { r: r.clone() }));
            }
        }
        if terminal_floor {
            break Some(extrapolate_extinction(&recent));
        }
        if terminal_time {
            break None;
        }
        if steps >= cfg.max_steps {
            return Err(Error::IncompleteRun(format!(
                "max_steps = {} exhausted at t = {t}, r_max = {r_max}",
                cfg.max_steps
            )));
        }
        let dt = cfg.safety * 0.4 * h_step * h_step / g.max_diffusivity;
        for (ri, si) in r.iter_mut().zip(&g.speed) {
            *ri += dt * si;
        }
        t += dt;
        steps += 1;
    };
    Ok(ProfileRun {
        trajectory: Trajectory {
            kind: FlowKind::Profile,
            kappa: cfg.kappa,
            delta: cfg.delta,
            samples,
            extinction,
        },
        snapshots,
        final_profile: AxisymmetricProfile { r },
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{sphere_flow_step, sphere_mean_curvature, SphereFlowState};
    use std::f64::consts::FRAC_PI_4;

    fn ellipsoid(n: usize, a2: f64) -> AxisymmetricProfile {
        AxisymmetricProfile::from_fn(n, |psi| 0.6 + a2 * (2.0 * psi).cos()).unwrap()
    }

    #[test]
    fn constant_profile_matches_sphere_closed_form_exactly() {
        // Finite differences of a constant vanish identically, so there is
        // no O(h²) error at all on constant profiles.
        for (c, kappa, want_h) in [(FRAC_PI_4, 1.0, 2.0), (FRAC_PI_4 / 2.0, 4.0, 4.0)] {
            let p = AxisymmetricProfile::from_fn(101, |_| c).unwrap();
            let g = profile_geometry(&p, kappa).unwrap();
            for i in 0..p.n_psi() {
                assert!((g.h[i] - want_h).abs() <= 1e-12, "H[{i}] = {}", g.h[i]);
                assert!((g.lambda1[i] - 0.5 * want_h).abs() <= 1e-12);
                assert!((g.lambda2[i] - 0.5 * want_h).abs() <= 1e-12);
                assert_eq!(g.grad_h_sq[i], 0.0);
            }
            let want = sphere_mean_curvature(c, kappa).unwrap();
            assert!((g.h_max - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_profile_area_matches_geodesic_sphere() {
        let p = AxisymmetricProfile::from_fn(201, |_| FRAC_PI_4).unwrap();
        let g = profile_geometry(&p, 1.0).unwrap();
        let exact = crate::flow::sphere_area(FRAC_PI_4, 1.0);
        assert!(
            (g.area - exact).abs() <= 1e-3 * exact,
            "area = {}, exact = {exact}",
            g.area
        );
        assert!((g.int_h2 - 4.0 * exact).abs() <= 1e-3 * 4.0 * exact);
    }

    #[test]
    fn perturbation_oracle_stays_within_linearized_band() {
        // cos ψ is the translation mode of the sphere, so H is unchanged to
        // first order; the band is met with enormous margin.
        let p = AxisymmetricProfile::from_fn(201, |psi| FRAC_PI_4 + 1e-6 * psi.cos()).unwrap();
        let g = profile_geometry(&p, 1.0).unwrap();
        for i in 0..p.n_psi() {
            assert!(
                (g.h[i] - 2.0).abs() <= 1e-4,
                "H[{i}] = {} strays from 2",
                g.h[i]
            );
        }
        // A non-kernel mode must register: cos 2ψ genuinely bends H.
        let q = AxisymmetricProfile::from_fn(201, |psi| FRAC_PI_4 + 1e-3 * (2.0 * psi).cos())
            .unwrap();
        let gq = profile_geometry(&q, 1.0).unwrap();
        assert!(gq.h_max - gq.h_min > 1e-4);
    }

    #[test]
    fn degenerate_graph_is_rejected() {
        let p = AxisymmetricProfile::from_fn(51, |_| 1e-7).unwrap();
        assert!(matches!(
            profile_geometry(&p, 1.0),
            Err(Error::SingularProfile { .. })
        ));
        let q = AxisymmetricProfile::from_fn(51, |_| 3.141592653).unwrap();
        assert!(matches!(
            profile_geometry(&q, 1.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(AxisymmetricProfile::new(vec![0.5; 4]).is_err());
        assert!(AxisymmetricProfile::new(vec![0.5, 0.5, -0.1, 0.5, 0.5]).is_err());
        assert!(AxisymmetricProfile::new(vec![0.5, f64::NAN, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn constant_step_follows_sphere_ode() {
        let p = AxisymmetricProfile::from_fn(101, |_| FRAC_PI_4).unwrap();
        let dt = 5e-5;
        let stepped = profile_flow_step(&p, 1.0, dt).unwrap();
        // Still constant (all nodes move identically).
        let first = stepped.r()[0];
        for &v in stepped.r() {
            assert!((v - first).abs() <= 1e-15);
        }
        // Euler vs RK4 on the same ODE: O(dt²) apart.
        let s = SphereFlowState::new(0.0, FRAC_PI_4, 1.0).unwrap();
        let rk4 = sphere_flow_step(&s, dt).unwrap().r();
        assert!(
            (first - rk4).abs() <= 1e-7,
            "euler = {first}, rk4 = {rk4}"
        );
        // And the Euler update itself is exact for the constant mode.
        let exact_euler = FRAC_PI_4 - dt * 2.0;
        assert!((first - exact_euler).abs() <= 1e-15);
    }

    #[test]
    fn cfl_guard_fires_both_signs() {
        let p = ellipsoid(101, 0.05);
        let g = profile_geometry(&p, 1.0).unwrap();
        let bound = 0.4 * p.h_step() * p.h_step() / g.max_diffusivity;
        assert!(matches!(
            profile_flow_step(&p, 1.0, 1.01 * bound),
            Err(Error::CflViolation { .. })
        ));
        assert!(matches!(
            profile_flow_step(&p, 1.0, -1.01 * bound),
            Err(Error::CflViolation { .. })
        ));
        assert!(profile_flow_step(&p, 1.0, 0.99 * bound).is_ok());
    }

    #[test]
    fn nonconvex_profile_is_flagged() {
        // Amplitude 0.25 on base 0.6 flattens past convexity at the equator.
        let p = ellipsoid(101, 0.25);
        let g = profile_geometry(&p, 1.0).unwrap();
        assert!(g.lambda_min <= 0.0, "lambda_min = {}", g.lambda_min);
        assert!(matches!(
            profile_flow_step(&p, 1.0, 1e-6),
            Err(Error::LostConvexity { .. })
        ));
        assert!(matches!(
            convexity_certificate(&p, 1.0),
            Err(Error::NotConvex { .. })
        ));
    }

    #[test]
    fn certificate_on_sphere_is_one_half() {
        let p = AxisymmetricProfile::from_fn(101, |_| FRAC_PI_4).unwrap();
        let c = convexity_certificate(&p, 1.0).unwrap();
        assert!((c.epsilon - 0.5).abs() <= 1e-13);
        assert_eq!(c.l_bound, 0.0);
    }

    #[test]
    fn time_reversed_step_increases_roundness_defect() {
        let p = ellipsoid(101, 0.05);
        let g = profile_geometry(&p, 1.0).unwrap();
        let dt = 0.5 * 0.4 * p.h_step() * p.h_step() / g.max_diffusivity;
        let ratio = |q: &AxisymmetricProfile| {
            let m = monitors_profile(q, 1.0, 0.25).unwrap();
            m.ratio
        };
        let forward = ratio(&profile_flow_step(&p, 1.0, dt).unwrap());
        let backward = ratio(&profile_flow_step(&p, 1.0, -dt).unwrap());
        let now = ratio(&p);
        assert!(
            forward < now && now < backward,
            "ratio: forward {forward}, now {now}, backward {backward}"
        );
    }

    #[test]
    fn monitor_fields_are_consistent_on_ellipsoid() {
        let p = ellipsoid(101, 0.05);
        let m = monitors_profile(&p, 1.0, 0.25).unwrap();
        assert!(m.h_min <= m.h_max);
        assert!(m.lambda_min <= m.lambda_max);
        assert!(m.ratio > 1.0 && m.ratio.is_finite());
        assert!(m.psi_delta_max > 0.0 && m.psi_delta_max.is_finite());
        let g = profile_geometry(&p, 1.0).unwrap();
        assert_eq!(m.volume, g.area);
        // Umbilic case: pinching vanishes to roundoff.
        let sph = AxisymmetricProfile::from_fn(101, |_| FRAC_PI_4).unwrap();
        let ms = monitors_profile(&sph, 1.0, 0.25).unwrap();
        assert!(ms.psi_delta_max <= 1e-24);
        assert!((ms.ratio - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ellipsoid_ratio_decreases_along_short_run() {
        let p = ellipsoid(101, 0.05);
        let cfg = ProfileFlowConfig {
            sample_every: 64,
            r_stop: 0.35,
            ..ProfileFlowConfig::default()
        };
        let run = profile_flow_solve(&p, &cfg).unwrap();
        let ratios: Vec<f64> = run
            .trajectory
            .samples
            .iter()
            .map(|s| s.monitor.ratio)
            .collect();
        assert!(ratios.len() > 10, "expected a real run, got {}", ratios.len());
        for w in ratios.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-10),
                "ratio increased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(*ratios.last().unwrap() < ratios[0] - 1e-3);
        // Terminal state was recorded even off the sampling cadence.
        let last = run.trajectory.samples.last().unwrap();
        assert!(last.radius <= 0.35 + 1e-12);
        assert!(run.trajectory.extinction.is_some());
    }

    #[test]
    fn t_end_truncation_reports_no_extinction() {
        let p = ellipsoid(51, 0.03);
        let cfg = ProfileFlowConfig {
            t_end: Some(1e-3),
            sample_every: 16,
            ..ProfileFlowConfig::default()
        };
        let run = profile_flow_solve(&p, &cfg).unwrap();
        assert!(run.trajectory.extinction.is_none());
        let last = run.trajectory.samples.last().unwrap();
        assert!(last.t >= 1e-3 - 1e-12);
    }

    #[test]
    fn snapshot_csv_round_trip_text() {
        let p = ellipsoid(5, 0.01);
        let csv = p.to_snapshot_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "psi,r");
        assert_eq!(csv.lines().count(), 6);
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(row[0], 0.0);
        assert_eq!(row[1], 0.61);
    }
}
