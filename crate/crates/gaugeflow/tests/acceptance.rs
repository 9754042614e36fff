//! Acceptance gate: one test per criterion, printing one pass/fail line
//! each (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The expensive computations (the exact sphere flow at dt = 1e-5 and the
//! 20-run profile suite) are shared across criteria through OnceLock, so
//! the whole gate costs one suite run.

use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gaugeflow::cli::{execute, ExperimentConfig};
use gaugeflow::flow::{
    run_profile_suite, sphere_flow_solve, volume_law_check, volume_law_refinement,
    SuiteRunReport, Trajectory,
};
use gaugeflow::orbifold::{
    divergence_theorem_check, euclidean_sphere_mesh, geodesic_sphere_mesh, myers_check,
    run_sobolev_suite, SphereVectorField, MESH_TOL,
};
use gaugeflow::su2::GroupElement;
use gaugeflow::trace::Branch;

macro_rules! check {
    ($fails:ident, $cond:expr, $($msg:tt)*) => {
        if !$cond {
            $fails.push(format!($($msg)*));
        }
    };
}

fn report(criterion: u32, fails: Vec<String>, detail: String) {
    if fails.is_empty() {
        println!("acceptance criterion {criterion}: PASS ({detail})");
    } else {
        let joined = fails.join("; ");
        println!("acceptance criterion {criterion}: FAIL ({joined})");
        panic!("criterion {criterion}: {joined}");
    }
}

/// Exact-solution run: unit curvature, r0 = pi/3, dt = 1e-5.
fn sphere_run() -> &'static (Trajectory, Duration) {
    static RUN: OnceLock<(Trajectory, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let t0 = Instant::now();
        let traj = sphere_flow_solve(FRAC_PI_3, 1.0, 1e-5, 10.0).expect("sphere flow");
        (traj, t0.elapsed())
    })
}

/// 20 seeded convex starts at n_psi = 401, matching configs/profile_suite.toml.
/// run_profile_suite propagates LostConvexity, so Ok means it never fired.
fn suite_runs() -> &'static (Vec<SuiteRunReport>, Duration) {
    static RUNS: OnceLock<(Vec<SuiteRunReport>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let t0 = Instant::now();
        let runs = run_profile_suite(20, 1, 401, 0.25)
            .expect("a suite run lost convexity or failed");
        (runs, t0.elapsed())
    })
}

#[test]
fn criterion_01_sphere_flow_matches_closed_form() {
    let (traj, wall) = sphere_run();
    let mut fails = Vec::new();

    // cos r(t) = cos(pi/3) e^{2t} = e^{2t}/2, exactly, at every sample.
    let max_dev = traj
        .samples
        .iter()
        .map(|s| (s.radius.cos() - 0.5 * (2.0 * s.t).exp()).abs())
        .fold(0.0_f64, f64::max);
    check!(fails, max_dev <= 1e-8, "closed-form deviation {max_dev:.3e} > 1e-8");

    let t_exact = 0.5 * 2.0_f64.ln();
    let t_err = match traj.extinction {
        Some(t) => (t - t_exact).abs(),
        None => f64::INFINITY,
    };
    check!(fails, t_err <= 1e-6, "extinction error {t_err:.3e} > 1e-6");
    check!(fails, *wall < Duration::from_secs(1), "solve took {wall:?}, budget 1 s");

    report(
        1,
        fails,
        format!(
            "max closed-form dev {max_dev:.3e}, extinction err {t_err:.3e}, {} ms",
            wall.as_millis()
        ),
    );
}

#[test]
fn criterion_02_profile_suite_shrinks_to_round_points() {
    let (runs, wall) = suite_runs();
    let mut fails = Vec::new();

    check!(fails, runs.len() == 20, "expected 20 runs, got {}", runs.len());
    for r in runs {
        check!(
            fails,
            r.pinching.final_ratio <= 1.01,
            "seed {}: final roundness ratio {:.6} > 1.01",
            r.seed,
            r.pinching.final_ratio
        );
    }
    let worst = runs
        .iter()
        .map(|r| r.pinching.final_ratio)
        .fold(0.0_f64, f64::max);
    let per_profile = *wall / (runs.len().max(1) as u32);
    check!(
        fails,
        per_profile < Duration::from_secs(120),
        "{per_profile:?} per profile, budget 2 min"
    );

    report(
        2,
        fails,
        format!(
            "20/20 convex to extinction, worst final ratio {worst:.6}, {:?} per profile",
            per_profile
        ),
    );
}

#[test]
fn criterion_03_extinction_before_a_priori_bound() {
    let (runs, _) = suite_runs();
    let mut fails = Vec::new();

    let mut worst_frac = 0.0_f64;
    for r in runs {
        let p = &r.pinching;
        check!(
            fails,
            p.pass && p.extinction_time <= p.bound,
            "seed {}: T = {:.6} exceeds bound {:.6}",
            r.seed,
            p.extinction_time,
            p.bound
        );
        worst_frac = worst_frac.max(p.extinction_time / p.bound);
    }

    report(
        3,
        fails,
        format!("T <= n/(2 min H0^2) on all 20 runs, worst T/bound {worst_frac:.4}"),
    );
}

#[test]
fn criterion_04_volume_law_exact_and_second_order() {
    let (traj, _) = sphere_run();
    let mut fails = Vec::new();

    let v = volume_law_check(traj);
    check!(
        fails,
        v.max_rel_deviation <= 1e-5,
        "sphere volume-law deviation {:.3e} > 1e-5",
        v.max_rel_deviation
    );

    // Joint (h, dt) refinement of the profile PDE, matching
    // configs/profile_refinement.toml.
    let slope = volume_law_refinement(0.6, 0.05, 0.35, &[51, 101, 201])
        .expect("refinement runs failed");
    check!(fails, slope >= 1.8, "refinement order {slope:.3} < 1.8");

    report(
        4,
        fails,
        format!(
            "sphere law dev {:.3e} over {} samples, profile refinement order {slope:.3}",
            v.max_rel_deviation, v.samples_checked
        ),
    );
}

#[test]
fn criterion_05_monitor_bounds_hold_on_suite() {
    let (runs, _) = suite_runs();
    let mut fails = Vec::new();

    let mut worst_psi_margin = 0.0_f64;
    let mut worst_ratio_margin = 0.0_f64;
    for r in runs {
        let psi_cap = 1.5 * r.psi_delta0 + 0.1;
        check!(
            fails,
            r.max_psi_delta <= psi_cap,
            "seed {}: psi_delta peak {:.4} > 1.5 psi0 + 0.1 = {:.4}",
            r.seed,
            r.max_psi_delta,
            psi_cap
        );
        worst_psi_margin = worst_psi_margin.max(r.max_psi_delta / psi_cap);

        check!(
            fails,
            r.max_gradient_gap.is_finite(),
            "seed {}: gradient gap diverged",
            r.seed
        );
        check!(
            fails,
            r.final_gradient_gap < r.max_gradient_gap,
            "seed {}: gradient gap still at its peak at extinction ({:.3e})",
            r.seed,
            r.final_gradient_gap
        );

        // Pointwise principal-curvature ratio stays within the initial
        // margin's reciprocal, with 10% discretization slack.
        let cap = 1.1 / r.epsilon0;
        check!(
            fails,
            r.max_lambda_ratio <= cap,
            "seed {}: curvature ratio {:.4} > 1.1/eps0 = {:.4}",
            r.seed,
            r.max_lambda_ratio,
            cap
        );
        worst_ratio_margin = worst_ratio_margin.max(r.max_lambda_ratio * r.epsilon0 / 1.1);
    }

    report(
        5,
        fails,
        format!(
            "pinching margin {worst_psi_margin:.3}, gradient gap recedes on all runs, \
             curvature-ratio margin {worst_ratio_margin:.3}"
        ),
    );
}

#[test]
fn criterion_06_trace_partial_sums_near_closed_forms() {
    let mut fails = Vec::new();
    let t0 = Instant::now();

    let mut worst = 0.0_f64;
    for (lambda, b) in [(1.0, 2.0), (1.0, 3.0), (2.0, 2.5)] {
        let branch = Branch::new(lambda, b).expect("branch parameters");
        let err = (branch.partial_sum(10_000) - branch.closed_form()).abs();
        check!(
            fails,
            err <= 1e-3,
            "(lambda, b) = ({lambda}, {b}): |partial - closed| = {err:.3e} > 1e-3"
        );
        worst = worst.max(err);
    }

    let paired = Branch::new(1.0, 2.0).expect("branch parameters");
    let cancel = paired.closed_form().abs();
    check!(fails, cancel <= 1e-14, "paired closed form {cancel:.3e} not 0 to 1e-14");

    let wall = t0.elapsed();
    check!(fails, wall < Duration::from_millis(100), "{wall:?}, budget 0.1 s");

    report(
        6,
        fails,
        format!(
            "worst |partial(1e4) - closed| {worst:.3e}, paired cancellation {cancel:.1e}, \
             {} us",
            wall.as_micros()
        ),
    );
}

#[test]
fn criterion_07_gauge_action_and_transport_structure() {
    // Matches configs/holonomy.toml: m = 64, 100 rank points, seed 1.
    let config = ExperimentConfig::from_toml(
        "experiment = \"holonomy\"\nseed = 1\n\n[params]\nm = 64\npoints = 100\n",
    )
    .expect("inline config");
    let out = execute(&config, "acceptance").expect("holonomy runner failed");

    let mut fails = Vec::new();
    for name in [
        "action_law_residual",
        "isometry_residual",
        "equivariance_residual",
        "const_path_residual",
        "rank_three_fraction",
    ] {
        match out.report.checks.iter().find(|c| c.name == name) {
            Some(c) => check!(
                fails,
                c.pass,
                "{}: {:.3e} violates bound {:.3e}",
                c.name,
                c.value,
                c.bound
            ),
            None => fails.push(format!("runner lost check {name}")),
        }
    }

    let worst_residual = out
        .report
        .checks
        .iter()
        .filter(|c| c.name.ends_with("_residual"))
        .map(|c| c.value)
        .fold(0.0_f64, f64::max);
    report(
        7,
        fails,
        format!("worst structure residual {worst_residual:.3e} at m = 64, rank 3 at 100/100 points"),
    );
}

#[test]
fn criterion_08_submersion_residual_halves_and_fibres_are_minimal() {
    // Matches configs/fibre_probe.toml: m = 64, truncation 20, seed 1.
    let config = ExperimentConfig::from_toml(
        "experiment = \"fibre_probe\"\nseed = 1\n\n[params]\nm = 64\ntrunc = 20\n",
    )
    .expect("inline config");
    let out = execute(&config, "acceptance").expect("fibre probe runner failed");

    let mut fails = Vec::new();
    let mut halving = f64::NAN;
    let mut probe = f64::NAN;
    for c in &out.report.checks {
        check!(fails, c.pass, "{}: {:.3e} violates bound {:.3e}", c.name, c.value, c.bound);
        match c.name.as_str() {
            "submersion_halving_ratio" => halving = c.value,
            "fibre_probe_magnitude" => probe = c.value,
            _ => {}
        }
    }
    check!(fails, halving.is_finite(), "runner lost the halving check");
    check!(fails, probe.is_finite(), "runner lost the probe check");

    report(
        8,
        fails,
        format!("residual ratio m=64 to m=128 is {halving:.4} (<= 0.5), fibre probe {probe:.1e}"),
    );
}

#[test]
fn criterion_09_sobolev_suite_and_mesh_cross_checks() {
    let mut fails = Vec::new();

    // 1000 randomized inequality pairs on level-5 meshes, seed matching
    // configs/sobolev_suite.toml.
    let suite = run_sobolev_suite(1000, 1, 5).expect("sobolev suite failed");
    check!(
        fails,
        suite.violations == 0,
        "{} of {} pairs violated the embedding inequality",
        suite.violations,
        suite.count
    );
    check!(
        fails,
        suite.max_ratio <= 1.0 + MESH_TOL,
        "worst lhs/rhs ratio {:.4} above mesh tolerance",
        suite.max_ratio
    );

    // Myers on every convex test surface: geodesic spheres and the
    // euclidean sphere.
    let e = GroupElement::identity();
    for (i, r) in [0.3, 0.7, 1.2].into_iter().enumerate() {
        let mesh = geodesic_sphere_mesh(&e, r, 1.0, 5).expect("mesh");
        let m = myers_check(&mesh).expect("myers");
        check!(
            fails,
            m.pass && m.diameter <= m.bound * (1.0 + MESH_TOL),
            "geodesic sphere {i} (r = {r}): diameter {:.4} vs bound {:.4}",
            m.diameter,
            m.bound
        );
    }
    let flat = myers_check(&euclidean_sphere_mesh(1.0, 5).expect("mesh")).expect("myers");
    check!(
        fails,
        flat.pass,
        "euclidean sphere: diameter {:.4} vs bound {:.4}",
        flat.diameter,
        flat.bound
    );

    // Closed-form cross-checks at 10k+ vertices: area, pointwise mean
    // curvature, total mean curvature, Myers bound.
    let r = 0.8;
    let mesh = geodesic_sphere_mesh(&e, r, 1.0, 5).expect("mesh");
    check!(
        fails,
        mesh.n_vertices() >= 10_000,
        "cross-check mesh has only {} vertices",
        mesh.n_vertices()
    );
    let area_exact = 4.0 * PI * r.sin().powi(2);
    let h_exact = 2.0 * r.cos() / r.sin();
    let area_rel = (mesh.total_area() - area_exact).abs() / area_exact;
    let h_rel = mesh
        .h()
        .iter()
        .map(|h| (h - h_exact).abs())
        .fold(0.0_f64, f64::max)
        / h_exact;
    let int_h: f64 = mesh
        .h()
        .iter()
        .zip(mesh.vertex_areas())
        .map(|(h, a)| h * a)
        .sum();
    let int_h_rel = (int_h - h_exact * area_exact).abs() / (h_exact * area_exact);
    let myers = myers_check(&mesh).expect("myers");
    let bound_rel = (myers.bound - PI * r.tan()).abs() / (PI * r.tan());
    for (name, val) in [
        ("area", area_rel),
        ("pointwise H", h_rel),
        ("total H", int_h_rel),
        ("Myers bound", bound_rel),
    ] {
        check!(fails, val <= 1e-3, "{name} off closed form by {val:.3e} > 1e-3");
    }

    report(
        9,
        fails,
        format!(
            "0/1000 violations (worst ratio {:.4}), Myers holds on 4 surfaces, \
             closed-form errors {:.1e}/{:.1e}/{:.1e}/{:.1e} at {} vertices",
            suite.max_ratio,
            area_rel,
            h_rel,
            int_h_rel,
            bound_rel,
            mesh.n_vertices()
        ),
    );
}

#[test]
fn criterion_10_divergence_theorem_quadrature() {
    let mut fails = Vec::new();
    let e = GroupElement::identity();
    let (r, kappa, n) = (0.7, 1.0, 100);

    let mut killing_max = 0.0_f64;
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.5, 0.81]] {
        let field = SphereVectorField::KillingTangent { axis };
        let v = divergence_theorem_check(&e, r, kappa, &field, n, n, 1)
            .expect("divergence check")
            .abs();
        killing_max = killing_max.max(v);
    }
    check!(fails, killing_max <= 1e-5, "Killing residual {killing_max:.3e} > 1e-5");

    let grad = divergence_theorem_check(&e, r, kappa, &SphereVectorField::GradientCosPsi, n, n, 1)
        .expect("divergence check")
        .abs();
    check!(fails, grad <= 1e-5, "gradient-field residual {grad:.3e} > 1e-5");

    let quotient = divergence_theorem_check(
        &e,
        r,
        kappa,
        &SphereVectorField::KillingTangent { axis: [1.0, 0.0, 0.0] },
        n,
        n,
        4,
    )
    .expect("divergence check")
    .abs();
    check!(fails, quotient <= 1e-5, "cyclic-quotient residual {quotient:.3e} > 1e-5");

    // O(h^2) fit on the field with a genuine trapezoid error term.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in [25_usize, 50, 100, 200] {
        let v = divergence_theorem_check(
            &e,
            r,
            kappa,
            &SphereVectorField::GradientCos2Psi,
            n,
            n,
            1,
        )
        .expect("divergence check")
        .abs();
        if v > 1e-12 {
            xs.push((1.0 / n as f64).ln());
            ys.push(v.ln());
        }
    }
    check!(fails, xs.len() >= 2, "refinement residuals sank below the noise floor");
    let (mx, my) = (
        xs.iter().sum::<f64>() / xs.len() as f64,
        ys.iter().sum::<f64>() / ys.len() as f64,
    );
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    check!(fails, slope >= 1.8, "convergence order {slope:.3} < 1.8");

    report(
        10,
        fails,
        format!(
            "Killing {killing_max:.1e}, gradient {grad:.1e}, quotient {quotient:.1e}, \
             order {slope:.3}"
        ),
    );
}
