//! C ABI for the gaugeflow library.
//!
//! Every call returns a [`GfStatus`] and writes results through out
//! pointers, so no Rust type crosses the boundary. Handles are opaque
//! heap boxes; each constructor has a matching `_free` that accepts null.
//! Bodies are wrapped in `catch_unwind`, so no panic unwinds into C.
//!
//! The generated header lives at `include/gaugeflow.h` and is kept in
//! sync by the build script.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gaugeflow::flow::{sphere_flow_solve, volume_law_check, Trajectory};
use gaugeflow::trace::Branch;
use gaugeflow::Error;

/// Result code of every ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A scalar argument was outside its documented domain.
    InvalidArgument = 2,
    /// The computation started but failed (lost convexity, CFL, cut locus).
    NumericFailure = 3,
    /// Internal panic; the handle state is unspecified but still freeable.
    Panic = 4,
}

/// Regularized-trace branch over one spectrum pair. Opaque.
pub struct GfBranch(Branch);

/// Completed sphere flow run. Opaque.
pub struct GfTrajectory(Trajectory);

/// One recorded flow snapshot.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GfSample {
    /// Flow time.
    pub t: f64,
    /// Geodesic radius of the evolving sphere.
    pub radius: f64,
    /// Min mean curvature over the surface.
    pub h_min: f64,
    /// Max mean curvature over the surface.
    pub h_max: f64,
    /// Pinching ratio min(lambda)/H.
    pub ratio: f64,
    /// Enclosed volume.
    pub volume: f64,
}

fn status_of(err: &Error) -> GfStatus {
    match err {
        Error::Config(_)
        | Error::OutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::TruncationTooLarge { .. } => GfStatus::InvalidArgument,
        _ => GfStatus::NumericFailure,
    }
}

/// Run `f` without letting a panic cross the ABI.
fn guarded(f: impl FnOnce() -> GfStatus) -> GfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(GfStatus::Panic)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(
        concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes(),
    ) {
        Ok(s) => s,
        Err(_) => unreachable!(),
    };
    VERSION.as_ptr()
}

/// Create a trace branch for eigenvalue scale `lambda` and offset `b`.
///
/// On success writes a handle to `*out`; free it with `gf_branch_free`.
///
/// # Safety
/// `out` must be a valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_branch_new(
    lambda: f64,
    b: f64,
    out: *mut *mut GfBranch,
) -> GfStatus {
    if out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| match Branch::new(lambda, b) {
        Ok(branch) => {
            unsafe { *out = Box::into_raw(Box::new(GfBranch(branch))) };
            GfStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Release a branch handle. Null is a no-op.
///
/// # Safety
/// `branch` must be null or a pointer returned by `gf_branch_new` that has
/// not already been freed.
#[no_mangle]
pub unsafe extern "C" fn gf_branch_free(branch: *mut GfBranch) {
    if !branch.is_null() {
        drop(unsafe { Box::from_raw(branch) });
    }
}

/// Closed-form value of the branch's regularized trace.
///
/// # Safety
/// `branch` must be a live handle from `gf_branch_new`; `out` must point to
/// writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn gf_branch_closed_form(
    branch: *const GfBranch,
    out: *mut f64,
) -> GfStatus {
    if branch.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = (*branch).0.closed_form() };
        GfStatus::Ok
    })
}

/// Partial sum of the branch series through mode `n`.
///
/// # Safety
/// Same contract as `gf_branch_closed_form`.
#[no_mangle]
pub unsafe extern "C" fn gf_branch_partial_sum(
    branch: *const GfBranch,
    n: usize,
    out: *mut f64,
) -> GfStatus {
    if branch.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = (*branch).0.partial_sum(n) };
        GfStatus::Ok
    })
}

/// Upper bound on the tail left after the partial sum through mode `n`.
///
/// # Safety
/// Same contract as `gf_branch_closed_form`.
#[no_mangle]
pub unsafe extern "C" fn gf_branch_tail_bound(
    branch: *const GfBranch,
    n: usize,
    out: *mut f64,
) -> GfStatus {
    if branch.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = (*branch).0.tail_bound(n) };
        GfStatus::Ok
    })
}

/// Flow a geodesic sphere of radius `r0` in curvature `kappa` with step
/// `dt` until extinction or time `t_end`.
///
/// On success writes a handle to `*out`; free it with
/// `gf_trajectory_free`.
///
/// # Safety
/// `out` must be a valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_sphere_flow_solve(
    r0: f64,
    kappa: f64,
    dt: f64,
    t_end: f64,
    out: *mut *mut GfTrajectory,
) -> GfStatus {
    if out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| match sphere_flow_solve(r0, kappa, dt, t_end) {
        Ok(traj) => {
            unsafe { *out = Box::into_raw(Box::new(GfTrajectory(traj))) };
            GfStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Release a trajectory handle. Null is a no-op.
///
/// # Safety
/// `traj` must be null or a pointer returned by `gf_sphere_flow_solve`
/// that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_free(traj: *mut GfTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Number of recorded snapshots.
///
/// # Safety
/// `traj` must be a live handle; `out` must point to writable memory for
/// one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_len(
    traj: *const GfTrajectory,
    out: *mut usize,
) -> GfStatus {
    if traj.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = (*traj).0.samples.len() };
        GfStatus::Ok
    })
}

/// Snapshot `i`, in recording order. Fails with `INVALID_ARGUMENT` when
/// `i` is out of range.
///
/// # Safety
/// `traj` must be a live handle; `out` must point to writable memory for
/// one `GfSample`.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_sample(
    traj: *const GfTrajectory,
    i: usize,
    out: *mut GfSample,
) -> GfStatus {
    if traj.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        let samples = &unsafe { &(*traj).0 }.samples;
        let Some(s) = samples.get(i) else {
            return GfStatus::InvalidArgument;
        };
        let sample = GfSample {
            t: s.t,
            radius: s.radius,
            h_min: s.monitor.h_min,
            h_max: s.monitor.h_max,
            ratio: s.monitor.ratio,
            volume: s.monitor.volume,
        };
        unsafe { *out = sample };
        GfStatus::Ok
    })
}

/// Extrapolated extinction time. Writes `false` and NaN when the run hit
/// `t_end` before extinction.
///
/// # Safety
/// `traj` must be a live handle; `out_found` and `out_time` must point to
/// writable memory for one `bool` and one double.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_extinction(
    traj: *const GfTrajectory,
    out_found: *mut bool,
    out_time: *mut f64,
) -> GfStatus {
    if traj.is_null() || out_found.is_null() || out_time.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        let ext = unsafe { &(*traj).0 }.extinction;
        unsafe {
            *out_found = ext.is_some();
            *out_time = ext.unwrap_or(f64::NAN);
        }
        GfStatus::Ok
    })
}

/// Max relative deviation of enclosed volume from the exact monotone law
/// along the run.
///
/// # Safety
/// `traj` must be a live handle; `out` must point to writable memory for
/// one double.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_volume_law_max_dev(
    traj: *const GfTrajectory,
    out: *mut f64,
) -> GfStatus {
    if traj.is_null() || out.is_null() {
        return GfStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = volume_law_check(&(*traj).0).max_rel_deviation };
        GfStatus::Ok
    })
}
