use thiserror::Error;

/// Everything that can go wrong in the library, one variant per guard.
///
/// Numerical drivers are written so that internally generated states never
/// trip these; they exist to reject bad *inputs* loudly instead of returning
/// garbage.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Logarithm requested at (or within tolerance of) the cut locus, where
    /// the principal branch is not defined.
    #[error("log undefined within {tol:e} of the cut locus (antipode)")]
    CutLocus { tol: f64 },

    /// Sectional-curvature probe got a degenerate plane (Gram determinant
    /// below threshold).
    #[error("degenerate plane: Gram determinant {det:e} below 1e-14")]
    DegeneratePlane { det: f64 },

    /// Two discrete objects disagree about segment/node counts or lengths.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A gauge path's endpoints are not in the allowed boundary set.
    #[error("gauge path endpoints violate the boundary subgroup (distance {dist:e} to nearest allowed element)")]
    BoundaryViolation { dist: f64 },

    /// Fibre-probe truncation exceeds the available paired spectrum.
    #[error("truncation {trunc} too large for fibre dimension {dim}")]
    TruncationTooLarge { trunc: usize, dim: usize },

    /// A spectrum branch hits the pole of lambda/(1+b j) at integer 1/b.
    #[error("spectrum branch (lambda={lambda}, b={b}) has a pole at j={j}")]
    PoleAtJ { lambda: f64, b: f64, j: i64 },

    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Myers check requires strictly convex input (all principal curvatures
    /// positive).
    #[error("surface not convex: minimum principal curvature {lambda_min:e} <= 0")]
    NotConvex { lambda_min: f64 },

    /// Scalar argument outside its admissible interval.
    #[error("{name} = {value} outside ({lo}, {hi})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Single ODE step too large relative to the shrinking radius.
    #[error("step too large: dt*H = {dt_h:e} exceeds 0.1*r = {limit:e}")]
    StepTooLarge { dt_h: f64, limit: f64 },

    /// Profile left the admissible band (touching 0 or the antipodal radius).
    #[error("singular profile: r = {r} at node {node}")]
    SingularProfile { r: f64, node: usize },

    /// Explicit parabolic step above the CFL bound.
    #[error("CFL violation: dt = {dt:e} exceeds bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    /// Strict convexity failed during a flow that should preserve it.
    #[error("lost convexity: lambda_min = {lambda_min:e}")]
    LostConvexity { lambda_min: f64 },

    /// A report was requested from a trajectory that never reached its
    /// terminal state.
    #[error("incomplete run: {0}")]
    IncompleteRun(String),

    /// Bad experiment configuration (parse error or invalid field).
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
