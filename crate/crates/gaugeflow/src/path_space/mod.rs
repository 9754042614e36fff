//! Discretized connection space over the interval: piecewise-constant
//! algebra-valued paths, piecewise-geodesic gauge paths, and the finite
//! boundary subgroups that carve out based and two-sided-quotient variants.

mod gauge;
mod jacobian;
mod probe;

pub use gauge::{
    bridge_mu, gauge_act, holonomy, lambda_bridge, parallel_transport, partial_transports,
    transitivity_witness,
};
pub use jacobian::{
    horizontal_projection, submersion_isometry_residual, transport_jacobian, transport_rank,
    vertical_basis,
};
pub use probe::fibre_mean_curvature_probe;

use crate::error::{Error, Result};
use crate::su2::{geodesic_distance, AlgebraVector, GroupElement, MetricConvention};

/// Piecewise-constant algebra-valued path on m uniform subintervals of
/// [0, a].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    a: f64,
    values: Vec<AlgebraVector>,
}

impl DiscretePath {
    pub fn new(a: f64, values: Vec<AlgebraVector>) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if values.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "DiscretePath needs at least one segment",
                expected: 1,
                got: 0,
            });
        }
        if values.iter().any(|v| !v.norm().is_finite()) {
            return Err(Error::PreconditionViolated(
                "non-finite segment value".into(),
            ));
        }
        Ok(Self { a, values })
    }

    pub fn zero(a: f64, m: usize) -> Result<Self> {
        Self::new(a, vec![AlgebraVector::zero(); m])
    }

    /// Constant path u(s) = x.
    pub fn constant(a: f64, m: usize, x: AlgebraVector) -> Result<Self> {
        Self::new(a, vec![x; m])
    }

    /// Samples a smooth field at segment midpoints s = (i + 1/2) a / m.
    pub fn from_fn(a: f64, m: usize, f: impl Fn(f64) -> AlgebraVector) -> Result<Self> {
        Self::new(
            a,
            (0..m)
                .map(|i| f((i as f64 + 0.5) * a / m as f64))
                .collect(),
        )
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[AlgebraVector] {
        &self.values
    }

    /// Flattened coordinates (3 per segment), the working chart for linear
    /// algebra on the path space.
    pub fn coords(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| v.0).collect()
    }

    pub fn from_coords(a: f64, coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() % 3 != 0 {
            return Err(Error::DimensionMismatch {
                context: "coordinate length must be a positive multiple of 3",
                expected: 3,
                got: coords.len(),
            });
        }
        Self::new(
            a,
            coords
                .chunks_exact(3)
                .map(|c| AlgebraVector([c[0], c[1], c[2]]))
                .collect(),
        )
    }

    /// L² pairing (a/m) Σ <u_i, v_i>.
    pub fn inner_l2(&self, other: &DiscretePath) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.inner(v))
            .sum();
        Ok(self.a / self.m() as f64 * s)
    }

    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|u| u.inner(u)).sum();
        (self.a / self.m() as f64 * s).sqrt()
    }

    pub fn sub(&self, other: &DiscretePath) -> Result<DiscretePath> {
        self.check_compatible(other)?;
        Ok(DiscretePath {
            a: self.a,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| u - v)
                .collect(),
        })
    }

    fn check_compatible(&self, other: &DiscretePath) -> Result<()> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch {
                context: "segment counts differ",
                expected: self.m(),
                got: other.m(),
            });
        }
        if self.a != other.a {
            return Err(Error::PreconditionViolated(format!(
                "interval lengths differ: {} vs {}",
                self.a, other.a
            )));
        }
        Ok(())
    }

    /// CSV form: named header, an (a, m) row, then one row of 3 floats per
    /// segment. 17 significant digits, so the round-trip is bit-exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,m\n");
        out.push_str(&format!("{:.16e},{}\n", self.a, self.m()));
        for v in &self.values {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                v.0[0], v.0[1], v.0[2]
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<DiscretePath> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty path CSV".into()))?;
        if header.trim() != "a,m" {
            return Err(Error::Config(format!(
                "expected path CSV header 'a,m', got '{header}'"
            )));
        }
        let meta = lines
            .next()
            .ok_or_else(|| Error::Config("path CSV missing (a, m) row".into()))?;
        let mut parts = meta.split(',');
        let a: f64 = parse_field(parts.next(), "a")?;
        let m: usize = parse_field(parts.next(), "m")?;
        let mut values = Vec::with_capacity(m);
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Config(format!(
                    "segment row needs 3 fields, got {}",
                    cols.len()
                )));
            }
            values.push(AlgebraVector([
                parse_field(Some(cols[0]), "x")?,
                parse_field(Some(cols[1]), "y")?,
                parse_field(Some(cols[2]), "z")?,
            ]));
        }
        if values.len() != m {
            return Err(Error::DimensionMismatch {
                context: "segment rows disagree with header m",
                expected: m,
                got: values.len(),
            });
        }
        DiscretePath::new(a, values)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T> {
    field
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(format!("bad CSV field '{name}'")))
}

/// Piecewise-geodesic group-valued path given by its m+1 node values.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePath {
    a: f64,
    nodes: Vec<GroupElement>,
}

impl GaugePath {
    pub fn new(a: f64, nodes: Vec<GroupElement>) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if nodes.len() < 2 {
            return Err(Error::DimensionMismatch {
                context: "GaugePath needs at least two nodes",
                expected: 2,
                got: nodes.len(),
            });
        }
        Ok(Self { a, nodes })
    }

    pub fn identity(a: f64, m: usize) -> Result<Self> {
        Self::new(a, vec![GroupElement::identity(); m + 1])
    }

    pub fn constant(a: f64, m: usize, k: GroupElement) -> Result<Self> {
        Self::new(a, vec![k; m + 1])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    /// Pointwise product, the group law of the discrete gauge group.
    pub fn compose(&self, other: &GaugePath) -> Result<GaugePath> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch {
                context: "gauge node counts differ",
                expected: self.m(),
                got: other.m(),
            });
        }
        Ok(GaugePath {
            a: self.a,
            nodes: self
                .nodes
                .iter()
                .zip(&other.nodes)
                .map(|(g, h)| g.multiply(h))
                .collect(),
        })
    }

    /// Discrete H¹ energy Σ d(g_i, g_{i+1})² (m/a).
    pub fn energy(&self, conv: &MetricConvention) -> f64 {
        let m = self.m() as f64;
        self.nodes
            .windows(2)
            .map(|w| geodesic_distance(&w[0], &w[1], conv).powi(2))
            .sum::<f64>()
            * (m / self.a)
    }
}

/// Endpoint constraint regimes for gauge paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// No endpoint constraint.
    Full,
    /// Both endpoints at the identity.
    Based,
    /// Both endpoints in the finite subgroup.
    GammaPair,
}

/// A finite subgroup of the group together with the endpoint regime it
/// enforces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySubgroup {
    gamma: Vec<GroupElement>,
    mode: BoundaryMode,
}

/// Membership tolerance for boundary classification.
const BOUNDARY_TOL: f64 = 1e-9;

impl BoundarySubgroup {
    /// Verifies the element list is a subgroup (contains e, closed under
    /// product and inverse) before accepting it.
    pub fn new(gamma: Vec<GroupElement>, mode: BoundaryMode) -> Result<Self> {
        let conv = MetricConvention::default();
        let contains = |g: &GroupElement| {
            gamma
                .iter()
                .any(|h| geodesic_distance(g, h, &conv) <= BOUNDARY_TOL)
        };
        if gamma.is_empty() || !contains(&GroupElement::identity()) {
            return Err(Error::PreconditionViolated(
                "boundary subgroup must contain the identity".into(),
            ));
        }
        for g in &gamma {
            if !contains(&g.inverse()) {
                return Err(Error::PreconditionViolated(
                    "boundary subgroup not closed under inverse".into(),
                ));
            }
            for h in &gamma {
                if !contains(&g.multiply(h)) {
                    return Err(Error::PreconditionViolated(
                        "boundary subgroup not closed under product".into(),
                    ));
                }
            }
        }
        Ok(Self { gamma, mode })
    }

    /// Trivial subgroup, unconstrained endpoints.
    pub fn full() -> Self {
        Self {
            gamma: vec![GroupElement::identity()],
            mode: BoundaryMode::Full,
        }
    }

    /// Trivial subgroup, both endpoints pinned to e.
    pub fn based() -> Self {
        Self {
            gamma: vec![GroupElement::identity()],
            mode: BoundaryMode::Based,
        }
    }

    /// Cyclic subgroup of order k inside the fixed maximal circle
    /// {cos t + sin t i}.
    pub fn cyclic(k: usize, mode: BoundaryMode) -> Result<Self> {
        if k == 0 {
            return Err(Error::PreconditionViolated(
                "cyclic subgroup order must be positive".into(),
            ));
        }
        let gamma = (0..k)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                GroupElement::from_components([t.cos(), t.sin(), 0.0, 0.0]).expect("unit")
            })
            .collect();
        Self::new(gamma, mode)
    }

    /// The order-8 quaternion group {±1, ±i, ±j, ±k}.
    pub fn quaternion(mode: BoundaryMode) -> Self {
        let mut gamma = Vec::with_capacity(8);
        for axis in 0..4 {
            for sign in [1.0, -1.0] {
                let mut q = [0.0; 4];
                q[axis] = sign;
                gamma.push(GroupElement::from_components(q).expect("unit"));
            }
        }
        Self::new(gamma, BoundaryMode::GammaPair)
            .expect("the quaternion group is a subgroup")
            .with_mode(mode)
    }

    fn with_mode(mut self, mode: BoundaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.gamma
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    /// Distance from g to the nearest subgroup element.
    pub fn distance_to(&self, g: &GroupElement) -> f64 {
        let conv = MetricConvention::default();
        self.gamma
            .iter()
            .map(|h| geodesic_distance(g, h, &conv))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks the endpoints of a gauge path against this boundary regime.
    pub fn classify(&self, g: &GaugePath) -> Result<()> {
        let conv = MetricConvention::default();
        let check = |node: &GroupElement| -> Result<()> {
            let dist = match self.mode {
                BoundaryMode::Full => 0.0,
                BoundaryMode::Based => {
                    geodesic_distance(node, &GroupElement::identity(), &conv)
                }
                BoundaryMode::GammaPair => self.distance_to(node),
            };
            if dist > BOUNDARY_TOL {
                return Err(Error::BoundaryViolation { dist });
            }
            Ok(())
        };
        check(&g.nodes()[0])?;
        check(&g.nodes()[g.m()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::exp_group;
    use approx::assert_abs_diff_eq;

    #[test]
    fn csv_round_trip_is_exact() {
        let u = DiscretePath::from_fn(2.5, 17, |s| {
            AlgebraVector([s.sin() / 3.0, (7.0 * s).cos(), s * s - 0.7])
        })
        .unwrap();
        let back = DiscretePath::from_csv(&u.to_csv()).unwrap();
        assert_eq!(u, back);
        // And the text itself is stable under a second pass.
        assert_eq!(u.to_csv(), back.to_csv());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(DiscretePath::from_csv("").is_err());
        assert!(DiscretePath::from_csv("x,y\n1,2\n").is_err());
        assert!(DiscretePath::from_csv("a,m\n1.0,2\n0,0,0\n").is_err());
        assert!(DiscretePath::from_csv("a,m\n1.0,1\n0,0\n").is_err());
    }

    #[test]
    fn inner_product_is_the_weighted_dot() {
        let a = 3.0;
        let u = DiscretePath::constant(a, 6, AlgebraVector([1.0, 0.0, 2.0])).unwrap();
        let v = DiscretePath::constant(a, 6, AlgebraVector([0.5, 4.0, -1.0])).unwrap();
        // (a/m) * m * <x, y> = a <x, y>.
        assert_abs_diff_eq!(u.inner_l2(&v).unwrap(), 3.0 * (0.5 - 2.0), epsilon = 1e-14);
        assert!(u
            .inner_l2(&DiscretePath::zero(a, 5).unwrap())
            .is_err());
    }

    #[test]
    fn boundary_subgroups_validate_closure() {
        assert_eq!(BoundarySubgroup::cyclic(6, BoundaryMode::GammaPair).unwrap().order(), 6);
        assert_eq!(BoundarySubgroup::quaternion(BoundaryMode::GammaPair).order(), 8);
        // A non-subgroup list is rejected.
        let conv = MetricConvention::default();
        let bad = vec![
            GroupElement::identity(),
            exp_group(&AlgebraVector([0.37, 0.0, 0.0]), &conv),
        ];
        assert!(BoundarySubgroup::new(bad, BoundaryMode::GammaPair).is_err());
    }

    #[test]
    fn classification_by_mode() {
        let gamma = BoundarySubgroup::cyclic(4, BoundaryMode::GammaPair).unwrap();
        let i4 = gamma.elements()[1]; // quarter turn, order 4
        let m = 8;
        let mut nodes = vec![GroupElement::identity(); m + 1];
        nodes[m] = i4;
        let g = GaugePath::new(1.0, nodes).unwrap();
        assert!(gamma.classify(&g).is_ok());
        assert!(matches!(
            BoundarySubgroup::based().classify(&g),
            Err(Error::BoundaryViolation { .. })
        ));
        assert!(BoundarySubgroup::full().classify(&g).is_ok());

        let conv = MetricConvention::default();
        let stray = GaugePath::constant(1.0, m, exp_group(&AlgebraVector([0.3, 0.4, 0.0]), &conv))
            .unwrap();
        match gamma.classify(&stray) {
            Err(Error::BoundaryViolation { dist }) => assert!(dist > 0.1),
            other => panic!("expected BoundaryViolation, got {other:?}"),
        }
    }

    #[test]
    fn gauge_energy_of_uniform_rotation() {
        // Nodes marching uniformly along a one-parameter subgroup: energy
        // equals (total angle)²/a.
        let conv = MetricConvention::default();
        let (a, m, theta) = (2.0, 16, 1.2);
        let nodes = (0..=m)
            .map(|i| {
                exp_group(
                    &AlgebraVector([theta * i as f64 / m as f64, 0.0, 0.0]),
                    &conv,
                )
            })
            .collect();
        let g = GaugePath::new(a, nodes).unwrap();
        assert_abs_diff_eq!(g.energy(&conv), theta * theta / a, epsilon = 1e-12);
    }
}
