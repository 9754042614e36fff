//! The gauge action on discrete connections and the transport maps it
//! intertwines.

use super::{BoundarySubgroup, DiscretePath, GaugePath};
use crate::error::{Error, Result};
use crate::su2::{exp_group, log_group, AlgebraVector, GroupElement, MetricConvention};

/// Endpoint of the horizontal lift: phi(u) = exp(t u_1) ... exp(t u_m) with
/// t = a/m, the exact solution of the left-logarithmic ODE for
/// piecewise-constant u.
pub fn parallel_transport(u: &DiscretePath, conv: &MetricConvention) -> GroupElement {
    let tau = u.a() / u.m() as f64;
    u.values().iter().fold(GroupElement::identity(), |acc, x| {
        acc.multiply(&exp_group(&x.scale(tau), conv))
    })
}

/// All partial products e, g_1, g_1 g_2, ..., phi(u); node i is the lift
/// evaluated at s = i a/m.
pub fn partial_transports(u: &DiscretePath, conv: &MetricConvention) -> Vec<GroupElement> {
    let tau = u.a() / u.m() as f64;
    let mut nodes = Vec::with_capacity(u.m() + 1);
    nodes.push(GroupElement::identity());
    for x in u.values() {
        let last = *nodes.last().expect("non-empty");
        nodes.push(last.multiply(&exp_group(&x.scale(tau), conv)));
    }
    nodes
}

/// Holonomy along the base loop. The pulled-back connection along the lifted
/// loop *is* the DiscretePath here, so holonomy and parallel transport are
/// one map under two names; both are kept because callers mean different
/// things by them.
pub fn holonomy(u: &DiscretePath, conv: &MetricConvention) -> GroupElement {
    parallel_transport(u, conv)
}

/// Gauge action. Per segment,
///   (g·u)_i = (m/a) log( g_i exp((a/m) u_i) g_{i+1}^{-1} ),
/// the unique discretization by nodes for which the group-action law and the
/// transport equivariance phi(g·u) = g_0 phi(u) g_m^{-1} hold exactly: the
/// per-segment factors telescope. Its 1/m expansion is
/// Ad(g_i) u_i - (m/a) log(g_{i+1} g_i^{-1}), conjugation minus the discrete
/// right-logarithmic derivative.
pub fn gauge_act(
    g: &GaugePath,
    u: &DiscretePath,
    conv: &MetricConvention,
) -> Result<DiscretePath> {
    if g.m() != u.m() {
        return Err(Error::DimensionMismatch {
            context: "gauge path and connection segment counts differ",
            expected: u.m(),
            got: g.m(),
        });
    }
    if g.a() != u.a() {
        return Err(Error::PreconditionViolated(format!(
            "interval lengths differ: {} vs {}",
            g.a(),
            u.a()
        )));
    }
    let m = u.m();
    let tau = u.a() / m as f64;
    let mut values = Vec::with_capacity(m);
    for i in 0..m {
        let w = g.nodes()[i]
            .multiply(&exp_group(&u.values()[i].scale(tau), conv))
            .multiply(&g.nodes()[i + 1].inverse());
        values.push(log_group(&w, conv)?.scale(1.0 / tau));
    }
    DiscretePath::new(u.a(), values)
}

/// Packages connection samples along the base loop into a DiscretePath; the
/// composition holonomy(bridge_mu(samples)) realizes the loop's holonomy.
pub fn bridge_mu(samples: &[AlgebraVector], a: f64) -> Result<DiscretePath> {
    DiscretePath::new(a, samples.to_vec())
}

/// Repackages a gauge path as the pulled-back gauge path along the loop,
/// after checking its endpoints against the boundary regime. At this
/// discretization level the repackaging is the identity; the classification
/// is the content.
pub fn lambda_bridge(g: &GaugePath, boundary: &BoundarySubgroup) -> Result<GaugePath> {
    boundary.classify(g)?;
    Ok(g.clone())
}

/// A gauge path carrying the zero connection to one with transport k:
/// nodes march down the geodesic from k to e, so phi(g·0) = g_0 g_m^{-1} = k.
pub fn transitivity_witness(
    k: &GroupElement,
    a: f64,
    m: usize,
    conv: &MetricConvention,
) -> Result<GaugePath> {
    let x = log_group(k, conv)?;
    let nodes = (0..=m)
        .map(|i| exp_group(&x.scale((m - i) as f64 / m as f64), conv))
        .collect();
    GaugePath::new(a, nodes)
}
