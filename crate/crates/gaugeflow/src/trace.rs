//! Regularized traces of operators whose spectrum splits into branches
//! lambda/(1 + b j), j ranging over all integers.
//!
//! The trace pairs +j with -j before summing, which turns a conditionally
//! convergent family into an absolutely convergent one:
//!   lambda/(1+bj) + lambda/(1-bj) = 2 lambda / (1 - b^2 j^2),
//! and the full sum collapses to lambda (pi/b) cot(pi/b) by the
//! partial-fraction expansion of the cotangent.

use crate::error::{Error, Result};

/// How close 1/b may come to an integer before the branch is rejected as
/// having (or numerically grazing) a pole at integer index.
const POLE_TOL: f64 = 1e-12;

/// One spectral branch: eigenvalues lambda/(1 + b j) for integer j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    lambda: f64,
    b: f64,
}

impl Branch {
    /// Requires b > 1 (so no integer index hits the pole at j = -1/b) and
    /// rejects b within `POLE_TOL` of a pole through the 1/b guard.
    pub fn new(lambda: f64, b: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::PreconditionViolated(format!(
                "branch weight lambda = {lambda} is not finite"
            )));
        }
        if !b.is_finite() || b <= 1.0 {
            return Err(Error::OutOfRange {
                name: "b",
                value: b,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        let f = 1.0 / b;
        if (f - f.round()).abs() <= POLE_TOL {
            return Err(Error::PoleAtJ {
                lambda,
                b,
                j: -(f.round() as i64),
            });
        }
        Ok(Self { lambda, b })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Single eigenvalue at index j.
    pub fn eigenvalue(&self, j: i64) -> Result<f64> {
        let denom = 1.0 + self.b * j as f64;
        if denom.abs() <= POLE_TOL * (1.0 + (self.b * j as f64).abs()) {
            return Err(Error::PoleAtJ {
                lambda: self.lambda,
                b: self.b,
                j,
            });
        }
        Ok(self.lambda / denom)
    }

    /// Closed form of the paired two-sided sum over all integers.
    pub fn closed_form(&self) -> f64 {
        let t = std::f64::consts::PI / self.b;
        self.lambda * t * t.cos() / t.sin()
    }

    /// Paired partial sum through |j| <= n.
    pub fn partial_sum(&self, n: usize) -> f64 {
        let b2 = self.b * self.b;
        // Summing smallest terms first keeps the rounding floor near eps.
        let mut acc = 0.0;
        for j in (1..=n).rev() {
            let j2 = (j as f64) * (j as f64);
            acc += 2.0 / (1.0 - b2 * j2);
        }
        self.lambda * (1.0 + acc)
    }

    /// Rigorous bound on |partial_sum(n) - closed_form()|.
    pub fn tail_bound(&self, n: usize) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        2.0 * self.lambda.abs() / ((self.b * self.b - 1.0) * n as f64)
    }
}

/// A finite union of spectral branches; the regularized trace is the sum of
/// the branch traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFamily {
    branches: Vec<Branch>,
}

impl SpectrumFamily {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let branches = pairs
            .iter()
            .map(|&(lambda, b)| Branch::new(lambda, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Regularized trace truncated at index n, pairing +j with -j.
    pub fn partial_trace(&self, n: usize) -> f64 {
        self.branches.iter().map(|br| br.partial_sum(n)).sum()
    }

    /// Exact regularized trace.
    pub fn closed_form(&self) -> f64 {
        self.branches.iter().map(|br| br.closed_form()).sum()
    }

    /// Bound on the truncation error of `partial_trace(n)`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        self.branches.iter().map(|br| br.tail_bound(n)).sum()
    }

    /// Whether the trace vanishes to within `tol`; a vanishing regularized
    /// trace is the minimality certificate for the fibres this spectrum
    /// models.
    pub fn minimality_check(&self, tol: f64) -> bool {
        self.closed_form().abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_special_values() {
        // cot(pi/2) = 0, cot(pi/3) = 1/sqrt(3), cot(pi/4) = 1,
        // cot(2pi/3) = -1/sqrt(3).
        let pi = std::f64::consts::PI;
        assert!(Branch::new(1.0, 2.0).unwrap().closed_form().abs() <= 1e-14);
        assert_abs_diff_eq!(
            Branch::new(1.0, 3.0).unwrap().closed_form(),
            pi / (3.0 * 3f64.sqrt()),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Branch::new(2.0, 4.0).unwrap().closed_form(),
            2.0 * pi / 4.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Branch::new(1.0, 1.5).unwrap().closed_form(),
            -(2.0 * pi) / (3.0 * 3f64.sqrt()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn partial_sums_converge_within_tail_bound() {
        for &(lambda, b) in &[(1.0, 2.0), (1.0, 3.0), (2.0, 2.5), (-0.7, 1.3)] {
            let br = Branch::new(lambda, b).unwrap();
            let exact = br.closed_form();
            let mut prev_err = f64::INFINITY;
            for &n in &[100usize, 1_000, 10_000] {
                let err = (br.partial_sum(n) - exact).abs();
                assert!(err <= br.tail_bound(n), "err {err} bound {}", br.tail_bound(n));
                assert!(err < prev_err);
                prev_err = err;
            }
        }
    }

    #[test]
    fn paired_eigenvalues_sum_to_even_term() {
        let br = Branch::new(1.5, 2.5).unwrap();
        for j in 1..40i64 {
            let pair = br.eigenvalue(j).unwrap() + br.eigenvalue(-j).unwrap();
            let expected = 2.0 * 1.5 / (1.0 - 2.5 * 2.5 * (j * j) as f64);
            assert_abs_diff_eq!(pair, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn pole_guard_rejects_integer_reciprocal() {
        assert!(matches!(Branch::new(1.0, 1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            Branch::new(1.0, 1.0 + 5e-13),
            Err(Error::PoleAtJ { j: -1, .. })
        ));
        assert!(Branch::new(1.0, 1.0 + 1e-9).is_ok());
        assert!(matches!(Branch::new(1.0, 0.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(Branch::new(1.0, 1e13), Err(Error::PoleAtJ { .. })));
    }

    #[test]
    fn family_trace_is_additive_over_branches() {
        let fam = SpectrumFamily::new(&[(1.0, 2.0), (1.0, 3.0), (2.0, 2.5)]).unwrap();
        let by_hand: f64 = fam.branches().iter().map(|b| b.closed_form()).sum();
        assert_abs_diff_eq!(fam.closed_form(), by_hand, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fam.partial_trace(500),
            fam.branches().iter().map(|b| b.partial_sum(500)).sum(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn minimality_detects_vanishing_trace() {
        let minimal = SpectrumFamily::new(&[(3.0, 2.0)]).unwrap();
        assert!(minimal.minimality_check(1e-13));
        let non_minimal = SpectrumFamily::new(&[(1.0, 3.0)]).unwrap();
        assert!(!non_minimal.minimality_check(1e-3));
        // Two branches tuned to cancel: lambda2 = -closed1 / ((pi/b2) cot(pi/b2)).
        let c3 = Branch::new(1.0, 3.0).unwrap().closed_form();
        let c4 = Branch::new(1.0, 4.0).unwrap().closed_form();
        let fam = SpectrumFamily::new(&[(1.0, 3.0), (-c3 / c4, 4.0)]).unwrap();
        assert!(fam.minimality_check(1e-13));
    }

    #[test]
    fn reference_partials_at_ten_thousand_terms() {
        for &(lambda, b) in &[(1.0, 2.0), (1.0, 3.0), (2.0, 2.5)] {
            let fam = SpectrumFamily::new(&[(lambda, b)]).unwrap();
            assert!((fam.partial_trace(10_000) - fam.closed_form()).abs() <= 1e-3);
        }
    }
}
