//! Metric functions of the constant-curvature plane in geodesic polar
//! coordinates, `ds² = dr² + s_k(r)² dφ²`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Gaussian curvature `k` of the configuration space (units 1/length²).
///
/// `k > 0` is the sphere of radius `1/√k`, `k = 0` the Euclidean plane and
/// `k < 0` the hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Curvature(pub f64);

impl Curvature {
    pub const FLAT: Curvature = Curvature(0.0);

    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return domain(format!("curvature must be finite, got {k}"));
        }
        Ok(Curvature(k))
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    /// Upper end of the geodesic polar chart: `π/√k` on the sphere, infinite otherwise.
    pub fn chart_limit(self) -> f64 {
        if self.0 > 0.0 {
            std::f64::consts::PI / self.0.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn check(self, r: f64) -> Result<()> {
        if !(r >= 0.0) || !r.is_finite() {
            return domain(format!("radius must be finite and non-negative, got {r}"));
        }
        if r >= self.chart_limit() {
            return domain(format!(
                "radius {r} outside the polar chart r < {} for k = {}",
                self.chart_limit(),
                self.0
            ));
        }
        Ok(())
    }

    /// `s_k(r)`: `sin(√k r)/√k`, `r` or `sinh(√-k r)/√-k`.
    pub fn s(self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.s_unchecked(r))
    }

    /// `d s_k / dr`: `cos(√k r)`, `1` or `cosh(√-k r)`.
    pub fn s_prime(self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.s_prime_unchecked(r))
    }

    #[inline]
    pub(crate) fn s_unchecked(self, r: f64) -> f64 {
        let k = self.0;
        if k > 0.0 {
            let sk = k.sqrt();
            (sk * r).sin() / sk
        } else if k < 0.0 {
            let sk = (-k).sqrt();
            (sk * r).sinh() / sk
        } else {
            r
        }
    }

    #[inline]
    pub(crate) fn s_prime_unchecked(self, r: f64) -> f64 {
        let k = self.0;
        if k > 0.0 {
            (k.sqrt() * r).cos()
        } else if k < 0.0 {
            ((-k).sqrt() * r).cosh()
        } else {
            1.0
        }
    }

    /// Logarithmic derivative `q(r) = s_k'(r)/s_k(r)`.
    ///
    /// This is `√k cot(√k r)`, `1/r` or `√-k coth(√-k r)`; it satisfies
    /// `1/s_k² = q² + k` and `q' = -(q² + k)`.
    pub fn cot(self, r: f64) -> Result<f64> {
        self.check(r)?;
        if r == 0.0 {
            return domain("cot_k is singular at r = 0");
        }
        let k = self.0;
        if k > 0.0 {
            let sk = k.sqrt();
            Ok(sk / (sk * r).tan())
        } else if k < 0.0 {
            // coth via tanh stays finite where sinh and cosh overflow
            let sk = (-k).sqrt();
            Ok(sk / (sk * r).tanh())
        } else {
            Ok(1.0 / r)
        }
    }

    /// `1 / s_k(r)²`, the inverse-square metric factor in front of the angular terms.
    pub fn inv_s2(self, r: f64) -> Result<f64> {
        self.check(r)?;
        let s = self.s_unchecked(r);
        if s == 0.0 {
            return domain("1/s_k² is singular at r = 0");
        }
        Ok(1.0 / (s * s))
    }
}

/// Free-function form of [`Curvature::s`].
pub fn s_k(curv: Curvature, r: f64) -> Result<f64> {
    curv.s(r)
}

/// Free-function form of [`Curvature::s_prime`].
pub fn s_k_prime(curv: Curvature, r: f64) -> Result<f64> {
    curv.s_prime(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn branch_examples() {
        assert_eq!(s_k(Curvature(0.0), 2.5).unwrap(), 2.5);
        assert!((s_k(Curvature(1.0), PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s_k(Curvature(-1.0), 0.0).unwrap(), 0.0);
        assert_eq!(s_k_prime(Curvature(0.0), 7.0).unwrap(), 1.0);
        assert_eq!(s_k_prime(Curvature(1.0), 0.0).unwrap(), 1.0);
        assert!((s_k_prime(Curvature(-1.0), 1.0).unwrap() - 1f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn chart_bound_is_strict() {
        let k = Curvature(4.0);
        assert!(k.s(PI / 2.0).is_err());
        assert!(k.s(PI / 2.0 - 1e-9).is_ok());
        assert!(k.s(-0.1).is_err());
        assert!(Curvature(-3.0).s(1e3).is_ok());
        assert!(Curvature::new(f64::NAN).is_err());
    }

    #[test]
    fn continuous_in_k() {
        for &eps in &[1e-8, -1e-8] {
            for i in 1..=50 {
                let r = i as f64 * 0.1;
                let flat = s_k(Curvature(0.0), r).unwrap();
                let near = s_k(Curvature(eps), r).unwrap();
                assert!((near - flat).abs() <= 1e-6 * flat, "r={r} eps={eps}");
                let dflat = s_k_prime(Curvature(0.0), r).unwrap();
                let dnear = s_k_prime(Curvature(eps), r).unwrap();
                assert!((dnear - dflat).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        for &k in &[1.0, 0.0, -1.0, 0.3, -2.5] {
            let c = Curvature(k);
            for &r in &[0.2, 0.7, 1.3] {
                let exact = c.s_prime(r).unwrap();
                let mut prev_err = f64::INFINITY;
                for &h in &[1e-3, 1e-4] {
                    let fd = (c.s(r + h).unwrap() - c.s(r - h).unwrap()) / (2.0 * h);
                    let err = (fd - exact).abs();
                    // O(h²): the error must shrink roughly a hundredfold per decade.
                    assert!(err < 2.0 * h * h * (1.0 + k.abs()) * 10.0, "k={k} r={r} h={h} err={err}");
                    // In the flat chart the difference quotient is exact up to rounding.
                    assert!(err < prev_err || err < 1e-12);
                    prev_err = err;
                }
                for &h in &[1e-5, 1e-6] {
                    let fd = (c.s(r + h).unwrap() - c.s(r - h).unwrap()) / (2.0 * h);
                    assert!((fd - exact).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn cot_identities() {
        for &k in &[1.0, 0.0, -1.0] {
            let c = Curvature(k);
            for &r in &[0.3, 1.1, 2.0] {
                let q = c.cot(r).unwrap();
                assert!((c.inv_s2(r).unwrap() - (q * q + k)).abs() < 1e-12 * (q * q + k.abs()));
            }
        }
        assert!(Curvature(0.0).cot(0.0).is_err());
    }
}
