//! Radial potentials `a^k(r)` whose radial action has an `E`-independent
//! `L`-derivative: the oscillator family and the generalized Kepler family,
//! both written on the sphere, the plane and the hyperbolic plane.
//!
//! With `q(r) = s_k'(r)/s_k(r)` (so `q² = |k| cot²` on the sphere,
//! `1/r²` on the plane, `|k| coth²` on the hyperbolic plane) all three
//! curvature branches collapse into one expression:
//!
//! ```text
//! oscillator:          a = γ q² + ω / q²
//! generalized Kepler:  a = B q² − q √(D + F q²)
//! ```

use serde::{Deserialize, Serialize};

use super::family::RadialLink;
use crate::error::{domain, Error, Result};
use crate::geometry::Curvature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialPotential {
    /// Isotropic oscillator and its curved counterparts.
    Oscillator { gamma: f64, omega: f64 },
    /// Generalized Kepler potential; `f = 0` is the ordinary Kepler problem.
    GeneralizedKepler { b: f64, d: f64, f: f64 },
    /// `coefficient · r^exponent` in the flat chart. Not superintegrable for
    /// exponents other than 2 and -1; used as a negative control.
    PowerLaw { coefficient: f64, exponent: f64 },
}

impl RadialPotential {
    pub fn oscillator(gamma: f64, omega: f64) -> Self {
        RadialPotential::Oscillator { gamma, omega }
    }

    pub fn kepler(b: f64, d: f64, f: f64) -> Self {
        RadialPotential::GeneralizedKepler { b, d, f }
    }

    /// Non-negativity of `γ, ω, B, D, F`.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| -> Result<()> {
            if !(v >= 0.0) || !v.is_finite() {
                Err(Error::InvalidParameters(format!(
                    "radial parameter {name} must be finite and >= 0, got {v}"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            RadialPotential::Oscillator { gamma, omega } => {
                bad("gamma", gamma)?;
                bad("omega", omega)
            }
            RadialPotential::GeneralizedKepler { b, d, f } => {
                bad("B", b)?;
                bad("D", d)?;
                bad("F", f)
            }
            RadialPotential::PowerLaw { coefficient, exponent } => {
                if !coefficient.is_finite() || !exponent.is_finite() {
                    return Err(Error::InvalidParameters("power law must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// The angular-family link induced by this radial potential, if any.
    pub fn link(&self) -> Option<RadialLink> {
        match *self {
            RadialPotential::Oscillator { gamma, .. } => Some(RadialLink::Oscillator { gamma }),
            RadialPotential::GeneralizedKepler { b, f: 0.0, .. } => {
                Some(RadialLink::Kepler { b })
            }
            RadialPotential::GeneralizedKepler { b, f, .. } => {
                Some(RadialLink::GeneralizedKepler { b, f })
            }
            RadialPotential::PowerLaw { .. } => None,
        }
    }

    /// `a^k(r)`.
    pub fn value(&self, curv: Curvature, r: f64) -> Result<f64> {
        Ok(self.value_and_derivative(curv, r)?.0)
    }

    /// `(a^k(r), d a^k / dr)`.
    pub fn value_and_derivative(&self, curv: Curvature, r: f64) -> Result<(f64, f64)> {
        if let RadialPotential::PowerLaw { coefficient, exponent } = *self {
            if !(r > 0.0) {
                return domain(format!("power-law potential needs r > 0, got {r}"));
            }
            let v = coefficient * r.powf(exponent);
            return Ok((v, exponent * v / r));
        }
        let q = curv.cot(r)?;
        let dq = -(q * q + curv.k());
        match *self {
            RadialPotential::Oscillator { gamma, omega } => {
                if omega != 0.0 && q.abs() <= 1e-14 * (q * q + curv.k()).sqrt() {
                    return domain(format!("oscillator potential diverges at r = {r}"));
                }
                let q2 = q * q;
                let v = gamma * q2 + if omega != 0.0 { omega / q2 } else { 0.0 };
                let dv_dq = 2.0 * gamma * q - if omega != 0.0 { 2.0 * omega / (q2 * q) } else { 0.0 };
                if !v.is_finite() {
                    return domain(format!("oscillator potential diverges at r = {r}"));
                }
                Ok((v, dv_dq * dq))
            }
            RadialPotential::GeneralizedKepler { b, d, f } => {
                let root = (d + f * q * q).sqrt();
                let v = b * q * q - q * root;
                let dv_dq = if root > 0.0 {
                    2.0 * b * q - root - f * q * q / root
                } else {
                    2.0 * b * q
                };
                Ok((v, dv_dq * dq))
            }
            RadialPotential::PowerLaw { .. } => unreachable!(),
        }
    }

    /// Radial force-free limit used by the bracket search: the largest radius
    /// the motion may reach on this chart.
    pub(crate) fn outer_limit(&self, curv: Curvature) -> f64 {
        match *self {
            RadialPotential::Oscillator { omega, .. } if omega > 0.0 && curv.k() > 0.0 => {
                0.5 * curv.chart_limit()
            }
            _ => curv.chart_limit(),
        }
    }
}

/// Free-function form of [`RadialPotential::value`].
pub fn radial_value(pot: &RadialPotential, curv: Curvature, r: f64) -> Result<f64> {
    pot.value(curv, r)
}
