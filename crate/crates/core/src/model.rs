//! A separable Hamiltonian: curvature, radial potential and angular potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::potentials::{AngularFamily, RadialPotential};

/// The angular part `c(φ)` of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularPotential {
    /// `c ≡ 0`: the angle rotates freely.
    Central,
    Family(AngularFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub curvature: Curvature,
    pub radial: RadialPotential,
    pub angular: AngularPotential,
}

impl Model {
    pub fn new(curvature: Curvature, radial: RadialPotential, angular: AngularPotential) -> Result<Self> {
        let m = Model { curvature, radial, angular };
        m.validate()?;
        Ok(m)
    }

    pub fn with_family(curvature: Curvature, radial: RadialPotential, fam: AngularFamily) -> Result<Self> {
        Self::new(curvature, radial, AngularPotential::Family(fam))
    }

    pub fn central(curvature: Curvature, radial: RadialPotential) -> Result<Self> {
        Self::new(curvature, radial, AngularPotential::Central)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.curvature.k().is_finite() {
            return Err(Error::InvalidParameters("curvature must be finite".into()));
        }
        self.radial.validate()?;
        if let AngularPotential::Family(fam) = &self.angular {
            fam.checked()?;
        }
        Ok(())
    }

    pub fn family(&self) -> Option<&AngularFamily> {
        match &self.angular {
            AngularPotential::Family(f) => Some(f),
            AngularPotential::Central => None,
        }
    }

    /// True when the family was built from this model's radial potential.
    pub fn is_linked(&self) -> bool {
        match (self.family(), self.radial.link()) {
            (Some(f), Some(link)) => f.link == link,
            _ => false,
        }
    }

    /// Smallest admissible value of the angular separation constant.
    pub fn l_min(&self) -> f64 {
        self.family().map_or(0.0, |f| f.c0)
    }

    /// `c(φ)` (zero for a central model).
    pub fn angular_value(&self, phi: f64) -> Result<f64> {
        match &self.angular {
            AngularPotential::Central => Ok(0.0),
            AngularPotential::Family(f) => f.value(phi),
        }
    }

    /// `(c(φ), c'(φ))`.
    pub fn angular_value_and_derivative(&self, phi: f64) -> Result<(f64, f64)> {
        match &self.angular {
            AngularPotential::Central => Ok((0.0, 0.0)),
            AngularPotential::Family(f) => f.value_and_derivative(phi),
        }
    }

    /// Effective radial potential `a^k(r) + L / s_k²(r)`.
    pub fn effective(&self, r: f64, l: f64) -> Result<f64> {
        Ok(self.radial.value(self.curvature, r)? + l * self.curvature.inv_s2(r)?)
    }

    /// Derivative of [`effective`](Self::effective) with respect to `r`.
    pub fn effective_derivative(&self, r: f64, l: f64) -> Result<f64> {
        let (_, da) = self.radial.value_and_derivative(self.curvature, r)?;
        let q = self.curvature.cot(r)?;
        Ok(da - 2.0 * l * q * (q * q + self.curvature.k()))
    }

    /// Largest radius available to the radial motion.
    pub fn radial_limit(&self) -> f64 {
        self.radial.outer_limit(self.curvature)
    }
}
