//! Closed forms of the angular potential on the boundary of the (α, β) square
//! and on the `β = 0` line.
//!
//! These are independent transcriptions used to cross-check the general
//! composition `c(f̃(φ))`; the production path never calls them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::family::{AngularFamily, RadialLink};
use crate::error::{domain, Result};

/// Edge of the square `|α| + |β| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    /// `β = 1 − α`, `α ∈ (0, 1)`.
    I,
    /// `β = α − 1`, `α ∈ (0, 1)`: the Pöschl-Teller edge.
    II,
    /// `β = −(1 + α)`, `α ∈ (−1, 0)`.
    III,
    /// `β = α + 1`, `α ∈ (−1, 0)`.
    IV,
}

impl Quadrant {
    /// The `β` that puts `α` on this edge.
    pub fn beta_for(self, alpha: f64) -> f64 {
        match self {
            Quadrant::I => 1.0 - alpha,
            Quadrant::II => alpha - 1.0,
            Quadrant::III => -(1.0 + alpha),
            Quadrant::IV => alpha + 1.0,
        }
    }

    /// Edge containing `(α, β)`, if any.
    pub fn of(alpha: f64, beta: f64) -> Option<Quadrant> {
        let on = |q: Quadrant| (q.beta_for(alpha) - beta).abs() < 1e-13;
        if alpha > 0.0 && alpha < 1.0 {
            [Quadrant::I, Quadrant::II].into_iter().find(|&q| on(q))
        } else if alpha < 0.0 && alpha > -1.0 {
            [Quadrant::III, Quadrant::IV].into_iter().find(|&q| on(q))
        } else {
            None
        }
    }

    /// Open interval of `νφ` on which the closed form holds.
    pub fn nu_phi_interval(self, alpha: f64) -> (f64, f64) {
        match self {
            Quadrant::I => {
                let y = alpha.sqrt().acos();
                (y, y + PI)
            }
            Quadrant::II => (0.0, PI),
            Quadrant::III => {
                let y = (1.0 + alpha).sqrt().acos();
                (y, y + PI)
            }
            Quadrant::IV => (0.5 * PI, 1.5 * PI),
        }
    }

    /// `νφ₀`, the location of the minimum.
    pub fn nu_phi0(self, alpha: f64) -> f64 {
        match self {
            Quadrant::I => PI,
            Quadrant::II => PI - alpha.sqrt().acos(),
            Quadrant::III => 0.5 * PI,
            Quadrant::IV => PI - (-alpha).sqrt().asin(),
        }
    }
}

fn oscillator_depth(fam: &AngularFamily) -> Result<f64> {
    if !fam.link.is_oscillator_like() {
        return domain("closed boundary forms need an oscillator or Kepler (F = 0) link");
    }
    Ok(fam.link.shift() + fam.c0)
}

/// `A± = (γ + c₀)(1 ± √α)²/4`.
pub fn poschl_teller_amplitudes(gamma: f64, c0: f64, alpha: f64) -> (f64, f64) {
    let s = alpha.sqrt();
    let k = gamma + c0;
    (k * (1.0 + s).powi(2) / 4.0, k * (1.0 - s).powi(2) / 4.0)
}

/// `A₋/cos²(νφ/2) + A₊/sin²(νφ/2) − γ` on `νφ ∈ (0, π)`.
pub fn poschl_teller_value(a_plus: f64, a_minus: f64, nu: f64, gamma: f64, phi: f64) -> Result<f64> {
    let x = nu * phi;
    if !(x > 0.0 && x < PI) {
        return domain(format!("Poschl-Teller form needs nu*phi in (0, pi), got {x}"));
    }
    let (s, c) = (0.5 * x).sin_cos();
    Ok(a_minus / (c * c) + a_plus / (s * s) - gamma)
}

/// Quadrant-II trigonometric form `(γ + c₀)(cos νφ + √α)²/sin² νφ + c₀`.
pub fn quadrant_two_trig(fam: &AngularFamily, phi: f64) -> Result<f64> {
    let k = oscillator_depth(fam)?;
    let x = fam.nu() * phi;
    if !(x > 0.0 && x < PI) {
        return domain(format!("nu*phi = {x} outside (0, pi)"));
    }
    let (s, c) = x.sin_cos();
    Ok(k * (c + fam.alpha.sqrt()).powi(2) / (s * s) + fam.c0)
}

/// Boundary closed form of the potential for the edge `quadrant`.
pub fn quadrant_value(fam: &AngularFamily, quadrant: Quadrant, phi: f64) -> Result<f64> {
    let k = oscillator_depth(fam)?;
    let alpha = fam.alpha;
    if Quadrant::of(alpha, fam.beta) != Some(quadrant) {
        return domain(format!(
            "(alpha, beta) = ({alpha}, {}) is not on edge {quadrant:?}",
            fam.beta
        ));
    }
    let x = fam.nu() * phi;
    let (lo, hi) = quadrant.nu_phi_interval(alpha);
    if !(x > lo && x < hi) {
        return domain(format!("nu*phi = {x} outside ({lo}, {hi})"));
    }
    let (s, c) = x.sin_cos();
    let c0 = fam.c0;
    let v = match quadrant {
        Quadrant::II => {
            let (ap, am) = poschl_teller_amplitudes(fam.link.shift(), c0, alpha);
            poschl_teller_value(ap, am, fam.nu(), fam.link.shift(), phi)?
        }
        Quadrant::IV => {
            // Pöschl-Teller in the shifted variable νφ − π/2.
            let r = (-alpha).sqrt();
            let a_up = k * (1.0 - r).powi(2) / 4.0;
            let a_dn = k * (1.0 + r).powi(2) / 4.0;
            let (sh, ch) = (0.5 * x + 0.25 * PI).sin_cos();
            a_up / (ch * ch) + a_dn / (sh * sh) - fam.link.shift()
        }
        Quadrant::I => {
            let r = alpha.sqrt();
            if x < PI {
                k * s * s / (c - r).powi(2) + c0
            } else {
                k * s * s / (c + r).powi(2) + c0
            }
        }
        Quadrant::III => {
            let r = (-alpha).sqrt();
            if x < 0.5 * PI {
                k * c * c / (s - r).powi(2) + c0
            } else {
                k * c * c / (s + r).powi(2) + c0
            }
        }
    };
    Ok(v)
}

/// `β = 0` closed form for oscillator and Kepler links:
/// `(γ + c₀)(√a + sin 2νφ)/(√a − sin 2νφ) + c₀`.
pub fn beta_zero_oscillator(fam: &AngularFamily, phi: f64) -> Result<f64> {
    let k = oscillator_depth(fam)?;
    fam.domain_check(phi)?;
    let theta = 2.0 * fam.nu() * phi;
    let (s, c) = theta.sin_cos();
    let a = 1.0 + fam.alpha * fam.alpha - 2.0 * fam.alpha * c;
    Ok(k * (a.sqrt() + s) / (a.sqrt() - s) + fam.c0)
}

/// Expanded second form of [`beta_zero_oscillator`].
pub fn beta_zero_oscillator_expanded(fam: &AngularFamily, phi: f64) -> Result<f64> {
    let k = oscillator_depth(fam)?;
    fam.domain_check(phi)?;
    let theta = 2.0 * fam.nu() * phi;
    let (s, c) = theta.sin_cos();
    let d = (c - fam.alpha).powi(2);
    Ok(2.0 * k * (s * s + s * (s * s + d).sqrt()) / d + fam.link.shift() + 2.0 * fam.c0)
}

/// `β = 0` closed form for the generalized Kepler link (branch `c₋`).
pub fn beta_zero_kepler(fam: &AngularFamily, phi: f64) -> Result<f64> {
    let (b, f) = match fam.link {
        RadialLink::Oscillator { .. } => {
            return domain("generalized Kepler form needs a Kepler link");
        }
        RadialLink::Kepler { b } => (b, 0.0),
        RadialLink::GeneralizedKepler { b, f } => (b, f),
    };
    fam.domain_check(phi)?;
    let j = fam.j();
    let jb = j + b;
    let theta = 2.0 * fam.nu() * phi;
    let (s, c) = theta.sin_cos();
    let d = (c - fam.alpha).powi(2);
    Ok((jb * s * s + s * ((jb * jb - f) * d + jb * jb * s * s).sqrt()) / d + j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn osc(alpha: f64, beta: f64, m: u32, n: u32) -> AngularFamily {
        AngularFamily::new(alpha, beta, m, n, 0.4, RadialLink::Oscillator { gamma: 0.9 }).unwrap()
    }

    fn grid(fam: &AngularFamily, q: Quadrant, npts: usize) -> Vec<f64> {
        let (lo, hi) = q.nu_phi_interval(fam.alpha);
        (1..npts).map(|i| (lo + (hi - lo) * i as f64 / npts as f64) / fam.nu()).collect()
    }

    #[test]
    fn poschl_teller_symmetric_point() {
        let v = poschl_teller_value(1.5, 1.5, 2.0, 0.3, PI / 4.0).unwrap();
        assert!((v - (4.0 * 1.5 - 0.3)).abs() < 1e-13);
        assert!(poschl_teller_value(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn poschl_teller_equals_trig_form_and_general() {
        for &alpha in &[0.05, 0.3, 0.72, 0.99] {
            let fam = osc(alpha, alpha - 1.0, 3, 2);
            for phi in grid(&fam, Quadrant::II, 400) {
                let pt = quadrant_value(&fam, Quadrant::II, phi).unwrap();
                let trig = quadrant_two_trig(&fam, phi).unwrap();
                let gen = fam.value(phi).unwrap();
                assert!((pt - trig).abs() < 1e-12 * trig.abs(), "{alpha} {phi}");
                assert!((pt - gen).abs() < 1e-10 * gen.abs(), "{alpha} {phi} {pt} {gen}");
            }
            let phi0 = Quadrant::II.nu_phi0(alpha) / fam.nu();
            assert!((phi0 - fam.domain().phi0).abs() < 1e-14);
            assert!((quadrant_value(&fam, Quadrant::II, phi0).unwrap() - fam.c0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_edges_match_general_composition() {
        let cases = [(Quadrant::I, 0.35), (Quadrant::III, -0.6), (Quadrant::IV, -0.25), (Quadrant::I, 0.9)];
        for (q, alpha) in cases {
            let fam = osc(alpha, q.beta_for(alpha), 2, 3);
            let d = fam.domain();
            let (lo, hi) = q.nu_phi_interval(alpha);
            let nu = fam.nu();
            assert!((lo - nu * d.phi_tilde).abs() < 1e-12 && (hi - nu * d.phi_end).abs() < 1e-12);
            assert!((q.nu_phi0(alpha) - nu * d.phi0).abs() < 1e-12, "{q:?}");
            for phi in grid(&fam, q, 1000) {
                let closed = quadrant_value(&fam, q, phi).unwrap();
                let gen = fam.value(phi).unwrap();
                assert!((closed - gen).abs() < 1e-10 * gen.abs(), "{q:?} {phi} {closed} {gen}");
            }
        }
    }

    #[test]
    fn wrong_edge_is_rejected() {
        let fam = osc(0.3, 0.7, 1, 1);
        assert!(quadrant_value(&fam, Quadrant::II, 1.0).is_err());
    }

    #[test]
    fn beta_zero_forms() {
        let fam = osc(0.45, 0.0, 3, 2);
        let kep = AngularFamily::with_j(0.5, 0.0, 3, 2, 1.0, 1.0, 0.5).unwrap();
        let d = fam.domain();
        let dk = kep.domain();
        for i in 1..500 {
            let t = i as f64 / 500.0;
            let phi = d.phi_tilde + t * d.width();
            let g = fam.value(phi).unwrap();
            assert!((beta_zero_oscillator(&fam, phi).unwrap() - g).abs() < 1e-10 * g.abs());
            assert!((beta_zero_oscillator_expanded(&fam, phi).unwrap() - g).abs() < 1e-9 * g.abs());
            let phi = dk.phi_tilde + t * dk.width();
            let g = kep.value(phi).unwrap();
            assert!((beta_zero_kepler(&kep, phi).unwrap() - g).abs() < 1e-9 * g.abs(), "{phi}");
        }
    }

    #[test]
    fn kepler_two_thirds_domain() {
        // α = 1/2, ν = 2/3 gives the interval (π/4, 7π/4).
        let kep = AngularFamily::with_j(0.5, 0.0, 3, 2, 1.0, 1.0, 0.5).unwrap();
        let d = kep.domain();
        assert!((d.phi_tilde - PI / 4.0).abs() < 1e-14);
        assert!((d.phi_end - 7.0 * PI / 4.0).abs() < 1e-14);
    }
}
