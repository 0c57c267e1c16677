//! Action variables, turning points, `∂J_r/∂L` and the angular period `T(L)`.
//!
//! Every quadrature here runs through [`integrate_gap`], which absorbs the
//! square-root behaviour of the momenta at the turning points.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{AngularPotential, Model};
use crate::potentials::{AngularFamily, RadialLink};
use crate::quadrature::{integrate_gap, GapPower, QuadResult, TurningMap};
use crate::roots::{bisect, golden_min};

/// Relative tolerance of every action, period and phase quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Energy gap below which a radial orbit is treated as circular.
const CIRCULAR_GAP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConstants {
    /// Total energy.
    pub e: f64,
    /// Value of the angular integral `l = p_φ²/2 + c(φ)`.
    pub l: f64,
}

impl SeparationConstants {
    pub fn new(e: f64, l: f64) -> Self {
        SeparationConstants { e, l }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionPair {
    pub j_r: f64,
    pub j_phi: f64,
    pub at: SeparationConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub r_min: f64,
    pub r_max: f64,
    /// Minimum of the effective radial potential.
    pub r_star: f64,
    /// Libration range of the angle; `None` when the angle rotates freely.
    pub phi_range: Option<(f64, f64)>,
}

/// Check `L` against the bounded-motion requirements of the radial link.
pub fn check_link_constants(link: RadialLink, l: f64) -> Result<()> {
    match link {
        RadialLink::Oscillator { gamma } if !(l + gamma > 0.0) => {
            domain(format!("L + gamma = {} must be > 0", l + gamma))
        }
        RadialLink::Kepler { .. } | RadialLink::GeneralizedKepler { .. } => {
            let v = l + link.shift() - link.sqrt_f();
            if v > 0.0 {
                Ok(())
            } else {
                domain(format!("L + B - sqrt(F) = {v} must be > 0"))
            }
        }
        _ => Ok(()),
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Location of the minimum of the effective potential at angular constant `l`.
pub fn effective_minimum(model: &Model, l: f64) -> Result<f64> {
    let limit = model.radial_limit();
    let finite = limit.is_finite();
    let to_r = |u: f64| if finite { limit * logistic(u) } else { u.exp() };
    let v = |u: f64| model.effective(to_r(u), l).unwrap_or(f64::INFINITY);
    let (u_lo, u_hi, n) = (-30.0, 30.0, 1200);
    let us: Vec<f64> = (0..=n).map(|i| u_lo + (u_hi - u_lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = us.iter().map(|&u| v(u)).collect();
    let (imin, vmin) = vs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &x)| (i, x))
        .expect("scan is non-empty");
    // A minimum on the plateau at the chart edge is an asymptote, not a well.
    let flat_tail = vs[n] - vmin <= 1e-12 * vmin.abs().max(1.0);
    if !vmin.is_finite() || imin == 0 || imin == n || flat_tail {
        return Err(Error::NoBoundedMotion(format!(
            "effective potential has no interior minimum at L = {l}"
        )));
    }
    let u = golden_min(v, us[imin - 1], us[imin + 1], 1e-12);
    // Sharpen with bisection on V' when it changes sign around the estimate.
    let (a, b) = (to_r(us[imin - 1]), to_r(us[imin + 1]));
    let dv = |r: f64| model.effective_derivative(r, l).unwrap_or(f64::NAN);
    if dv(a) < 0.0 && dv(b) > 0.0 {
        return bisect(dv, a, b);
    }
    Ok(to_r(u))
}

fn expand_to_sign_change<F: FnMut(f64) -> f64>(mut g: F, from: f64, towards: f64) -> Result<(f64, f64)> {
    let mut inside = from;
    for j in 1..200 {
        let x = from + (towards - from) * (1.0 - 0.5f64.powi(j));
        if x == inside {
            break;
        }
        if !(g(x) > 0.0) {
            return Ok((inside, x));
        }
        inside = x;
    }
    Err(Error::NoBoundedMotion(format!(
        "no turning point between {from} and {towards}"
    )))
}

/// `(r_min, r_max, r*)`: roots of `E − a^k(r) − L/s_k²(r)` around the well minimum `r*`.
pub fn radial_turning_points(model: &Model, consts: SeparationConstants) -> Result<(f64, f64, f64)> {
    let SeparationConstants { e, l } = consts;
    let r_star = effective_minimum(model, l)?;
    let v_star = model.effective(r_star, l)?;
    let gap = e - v_star;
    let scale = e.abs().max(v_star.abs()).max(1.0);
    if gap < -CIRCULAR_GAP * scale {
        return Err(Error::NoBoundedMotion(format!(
            "E = {e} lies below the effective-potential minimum {v_star} at L = {l}"
        )));
    }
    if gap <= CIRCULAR_GAP * scale {
        return Ok((r_star, r_star, r_star));
    }
    let g = |r: f64| match model.effective(r, l) {
        Ok(v) => e - v,
        Err(_) => -1.0,
    };
    let (a, b) = expand_to_sign_change(g, r_star, 0.0)?;
    let r_min = bisect(g, b, a)?;
    let limit = model.radial_limit();
    let (a, b) = if limit.is_finite() {
        expand_to_sign_change(g, r_star, limit)?
    } else {
        let mut inside = r_star;
        let mut found = None;
        for j in 1..120 {
            let r = r_star * 2f64.powi(j);
            if !(g(r) > 0.0) {
                found = Some((inside, r));
                break;
            }
            inside = r;
        }
        found.ok_or_else(|| {
            Error::NoBoundedMotion(format!("radial motion unbounded at E = {e}, L = {l}"))
        })?
    };
    let r_max = bisect(g, a, b)?;
    Ok((r_min, r_max, r_star))
}

/// `(φ_min, φ_max)`: roots of `L − c(φ)` on either side of `φ₀`.
pub fn angular_turning_points(fam: &AngularFamily, l: f64) -> Result<(f64, f64)> {
    let dom = fam.domain();
    let depth = l - fam.c0;
    if depth < 0.0 {
        return Err(Error::NoBoundedMotion(format!("L = {l} below the well minimum c0 = {}", fam.c0)));
    }
    if depth == 0.0 {
        return Ok((dom.phi0, dom.phi0));
    }
    let g = |phi: f64| match fam.excess(phi) {
        Ok(x) => depth - x,
        Err(_) => -1.0,
    };
    let (a, b) = expand_to_sign_change(g, dom.phi0, dom.phi_tilde)?;
    let lo = bisect(g, b, a)?;
    let (a, b) = expand_to_sign_change(g, dom.phi0, dom.phi_end)?;
    let hi = bisect(g, a, b)?;
    Ok((lo, hi))
}

pub fn turning_points(model: &Model, consts: SeparationConstants) -> Result<TurningPoints> {
    let (r_min, r_max, r_star) = radial_turning_points(model, consts)?;
    let phi_range = match &model.angular {
        AngularPotential::Central => None,
        AngularPotential::Family(f) => Some(angular_turning_points(f, consts.l)?),
    };
    Ok(TurningPoints { r_min, r_max, r_star, phi_range })
}

/// A radial libration `[r_min, r_max]` at fixed `(E, L)`, ready for quadrature.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialLibration<'a> {
    pub model: &'a Model,
    pub consts: SeparationConstants,
    pub r_min: f64,
    pub r_max: f64,
    pub r_star: f64,
    slopes: (f64, f64),
}

impl<'a> RadialLibration<'a> {
    pub fn new(model: &'a Model, consts: SeparationConstants) -> Result<Self> {
        let (r_min, r_max, r_star) = radial_turning_points(model, consts)?;
        let slopes = if r_min < r_max {
            (
                -model.effective_derivative(r_min, consts.l)?,
                model.effective_derivative(r_max, consts.l)?,
            )
        } else {
            (0.0, 0.0)
        };
        Ok(RadialLibration { model, consts, r_min, r_max, r_star, slopes })
    }

    pub fn is_circular(&self) -> bool {
        self.r_min == self.r_max
    }

    /// `∫_{r0}^{r1} w(r) g(r)^{±1/2} dr` with `g = E − a^k − L/s_k²`.
    pub fn integrate<W: Fn(f64) -> f64>(&self, weight: W, power: GapPower, r0: f64, r1: f64) -> Result<QuadResult> {
        self.integrate_abs(weight, power, r0, r1, 0.0)
    }

    /// As [`integrate`](Self::integrate) with an absolute error floor.
    pub fn integrate_abs<W: Fn(f64) -> f64>(
        &self,
        weight: W,
        power: GapPower,
        r0: f64,
        r1: f64,
        abs_tol: f64,
    ) -> Result<QuadResult> {
        integrate_gap(
            |r| radial_gap(self.model, self.consts, r),
            weight,
            power,
            TurningMap::new(self.r_min, self.r_max),
            self.slopes,
            r0,
            r1,
            &[self.r_star],
            QUAD_TOL,
            abs_tol,
        )
    }
}

/// An angular libration `[φ_min, φ_max]` at fixed `L`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AngularLibration<'a> {
    pub fam: &'a AngularFamily,
    pub l: f64,
    pub lo: f64,
    pub hi: f64,
    slopes: (f64, f64),
}

impl<'a> AngularLibration<'a> {
    pub fn new(fam: &'a AngularFamily, l: f64) -> Result<Self> {
        let (lo, hi) = angular_turning_points(fam, l)?;
        let slopes = if lo < hi {
            (-fam.value_and_derivative(lo)?.1, fam.value_and_derivative(hi)?.1)
        } else {
            (0.0, 0.0)
        };
        Ok(AngularLibration { fam, l, lo, hi, slopes })
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `∫_{φ0}^{φ1} w(φ) (L − c(φ))^{±1/2} dφ`, split at the minimum.
    pub fn integrate<W: Fn(f64) -> f64>(&self, weight: W, power: GapPower, x0: f64, x1: f64) -> Result<QuadResult> {
        self.integrate_abs(weight, power, x0, x1, 0.0)
    }

    /// As [`integrate`](Self::integrate) with an absolute error floor, for
    /// integrals that cancel to zero.
    pub fn integrate_abs<W: Fn(f64) -> f64>(
        &self,
        weight: W,
        power: GapPower,
        x0: f64,
        x1: f64,
        abs_tol: f64,
    ) -> Result<QuadResult> {
        integrate_gap(
            |phi| angular_gap(self.fam, self.l, phi),
            weight,
            power,
            TurningMap::new(self.lo, self.hi),
            self.slopes,
            x0,
            x1,
            &[self.fam.domain().phi0],
            QUAD_TOL,
            abs_tol,
        )
    }
}

/// Radial kinetic energy `E − a^k(r) − L/s_k²(r)`.
pub(crate) fn radial_gap(model: &Model, consts: SeparationConstants, r: f64) -> f64 {
    match model.effective(r, consts.l) {
        Ok(v) => (consts.e - v).max(0.0),
        Err(_) => 0.0,
    }
}

/// `J_r = (1/π) ∫ √(2(E − a^k − L/s_k²)) dr`.
pub fn radial_action_quadrature(model: &Model, consts: SeparationConstants) -> Result<f64> {
    let lib = RadialLibration::new(model, consts)?;
    if lib.is_circular() {
        return Ok(0.0);
    }
    let q = lib.integrate(|_| SQRT_2, GapPower::Sqrt, lib.r_min, lib.r_max)?;
    Ok(q.value / PI)
}

/// `∂J_r/∂L = −(1/π) ∫ dr / (s_k² √(2(E − a^k − L/s_k²)))` by quadrature.
pub fn dj_r_dl_quadrature(model: &Model, consts: SeparationConstants) -> Result<f64> {
    let lib = RadialLibration::new(model, consts)?;
    if lib.is_circular() {
        return domain("dJr/dL quadrature needs a non-circular orbit");
    }
    let curv = model.curvature;
    let q = lib.integrate(
        |r| curv.inv_s2(r).unwrap_or(0.0) / SQRT_2,
        GapPower::InvSqrt,
        lib.r_min,
        lib.r_max,
    )?;
    Ok(-q.value / PI)
}

/// Closed form of `∂J_r/∂L` for the superintegrable radial potentials.
pub fn dj_r_dl_link(link: RadialLink, l: f64) -> Result<f64> {
    check_link_constants(link, l)?;
    Ok(match link {
        RadialLink::Oscillator { gamma } => -1.0 / (2.0 * SQRT_2 * (l + gamma).sqrt()),
        _ => {
            let (b, sf) = (link.shift(), link.sqrt_f());
            -(1.0 / (l + b + sf).sqrt() + 1.0 / (l + b - sf).sqrt()) / (2.0 * SQRT_2)
        }
    })
}

/// `∂J_r/∂L` of a model from its radial potential, independent of `E`.
pub fn dj_r_dl(model: &Model, consts: SeparationConstants) -> Result<f64> {
    let link = model
        .radial
        .link()
        .ok_or_else(|| Error::InvalidParameters("power-law potentials have no closed dJr/dL".into()))?;
    dj_r_dl_link(link, consts.l)
}

/// Flat-space closed forms of `J_r` (oscillator; Kepler with `F = 0`).
pub fn radial_action_closed_flat(model: &Model, consts: SeparationConstants) -> Result<f64> {
    if model.curvature.k() != 0.0 {
        return domain("closed radial action is only available in the flat case");
    }
    let SeparationConstants { e, l } = consts;
    match model.radial {
        crate::potentials::RadialPotential::Oscillator { gamma, omega } if omega > 0.0 => {
            Ok(e / (2.0 * (2.0 * omega).sqrt()) - (2.0 * (l + gamma)).sqrt() / 2.0)
        }
        crate::potentials::RadialPotential::GeneralizedKepler { b, d, f } if f == 0.0 && e < 0.0 => {
            Ok(d.sqrt() / (-2.0 * e).sqrt() - (2.0 * (l + b)).sqrt())
        }
        _ => domain("no closed radial action for this potential"),
    }
}

/// Integrand helper: `L − c(φ)` computed from the excess over `c₀`.
pub(crate) fn angular_gap(fam: &AngularFamily, l: f64, phi: f64) -> f64 {
    match fam.excess(phi) {
        Ok(x) => (l - fam.c0 - x).max(0.0),
        Err(_) => 0.0,
    }
}

/// `J_φ = (1/π) ∫ √(2(L − c(φ))) dφ` over the libration.
pub fn angular_action_quadrature(fam: &AngularFamily, l: f64) -> Result<f64> {
    let lib = AngularLibration::new(fam, l)?;
    if lib.is_degenerate() {
        return Ok(0.0);
    }
    Ok(lib.integrate(|_| SQRT_2, GapPower::Sqrt, lib.lo, lib.hi)?.value / PI)
}

fn kepler_radicals(fam: &AngularFamily, x: f64) -> f64 {
    let (b, sf) = (fam.link.shift(), fam.link.sqrt_f());
    (x + b + sf).sqrt() + (x + b - sf).sqrt()
}

/// Closed-form `J_φ(L)`; depends on `ν` and the link only.
pub fn angular_action_closed(fam: &AngularFamily, l: f64) -> Result<f64> {
    if !(l >= fam.c0) {
        return domain(format!("L = {l} must be >= c0 = {}", fam.c0));
    }
    if l == fam.c0 {
        return Ok(0.0);
    }
    check_link_constants(fam.link, l)?;
    let nu = fam.nu();
    Ok(match fam.link {
        RadialLink::Oscillator { gamma } => SQRT_2 / nu * ((l + gamma).sqrt() - (fam.c0 + gamma).sqrt()),
        _ => SQRT_2 / (2.0 * nu) * (kepler_radicals(fam, l) - kepler_radicals(fam, fam.c0)),
    })
}

/// `dJ_φ/dL` from the closed form.
pub fn dj_phi_dl(fam: &AngularFamily, l: f64) -> Result<f64> {
    check_link_constants(fam.link, l)?;
    let nu = fam.nu();
    Ok(match fam.link {
        RadialLink::Oscillator { gamma } => 1.0 / (SQRT_2 * nu * (l + gamma).sqrt()),
        _ => {
            let (b, sf) = (fam.link.shift(), fam.link.sqrt_f());
            SQRT_2 / (4.0 * nu) * (1.0 / (l + b + sf).sqrt() + 1.0 / (l + b - sf).sqrt())
        }
    })
}

/// `T(L) = √2 ∫ dφ / √(L − c(φ))` by quadrature.
pub fn period_quadrature(fam: &AngularFamily, l: f64) -> Result<f64> {
    let lib = AngularLibration::new(fam, l)?;
    if lib.is_degenerate() {
        return period_closed(fam, l);
    }
    Ok(SQRT_2 * lib.integrate(|_| 1.0, GapPower::InvSqrt, lib.lo, lib.hi)?.value)
}

/// `T(L) = 2π dJ_φ/dL` from the closed action.
pub fn period_closed(fam: &AngularFamily, l: f64) -> Result<f64> {
    Ok(2.0 * PI * dj_phi_dl(fam, l)?)
}

/// `T(L) = −2π (m/n) ∂J_r/∂L` with `∂J_r/∂L` of the linked radial potential.
pub fn period_from_radial(fam: &AngularFamily, l: f64) -> Result<f64> {
    Ok(-2.0 * PI * fam.m_over_n() * dj_r_dl_link(fam.link, l)?)
}

/// `J_φ` of any model: libration action for families, `|p_φ| = √(2L)` for central ones.
pub fn angular_action(model: &Model, l: f64) -> Result<f64> {
    match &model.angular {
        AngularPotential::Central => {
            if l < 0.0 {
                return domain("central models need L >= 0");
            }
            Ok((2.0 * l).sqrt())
        }
        AngularPotential::Family(f) => angular_action_quadrature(f, l),
    }
}

pub fn actions(model: &Model, consts: SeparationConstants) -> Result<ActionPair> {
    Ok(ActionPair {
        j_r: radial_action_quadrature(model, consts)?,
        j_phi: angular_action(model, consts.l)?,
        at: consts,
    })
}

/// `(first, second)` parts of the period split by the substitution
/// `2νφ = 2π ± arccos f(c) − arccos(α f(c) + β)`: the first reproduces `T(L)`,
/// the second collects the `arccos(α f + β)` term and vanishes over a libration.
pub fn substitution_split(fam: &AngularFamily, l: f64) -> Result<(f64, f64)> {
    let lib = AngularLibration::new(fam, l)?;
    let phi0 = fam.domain().phi0;
    let nu = fam.nu();
    let (alpha, beta) = (fam.alpha, fam.beta);
    // dG/dc with G(c) = arccos(α f(c) + β)
    let dg_dc = |c: f64| {
        let f = fam.f_of_c_unchecked(c);
        let u = (alpha * f + beta).clamp(-1.0, 1.0);
        -alpha * fam.df_dc(c) / (1.0 - u * u).max(1e-300).sqrt()
    };
    let first = lib
        .integrate(
            |phi| {
                let (c, dc) = fam.value_and_derivative(phi).unwrap_or((l, 0.0));
                let f = fam.f_of_c_unchecked(c).clamp(-1.0, 1.0);
                // d(arccos f)/dφ = −f'(c) c'(φ) / √(1 − f²), signed per branch
                let s = if phi < phi0 { -1.0 } else { 1.0 };
                s * -fam.df_dc(c) * dc / (1.0 - f * f).max(1e-300).sqrt() / (2.0 * nu)
            },
            GapPower::InvSqrt,
            lib.lo,
            lib.hi,
        )?
        .value;
    let second = lib
        .integrate_abs(
            |phi| {
                let (c, dc) = fam.value_and_derivative(phi).unwrap_or((l, 0.0));
                -dg_dc(c) * dc / (2.0 * nu)
            },
            GapPower::InvSqrt,
            lib.lo,
            lib.hi,
            QUAD_TOL * first.abs(),
        )?
        .value;
    Ok((SQRT_2 * first, SQRT_2 * second))
}

/// Outcome of [`action_combination_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationReport {
    pub e: f64,
    pub m: u32,
    pub n: u32,
    /// `(L, m J_r + n J_φ)` at each grid point.
    pub values: Vec<(f64, f64)>,
    pub mean: f64,
    /// `(max − min) / max(|mean|, 1)`.
    pub spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Spread of `m J_r(E, L) + n J_φ(L)` over an `L` grid at fixed `E`.
pub fn action_combination_check(
    model: &Model,
    e: f64,
    l_grid: &[f64],
    m: u32,
    n: u32,
    tolerance: f64,
) -> Result<CombinationReport> {
    use rayon::prelude::*;
    let values: Vec<(f64, f64)> = l_grid
        .par_iter()
        .map(|&l| {
            let a = actions(model, SeparationConstants::new(e, l))?;
            Ok((l, m as f64 * a.j_r + n as f64 * a.j_phi))
        })
        .collect::<Result<_>>()?;
    let vs: Vec<f64> = values.iter().map(|v| v.1).collect();
    let mean = vs.iter().sum::<f64>() / vs.len().max(1) as f64;
    let max = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / mean.abs().max(1.0);
    Ok(CombinationReport { e, m, n, values, mean, spread, tolerance, pass: spread < tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curvature;
    use crate::potentials::RadialPotential;

    fn flat_osc() -> Model {
        Model::central(Curvature::FLAT, RadialPotential::oscillator(0.0, 1.0)).unwrap()
    }

    #[test]
    fn circular_threshold() {
        let (lo, hi, _) = radial_turning_points(&flat_osc(), SeparationConstants::new(2.0, 1.0)).unwrap();
        assert!((lo - 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7);
        assert_eq!(radial_action_quadrature(&flat_osc(), SeparationConstants::new(2.0, 1.0)).unwrap(), 0.0);
        assert!(matches!(
            radial_turning_points(&flat_osc(), SeparationConstants::new(1.9, 1.0)),
            Err(Error::NoBoundedMotion(_))
        ));
    }

    #[test]
    fn kepler_roots() {
        let m = Model::central(Curvature::FLAT, RadialPotential::kepler(0.0, 1.0, 0.0)).unwrap();
        let (lo, hi, _) = radial_turning_points(&m, SeparationConstants::new(-0.125, 1.0)).unwrap();
        assert!((lo - (4.0 - 2.0 * SQRT_2)).abs() < 1e-14);
        assert!((hi - (4.0 + 2.0 * SQRT_2)).abs() < 1e-13);
    }

    #[test]
    fn radial_closed_forms() {
        let c = SeparationConstants::new(5.0, 1.3);
        let q = radial_action_quadrature(&flat_osc(), c).unwrap();
        let e = radial_action_closed_flat(&flat_osc(), c).unwrap();
        assert!((q - e).abs() < 1e-12 * e, "{q} {e}");
        let m = Model::central(Curvature::FLAT, RadialPotential::kepler(0.4, 2.0, 0.0)).unwrap();
        let c = SeparationConstants::new(-0.3, 0.8);
        let q = radial_action_quadrature(&m, c).unwrap();
        let e = radial_action_closed_flat(&m, c).unwrap();
        assert!((q - e).abs() < 1e-12 * e, "{q} {e}");
    }

    #[test]
    fn dj_r_dl_examples() {
        let link = RadialLink::Oscillator { gamma: 0.0 };
        assert!((dj_r_dl_link(link, 2.0).unwrap() + 0.25).abs() < 1e-15);
        let link = RadialLink::Kepler { b: 0.0 };
        assert!((dj_r_dl_link(link, 1.0).unwrap() + 1.0 / SQRT_2).abs() < 1e-15);
        assert!(dj_r_dl_link(RadialLink::Oscillator { gamma: 1.0 }, -1.0).is_err());
    }

    #[test]
    fn dj_r_dl_is_energy_independent_on_all_curvatures() {
        // On the hyperbolic plane a bound well needs ω > γ + L (oscillator) and a
        // deep enough Kepler term; both choices satisfy that.
        let pots = [RadialPotential::oscillator(0.3, 3.0), RadialPotential::kepler(0.5, 20.0, 0.3)];
        for pot in pots {
            for &k in &[-1.0, 0.0, 1.0] {
                let m = Model::central(Curvature(k), pot).unwrap();
                let l = 0.9;
                let r_star = effective_minimum(&m, l).unwrap();
                let v = m.effective(r_star, l).unwrap();
                let exact = dj_r_dl(&m, SeparationConstants::new(0.0, l)).unwrap();
                let ceiling = if k < 0.0 { m.effective(30.0, l).unwrap() - v } else { 1.0 };
                for &frac in &[0.1, 0.4, 0.7] {
                    let c = SeparationConstants::new(v + frac * ceiling.min(1.0), l);
                    let q = dj_r_dl_quadrature(&m, c).unwrap_or_else(|e| panic!("{pot:?} k={k} frac={frac} {e}"));
                    assert!((q - exact).abs() < 1e-10 * exact.abs(), "{pot:?} k={k} frac={frac} {q} {exact}");
                }
            }
        }
    }

    #[test]
    fn angular_action_examples() {
        // γ = c₀ = 0 is a degenerate well, so only the closed form is evaluated there.
        let flat = AngularFamily {
            alpha: 0.3,
            beta: 0.2,
            frequency: crate::potentials::Frequency::rational(1, 1),
            c0: 0.0,
            link: RadialLink::Oscillator { gamma: 0.0 },
        };
        assert!((angular_action_closed(&flat, 4.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert_eq!(angular_action_closed(&flat, 0.0).unwrap(), 0.0);
        let fam = AngularFamily { c0: 0.5, ..flat };
        assert_eq!(angular_action_quadrature(&fam, 0.5).unwrap(), 0.0);
        let q = angular_action_quadrature(&fam, 4.0).unwrap();
        let e = angular_action_closed(&fam, 4.0).unwrap();
        assert!((q - e).abs() < 1e-10 * e, "{q} {e}");
    }

    #[test]
    fn period_example_and_isoperiodicity() {
        let link = RadialLink::Oscillator { gamma: 0.0 };
        let ab = [(0.0, 0.0), (0.3, 0.4), (0.5, -0.5), (0.3, -0.7)];
        for (a, b) in ab {
            let fam = AngularFamily::new(a, b, 2, 1, 0.5, link).unwrap();
            assert!((period_closed(&fam, 2.0).unwrap() - PI).abs() < 1e-15);
            let t = period_quadrature(&fam, 2.0).unwrap();
            assert!((t - PI).abs() < 1e-10, "{a} {b} {t}");
            assert!((period_from_radial(&fam, 2.0).unwrap() - PI).abs() < 1e-15);
        }
    }

    #[test]
    fn substitution_terms() {
        let fam = AngularFamily::with_j(0.3, -0.2, 3, 2, 1.0, 1.0, 0.5).unwrap();
        let l = fam.c0 + 1.5;
        let (first, second) = substitution_split(&fam, l).unwrap();
        let t = period_quadrature(&fam, l).unwrap();
        assert!((first - t).abs() < 1e-9 * t, "{first} {t}");
        assert!(second.abs() < 1e-9, "{second}");
    }
}
