//! The third constant of motion.
//!
//! The conserved phase is `Φ = (√2/2)·m·(dL/dJ_φ)·(Z̃ − Ỹ)`, where `Z̃` and `Ỹ`
//! are the unwrapped versions of
//!
//! ```text
//! Z(φ) = ∫_{φ_min}^{φ} dφ / √(L − c(φ)),   Y(r) = ∫_{r_min}^{r} dr / (s_k² √(E − a^k − L/s_k²)).
//! ```
//!
//! Both grow at the rate `√2/s_k²` along the flow, so their difference is
//! constant once the libration counts are tracked. A full angular libration
//! shifts `Φ` by `2πm`, a full radial one by `2πn`; with `gcd(m, n) = 1` the
//! value modulo `2π` is single valued and `C = h(J_r, J_φ)·e^{iΦ}` is a
//! globally defined integral.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::Matrix3x4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::actions::{
    actions, angular_turning_points, dj_phi_dl, dj_r_dl, RadialLibration, SeparationConstants, QUAD_TOL,
};
use crate::dynamics::{hamiltonian, liouville_l, PhaseState, Trajectory};
use crate::error::{domain, Error, Result};
use crate::model::{AngularPotential, Model};
use crate::potentials::{AngularFamily, RadialLink, RadialPotential};
use crate::quadrature::GapPower;
use crate::specfun::{ellip_pi, EllipticArgs};

/// How `Z` and `Y` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhasePath {
    /// Endpoint-aware adaptive quadrature; works for every model.
    #[default]
    Quadrature,
    /// Elliptic and arcsine closed forms (flat oscillator and flat
    /// generalized Kepler models only).
    Closed,
}

/// Completed librations counted while unwrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct BranchLedger {
    pub angular: i64,
    pub radial: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseValue {
    /// The phase `Φ`, continuous along a tracked trajectory.
    pub phi: f64,
    /// Unwrapped `Z̃`.
    pub z: f64,
    /// Unwrapped `Ỹ`.
    pub y: f64,
    pub ledger: BranchLedger,
}

/// The integer pair `(m, n)` of the resonance `m ∂J_r/∂L = −n ∂J_φ/∂L`.
///
/// Families carry it in their frequency. Central models only have one for
/// the two Bertrand potentials: the harmonic oscillator `(2, 1)` and the
/// Kepler potential `(1, 1)`.
pub fn winding(model: &Model) -> Result<(u32, u32)> {
    match &model.angular {
        AngularPotential::Family(f) => f.frequency.winding().ok_or_else(|| {
            Error::InvalidParameters("a control frequency has no integer winding".into())
        }),
        AngularPotential::Central => match model.radial {
            RadialPotential::Oscillator { gamma: 0.0, .. } => Ok((2, 1)),
            RadialPotential::GeneralizedKepler { b, f, .. } if b == 0.0 && f == 0.0 => Ok((1, 1)),
            _ => Err(Error::InvalidParameters(
                "central model is not a Bertrand case; no closed-orbit winding".into(),
            )),
        },
    }
}

/// `dL/dJ_φ` from the closed `J_φ(L)`.
pub fn dl_dj_phi(model: &Model, l: f64) -> Result<f64> {
    match &model.angular {
        AngularPotential::Family(f) => Ok(1.0 / dj_phi_dl(f, l)?),
        AngularPotential::Central => {
            if !(l > 0.0) {
                return domain("central models need L > 0 for a phase");
            }
            Ok((2.0 * l).sqrt())
        }
    }
}

/// `Z` over half an angular libration, `T(L)/√2`.
pub fn z_half(fam: &AngularFamily, l: f64) -> Result<f64> {
    Ok(SQRT_2 * PI * dj_phi_dl(fam, l)?)
}

/// `Z(φ)` by quadrature.
pub fn z_integral(fam: &AngularFamily, phi: f64, l: f64) -> Result<f64> {
    let (lo, hi) = angular_turning_points(fam, l)?;
    if !(phi >= lo - 1e-9 * (hi - lo) && phi <= hi + 1e-9 * (hi - lo)) {
        return domain(format!("phi = {phi} outside the libration [{lo}, {hi}]"));
    }
    if lo == hi {
        return domain("degenerate angular libration (L = c0)");
    }
    let lib = crate::actions::AngularLibration::new(fam, l)?;
    // Short spans next to a turning point cancel to zero; floor the error at
    // the quadrature tolerance of a full half libration.
    let floor = QUAD_TOL * z_half(fam, l)?;
    Ok(lib.integrate_abs(|_| 1.0, GapPower::InvSqrt, lo, phi.clamp(lo, hi), floor)?.value)
}

/// `Z(φ)` in closed form: arcsine plus an elliptic integral of the third kind.
///
/// Available for the oscillator-like links (any `α, β`) and for the
/// generalized Kepler link with `β = 0`.
pub fn z_closed(fam: &AngularFamily, phi: f64, l: f64) -> Result<f64> {
    if !(l > fam.c0) {
        return domain(format!("L = {l} must exceed c0 = {}", fam.c0));
    }
    crate::actions::check_link_constants(fam.link, l)?;
    let dom = fam.domain_check(phi)?;
    let ftr = fam.ftilde_raw(phi);
    let ft = ftr.value;
    let rising = phi <= dom.phi0;
    // The arcsine parts are written as asin χ + π/2 = π − 2 asin √((1 − χ)/2)
    // with 1 − χ free of cancellation. Near the minimum χ → 1, where asin
    // itself would turn rounding in χ into errors of order √ε. The mirrored
    // branch past the minimum flips the sign of the asin term.
    let mirror = if rising { -1.0 } else { 1.0 };
    let nu = fam.nu();
    let alpha = fam.alpha;
    if fam.link.is_oscillator_like() {
        let s = fam.link.shift();
        let k = s + fam.c0;
        let lam = l + s;
        // 1 − χ = Λ(1 − f̃)/(L − c₀)
        let half_gap = (0.5 * lam * ftr.one_minus / (l - fam.c0)).clamp(0.0, 1.0);
        let a_part = (PI + mirror * 2.0 * half_gap.sqrt().asin()) / lam.sqrt();
        let b_part = if alpha == 0.0 { 0.0 } else { oscillator_elliptic(fam, lam, k, ft)? };
        return Ok((a_part + alpha * b_part) / (2.0 * nu));
    }
    if fam.beta != 0.0 {
        return domain("closed Z for the generalized Kepler link needs beta = 0");
    }
    let c = fam.value(phi)?;
    let excess = fam.excess(phi)?;
    let (j, b, sf) = (fam.j(), fam.link.shift(), fam.link.sqrt_f());
    let c0 = fam.c0;
    // 1 − χ = 2(L + q)(c − c₀) / ((c + q)(L − c₀)) for each q = B ± √F
    let a_part: f64 = [b + sf, b - sf]
        .iter()
        .map(|&q| {
            let half_gap = ((l + q) * excess / ((c + q) * (l - c0))).clamp(0.0, 1.0);
            (PI + mirror * 2.0 * half_gap.sqrt().asin()) / (2.0 * (l + q).sqrt())
        })
        .sum();
    let b_part = if alpha == 0.0 { 0.0 } else { kepler_elliptic(alpha, j, b, sf, l, c)? };
    Ok((a_part + alpha * b_part) / (2.0 * nu))
}

/// Arguments of the elliptic part of the oscillator-link `Z`, written with
/// `α' = |α|` and `β' = sign(α)·β` so that one set of formulas covers both signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorEllipticArgs {
    /// `sin²` of the amplitude.
    pub sin2_amplitude: f64,
    pub characteristic: f64,
    /// Squared modulus.
    pub modulus2: f64,
    pub prefactor: f64,
}

pub fn oscillator_elliptic_args(fam: &AngularFamily, lam: f64, k: f64, ft: f64) -> OscillatorEllipticArgs {
    let ap = fam.alpha.abs();
    let bp = fam.alpha.signum() * fam.beta;
    let s = 1.0 + ap - bp;
    let t = 1.0 - (ap - bp);
    let top = s * lam - 2.0 * ap * k;
    OscillatorEllipticArgs {
        sin2_amplitude: s * (lam * (1.0 + ft) - 2.0 * k) / (top * (1.0 + ft)),
        characteristic: top / (s * lam),
        modulus2: top * t / (s * (t * lam + 2.0 * ap * k)),
        prefactor: 4.0 * k / (lam * (s * (t * lam + 2.0 * ap * k)).sqrt()),
    }
}

fn oscillator_elliptic(fam: &AngularFamily, lam: f64, k: f64, ft: f64) -> Result<f64> {
    let a = oscillator_elliptic_args(fam, lam, k, ft);
    let amp = a.sin2_amplitude.clamp(0.0, 1.0).sqrt().asin();
    Ok(a.prefactor * ellip_pi(EllipticArgs::new(amp, a.characteristic, a.modulus2.max(0.0).sqrt()))?)
}

/// Roots `p₁ < p₂` of `(1 − α²)c² + 2(B + α²J)c + B² − F − α²J²`.
fn kepler_roots(alpha: f64, j: f64, b: f64, f: f64) -> (f64, f64) {
    let a2 = alpha * alpha;
    let qa = 1.0 - a2;
    let qb = 2.0 * (b + a2 * j);
    let qc = b * b - f - a2 * j * j;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let t = -0.5 * (qb + qb.signum() * disc);
    let (r1, r2) = if t != 0.0 { (t / qa, qc / t) } else { (0.0, 0.0) };
    (r1.min(r2), r1.max(r2))
}

fn kepler_elliptic(alpha: f64, j: f64, b: f64, sf: f64, l: f64, c: f64) -> Result<f64> {
    let (p1, p2) = kepler_roots(alpha, j, b, sf * sf);
    let k2 = (l - p2) / (l - p1);
    let amp = ((l - c) / (l - p2)).clamp(0.0, 1.0).sqrt().asin();
    let mut total = 0.0;
    for sg in [1.0, -1.0] {
        let q = b + sg * sf;
        let pi3 = ellip_pi(EllipticArgs::new(amp, (l - p2) / (l + q), k2.max(0.0).sqrt()))?;
        total += (j + q) / (2.0 * (1.0 - alpha * alpha).sqrt()) * 2.0 / ((l + q) * (l - p1).sqrt()) * pi3;
    }
    Ok(total)
}

/// `Y` over half a radial libration, `−π√2 ∂J_r/∂L`.
pub fn y_half(model: &Model, consts: SeparationConstants) -> Result<f64> {
    match dj_r_dl(model, consts) {
        Ok(d) => Ok(-PI * SQRT_2 * d),
        Err(_) => {
            let lib = RadialLibration::new(model, consts)?;
            y_on(&lib, lib.r_max)
        }
    }
}

fn y_on(lib: &RadialLibration, r: f64) -> Result<f64> {
    if lib.is_circular() {
        return domain("circular radial orbit: Y is undefined");
    }
    let curv = lib.model.curvature;
    let weight = |x: f64| curv.inv_s2(x).unwrap_or(0.0);
    let floor = match dj_r_dl(lib.model, lib.consts) {
        Ok(d) => -QUAD_TOL * PI * SQRT_2 * d,
        Err(_) => 0.0,
    };
    let r = r.clamp(lib.r_min, lib.r_max);
    Ok(lib.integrate_abs(weight, GapPower::InvSqrt, lib.r_min, r, floor)?.value)
}

/// `Y(r)` by quadrature.
pub fn y_integral(model: &Model, r: f64, consts: SeparationConstants) -> Result<f64> {
    let lib = RadialLibration::new(model, consts)?;
    let span = lib.r_max - lib.r_min;
    if !(r >= lib.r_min - 1e-9 * span && r <= lib.r_max + 1e-9 * span) {
        return domain(format!("r = {r} outside the libration [{}, {}]", lib.r_min, lib.r_max));
    }
    y_on(&lib, r)
}

/// `Y(r)` in closed form on the flat plane (oscillator and generalized Kepler).
pub fn y_closed_flat(model: &Model, r: f64, consts: SeparationConstants) -> Result<f64> {
    if model.curvature.k() != 0.0 {
        return domain("closed Y is only available on the flat plane");
    }
    if !(r > 0.0) {
        return domain("r must be positive");
    }
    let SeparationConstants { e, l } = consts;
    let clamp_asin = |x: f64| x.clamp(-1.0, 1.0).asin() + FRAC_PI_2;
    match model.radial {
        RadialPotential::Oscillator { gamma, omega } => {
            let lam = l + gamma;
            if !(lam > 0.0) || !(e * e > 4.0 * omega * lam) {
                return domain("no radial libration for these constants");
            }
            let r2 = r * r;
            let arg = (e * r2 - 2.0 * lam) / (r2 * (e * e - 4.0 * omega * lam).sqrt());
            Ok(clamp_asin(arg) / (2.0 * lam.sqrt()))
        }
        RadialPotential::GeneralizedKepler { b, d, f } => {
            let sf = f.sqrt();
            let delta = 1.0 + 4.0 * (e / d) * (b + l + e * f / d);
            if !(delta > 0.0) || !(l + b - sf > 0.0) {
                return domain("no radial libration for these constants");
            }
            let root = (d * r * r + f).sqrt();
            let mut total = 0.0;
            for sg in [1.0, -1.0] {
                let w = l + b - sg * sf;
                let arg = (1.0 + sg * 2.0 * e * sf / d - 2.0 * w / (root - sg * sf)) / delta.sqrt();
                total += clamp_asin(arg) / (2.0 * w.sqrt());
            }
            Ok(total)
        }
        RadialPotential::PowerLaw { .. } => domain("no closed Y for power-law potentials"),
    }
}

fn z_value(model: &Model, path: PhasePath, phi: f64, l: f64) -> Result<f64> {
    let fam = model.family().expect("caller checked for a family");
    match path {
        PhasePath::Quadrature => z_integral(fam, phi, l),
        PhasePath::Closed => z_closed(fam, phi, l),
    }
}

fn y_value(model: &Model, path: PhasePath, r: f64, consts: SeparationConstants) -> Result<f64> {
    match path {
        PhasePath::Quadrature => y_integral(model, r, consts),
        PhasePath::Closed => y_closed_flat(model, r, consts),
    }
}

/// Cold (single-state) ingredients of the phase.
#[derive(Debug, Clone, Copy)]
struct ColdPhase {
    /// `Z̃` within one libration, in `[0, 2 Z_half]` (or unbounded for central models).
    z: f64,
    z_half: Option<f64>,
    y: f64,
    y_half: f64,
    scale: f64,
}

fn cold(model: &Model, state: &PhaseState, path: PhasePath) -> Result<ColdPhase> {
    let (m, _n) = winding(model)?;
    let e = hamiltonian(model, state)?;
    let l = liouville_l(model, state.phi, state.p_phi)?;
    let consts = SeparationConstants::new(e, l);
    let scale = 0.5 * SQRT_2 * m as f64 * dl_dj_phi(model, l)?;
    let (z, z_half) = match &model.angular {
        AngularPotential::Central => (state.p_phi.signum() * state.phi / l.sqrt(), None),
        AngularPotential::Family(fam) => {
            let zh = z_half(fam, l)?;
            let z = z_value(model, path, state.phi, l)?;
            (if state.p_phi >= 0.0 { z } else { 2.0 * zh - z }, Some(zh))
        }
    };
    let yh = y_half(model, consts)?;
    let y = y_value(model, path, state.r, consts)?;
    let y = if state.p_r >= 0.0 { y } else { 2.0 * yh - y };
    Ok(ColdPhase { z, z_half, y, y_half: yh, scale })
}

/// `Φ` at a single state, with both angles on their first libration.
pub fn phase_phi(model: &Model, state: &PhaseState, path: PhasePath) -> Result<PhaseValue> {
    let c = cold(model, state, path)?;
    Ok(PhaseValue { phi: c.scale * (c.z - c.y), z: c.z, y: c.y, ledger: BranchLedger::default() })
}

/// Unwraps `Φ` along a trajectory by counting completed librations.
///
/// Each new sample is placed on the branch nearest the previous one. A step
/// that moves `Z̃` or `Ỹ` by more than a quarter libration is ambiguous and
/// reported as a branch-tracking failure.
#[derive(Debug, Clone)]
pub struct PhaseTracker<'a> {
    model: &'a Model,
    path: PhasePath,
    prev: Option<ColdPhase>,
    ledger: BranchLedger,
}

impl<'a> PhaseTracker<'a> {
    pub fn new(model: &'a Model, path: PhasePath) -> Self {
        PhaseTracker { model, path, prev: None, ledger: BranchLedger::default() }
    }

    pub fn push(&mut self, state: &PhaseState) -> Result<PhaseValue> {
        let c = cold(self.model, state, self.path)?;
        if let Some(p) = self.prev {
            if let Some(zh) = c.z_half {
                self.ledger.angular += unwrap_step(p.z, c.z, zh, state.t, "angular")?;
            }
            self.ledger.radial += unwrap_step(p.y, c.y, c.y_half, state.t, "radial")?;
        }
        self.prev = Some(c);
        let z = c.z + 2.0 * c.z_half.unwrap_or(0.0) * self.ledger.angular as f64;
        let y = c.y + 2.0 * c.y_half * self.ledger.radial as f64;
        Ok(PhaseValue { phi: c.scale * (z - y), z, y, ledger: self.ledger })
    }
}

/// Change of the libration count between two cold values with half period `half`.
fn unwrap_step(prev: f64, next: f64, half: f64, t: f64, which: &str) -> Result<i64> {
    let raw = next - prev;
    let k = if raw < -half {
        1
    } else if raw > half {
        -1
    } else {
        0
    };
    let step = raw + 2.0 * half * k as f64;
    if step.abs() > 0.5 * half {
        return Err(Error::BranchTracking(format!(
            "{which} phase moved {step:.3e} (half libration {half:.3e}) before t = {t}; sample more densely"
        )));
    }
    Ok(k)
}

/// `Φ` at every sample of a trajectory.
pub fn phase_along(model: &Model, traj: &Trajectory, path: PhasePath) -> Result<Vec<PhaseValue>> {
    let mut tracker = PhaseTracker::new(model, path);
    traj.samples.iter().map(|s| tracker.push(s)).collect()
}

/// Largest `|Φ(t) − Φ(0)| / max(|Φ(0)|, 1)` along a trajectory.
pub fn phase_drift(values: &[PhaseValue]) -> f64 {
    let Some(first) = values.first() else { return 0.0 };
    let scale = first.phi.abs().max(1.0);
    values.iter().map(|v| (v.phi - first.phi).abs() / scale).fold(0.0, f64::max)
}

/// Largest `|C(t) − C(0)|` with `h ≡ 1` and `C` evaluated cold at every sample.
///
/// Unlike the unwrapped phase this sees whether `e^{iΦ}` is a single-valued
/// function on phase space, which holds only when the family's winding
/// matches the radial motion.
pub fn single_valued_drift(model: &Model, traj: &Trajectory, path: PhasePath) -> Result<f64> {
    let c0 = superconstant_c(model, traj.start(), ActionWeight::default(), path)?;
    let mut worst: f64 = 0.0;
    for s in &traj.samples {
        worst = worst.max((superconstant_c(model, s, ActionWeight::default(), path)? - c0).norm());
    }
    Ok(worst)
}

/// The amplitude `h(J_r, J_φ)` of [`superconstant_c`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionWeight {
    Constant { value: f64 },
    /// `coefficient · J_r^{p} · J_φ^{q}`.
    Monomial { coefficient: f64, p: f64, q: f64 },
}

impl Default for ActionWeight {
    fn default() -> Self {
        ActionWeight::Constant { value: 1.0 }
    }
}

impl ActionWeight {
    pub fn eval(&self, j_r: f64, j_phi: f64) -> f64 {
        match *self {
            ActionWeight::Constant { value } => value,
            ActionWeight::Monomial { coefficient, p, q } => coefficient * j_r.powf(p) * j_phi.powf(q),
        }
    }
}

/// `C = h(J_r, J_φ)·e^{iΦ}` at a single state.
pub fn superconstant_c(model: &Model, state: &PhaseState, h: ActionWeight, path: PhasePath) -> Result<Complex64> {
    let phase = phase_phi(model, state, path)?;
    let amp = match h {
        ActionWeight::Constant { value } => value,
        _ => {
            let consts = SeparationConstants::new(
                hamiltonian(model, state)?,
                liouville_l(model, state.phi, state.p_phi)?,
            );
            let a = actions(model, consts)?;
            h.eval(a.j_r, a.j_phi)
        }
    };
    Ok(Complex64::from_polar(amp, phase.phi))
}

/// Singular values, largest first, of the row-normalized finite-difference
/// Jacobian of `(H, l, Re C)` with respect to `(r, φ, p_r, p_φ)`.
///
/// A smallest singular value well above the differencing noise shows that
/// `Re C` is functionally independent of `H` and `l` at that point.
pub fn independence_singular_values(model: &Model, state: &PhaseState, step: f64) -> Result<[f64; 3]> {
    let funcs = |s: &PhaseState| -> Result<[f64; 3]> {
        Ok([
            hamiltonian(model, s)?,
            liouville_l(model, s.phi, s.p_phi)?,
            superconstant_c(model, s, ActionWeight::default(), PhasePath::Quadrature)?.re,
        ])
    };
    let mut jac = Matrix3x4::zeros();
    for col in 0..4 {
        let shifted = |h: f64| {
            let mut s = *state;
            match col {
                0 => s.r += h,
                1 => s.phi += h,
                2 => s.p_r += h,
                _ => s.p_phi += h,
            }
            s
        };
        let plus = funcs(&shifted(step))?;
        let minus = funcs(&shifted(-step))?;
        for row in 0..3 {
            jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * step);
        }
    }
    for row in 0..3 {
        let norm = jac.row(row).norm();
        if norm == 0.0 {
            return Err(Error::Singularity(format!("gradient of function {row} vanishes")));
        }
        jac.row_mut(row).scale_mut(1.0 / norm);
    }
    let sv = jac.singular_values();
    let mut out = [sv[0], sv[1], sv[2]];
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// The published closed forms, transcribed symbol by symbol.
///
/// They are kept to document where they disagree with the quadrature path;
/// [`z_closed`] and [`y_closed_flat`] hold the corrected versions.
pub mod printed {
    use super::*;

    /// Arguments of the oscillator-link elliptic term, as printed.
    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct OscillatorArgs {
        /// Radicand of the amplitude `Λ = arcsin √(…)`.
        pub sin2_lambda: f64,
        pub omega: f64,
        /// `Υ²`.
        pub upsilon2: f64,
        /// Argument of the radial arcsine (with `E` rather than `E²` under the root).
        pub radial_arg: f64,
        /// Argument of the angular arcsine.
        pub angular_arg: f64,
    }

    impl OscillatorArgs {
        /// Range violations: arcsine arguments outside `[−1, 1]`, `Υ ≥ 1`, or NaN.
        pub fn violations(&self) -> Vec<&'static str> {
            let mut v = Vec::new();
            if !(0.0..=1.0).contains(&self.sin2_lambda) {
                v.push("sin^2 of the amplitude outside [0, 1]");
            }
            if !(self.upsilon2 < 1.0) {
                v.push("modulus not below 1");
            }
            if !(self.radial_arg.abs() <= 1.0) {
                v.push("radial arcsine argument outside [-1, 1]");
            }
            if !(self.angular_arg.abs() <= 1.0) {
                v.push("angular arcsine argument outside [-1, 1]");
            }
            v
        }
    }

    pub fn oscillator_args(fam: &AngularFamily, omega: f64, consts: SeparationConstants, r: f64, ft: f64) -> OscillatorArgs {
        let RadialLink::Oscillator { gamma } = fam.link else {
            return OscillatorArgs { sin2_lambda: f64::NAN, omega: f64::NAN, upsilon2: f64::NAN, radial_arg: f64::NAN, angular_arg: f64::NAN };
        };
        let SeparationConstants { e, l } = consts;
        let (a, b, c0) = (fam.alpha, fam.beta, fam.c0);
        let lam = l + gamma;
        let k = gamma + c0;
        let s = 1.0 + (a - b);
        let t = 1.0 - (a - b);
        OscillatorArgs {
            sin2_lambda: s / (t * lam - 2.0 * a * k) * ((1.0 + ft) * lam - 2.0 * k) / (1.0 + ft),
            omega: (s * lam - 2.0 * a * k) / (t * lam),
            upsilon2: (s * lam - 2.0 * a * k) / (t * lam - 2.0 * a * k) * t / s,
            radial_arg: (e * r * r - 2.0 * lam) / ((e - 4.0 * omega * lam).sqrt() * r * r),
            angular_arg: (lam * ft - k) / (l - c0),
        }
    }

    /// The printed oscillator phase; domain errors where its arguments leave their ranges.
    pub fn oscillator_phase(fam: &AngularFamily, omega: f64, consts: SeparationConstants, r: f64, ft: f64) -> Result<f64> {
        let args = oscillator_args(fam, omega, consts, r, ft);
        let bad = args.violations();
        if !bad.is_empty() {
            return domain(format!("printed oscillator phase: {}", bad.join("; ")));
        }
        let (m, n) = fam.frequency.winding().ok_or_else(|| Error::InvalidParameters("needs (m, n)".into()))?;
        let RadialLink::Oscillator { gamma } = fam.link else { unreachable!() };
        let (a, b, c0, l) = (fam.alpha, fam.beta, fam.c0, consts.l);
        let lam = l + gamma;
        let k = c0 + gamma;
        let pi3 = ellip_pi(EllipticArgs::new(args.sin2_lambda.sqrt().asin(), args.omega, args.upsilon2.sqrt()))?;
        let elliptic = 2.0 * a * k / (lam * (1.0 + (a - b))).sqrt() * pi3
            / ((1.0 - (a - b)) * lam + 2.0 * a * k).sqrt();
        Ok(m as f64 * (0.5 * args.angular_arg.asin() + elliptic) - n as f64 * args.radial_arg.asin())
    }

    /// Symbols of the flat generalized Kepler formula with `β = 0`.
    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct KeplerSymbols {
        pub a: f64,
        pub b: f64,
        pub d: f64,
        pub rho: f64,
        pub mu: f64,
        pub zeta: f64,
        pub p_plus: f64,
        pub p_minus: f64,
        pub q_plus: f64,
        pub q_minus: f64,
        pub delta: f64,
    }

    pub fn sym_a(j: f64, b: f64, f: f64, l: f64) -> f64 {
        ((j + b) * (l + b) - f) / (l - j)
    }

    pub fn sym_b(alpha: f64, j: f64, b: f64, f: f64) -> f64 {
        (f + alpha * alpha * ((j + b).powi(2) - f)).sqrt()
    }

    pub fn sym_d(j: f64, b: f64) -> f64 {
        -(j + b)
    }

    pub fn sym_rho(j: f64, b: f64, f: f64, ft: f64) -> f64 {
        ((j + b).powi(2) - f * (1.0 + ft * ft)).sqrt() / ft
    }

    /// As printed: the factor `(a − ρ)` appears in both numerator and denominator.
    pub fn sym_mu(a: f64, b: f64, d: f64, rho: f64) -> f64 {
        ((b - d) * (a - rho) / ((b - a) * (a - rho))).sqrt().asin()
    }

    pub fn sym_zeta(a: f64, b: f64, d: f64) -> f64 {
        ((b - a) * (b + d) / ((b + a) * (b - d))).sqrt()
    }

    pub fn sym_p(j: f64, b: f64, f: f64, l: f64, sign: f64) -> f64 {
        (j + b).powi(2) - f + sign * 2.0 * (j - l) * f.sqrt()
    }

    pub fn sym_q(j: f64, b: f64, f: f64, l: f64, sign: f64) -> f64 {
        (f - (j + b).powi(2)) * (l + b + sign * f.sqrt())
    }

    pub fn sym_delta(b: f64, d_coupling: f64, f: f64, e: f64, l: f64) -> f64 {
        1.0 + 4.0 * (e / d_coupling) * (b + l + e * f / d_coupling)
    }

    pub fn kepler_symbols(fam: &AngularFamily, d_coupling: f64, consts: SeparationConstants, ft: f64) -> KeplerSymbols {
        let (j, b, f) = (fam.j(), fam.link.shift(), fam.link.f());
        let SeparationConstants { e, l } = consts;
        let a = sym_a(j, b, f, l);
        let bb = sym_b(fam.alpha, j, b, f);
        let d = sym_d(j, b);
        let rho = sym_rho(j, b, f, ft);
        KeplerSymbols {
            a,
            b: bb,
            d,
            rho,
            mu: sym_mu(a, bb, d, rho),
            zeta: sym_zeta(a, bb, d),
            p_plus: sym_p(j, b, f, l, 1.0),
            p_minus: sym_p(j, b, f, l, -1.0),
            q_plus: sym_q(j, b, f, l, 1.0),
            q_minus: sym_q(j, b, f, l, -1.0),
            delta: sym_delta(b, d_coupling, f, e, l),
        }
    }

    /// Radial part as printed: `1/√Δ` multiplies only the first term of each arcsine argument.
    pub fn kepler_y(b: f64, d_coupling: f64, f: f64, consts: SeparationConstants, r: f64) -> f64 {
        let SeparationConstants { e, l } = consts;
        let sf = f.sqrt();
        let delta = sym_delta(b, d_coupling, f, e, l);
        let root = (d_coupling * r * r + f).sqrt();
        let first = ((1.0 + 2.0 * sf / d_coupling * e) / delta.sqrt() - 2.0 * (l + b - sf) / (root - sf)).asin()
            / (2.0 * (l + b - sf).sqrt());
        let second = ((1.0 - 2.0 * sf / d_coupling * e) / delta.sqrt() - 2.0 * (l + b + sf) / (root + sf)).asin()
            / (2.0 * (l + b + sf).sqrt());
        first + second
    }

    /// Angular part as printed.
    pub fn kepler_z(fam: &AngularFamily, d_coupling: f64, consts: SeparationConstants, ft: f64) -> Result<f64> {
        let (m, n) = fam.frequency.winding().ok_or_else(|| Error::InvalidParameters("needs (m, n)".into()))?;
        let s = kepler_symbols(fam, d_coupling, consts, ft);
        let (j, b, f) = (fam.j(), fam.link.shift(), fam.link.f());
        let l = consts.l;
        let sf = f.sqrt();
        let sq = s.delta.sqrt();
        let t_plus = (FRAC_PI_2 - ((s.p_plus * (s.rho + sf) + 2.0 * s.q_plus) / ((s.rho + sf) * sq)).asin())
            / (4.0 * (l + b + sf).sqrt());
        let t_minus = (FRAC_PI_2 - ((s.p_minus * (s.rho - sf) + 2.0 * s.q_minus) / ((s.rho - sf) * sq)).asin())
            / (4.0 * (l + b - sf).sqrt());
        let alpha = fam.alpha;
        let pre = 0.5 * alpha * (((j + b).powi(2) - f) / (j - l)).sqrt() * (s.a - s.b)
            / ((s.a + s.b) * (s.b - s.d)).sqrt();
        let pi_plus = ellip_pi(EllipticArgs::new(
            s.mu,
            (s.b - s.a) * (s.d - sf) / ((s.b - s.d) * (s.a - sf)),
            s.zeta,
        ))?;
        let pi_minus = ellip_pi(EllipticArgs::new(
            s.mu,
            (s.b - s.a) * (s.d + sf) / ((s.b - s.d) * (s.a + sf)),
            s.zeta,
        ))?;
        let ell = pre * (pi_plus / (s.a - sf) + pi_minus / (s.a + sf));
        let value = m as f64 / n as f64 * (t_plus + t_minus + ell);
        if !value.is_finite() {
            return domain("printed angular part is not real at this state");
        }
        Ok(value)
    }

    /// The printed phase `2n √((L+B)² − F) / (√(L+B−√F) + √(L+B+√F)) · (Z − Y)`.
    pub fn kepler_phase(fam: &AngularFamily, d_coupling: f64, consts: SeparationConstants, r: f64, ft: f64) -> Result<f64> {
        let (_, n) = fam.frequency.winding().ok_or_else(|| Error::InvalidParameters("needs (m, n)".into()))?;
        let (b, f) = (fam.link.shift(), fam.link.f());
        let l = consts.l;
        let sf = f.sqrt();
        let pre = 2.0 * n as f64 * ((l + b).powi(2) - f).sqrt() / ((l + b - sf).sqrt() + (l + b + sf).sqrt());
        let value = pre * (kepler_z(fam, d_coupling, consts, ft)? - kepler_y(b, d_coupling, f, consts, r));
        if !value.is_finite() {
            return domain("printed phase is not real at this state");
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_condition, integrate, radial_period, IntegratorControl, Placement};
    use crate::geometry::Curvature;

    fn ttw(alpha: f64, beta: f64, m: u32, n: u32) -> Model {
        let fam = AngularFamily::new(alpha, beta, m, n, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap();
        Model::with_family(Curvature::FLAT, RadialPotential::oscillator(0.2, 1.0), fam).unwrap()
    }

    fn gk(alpha: f64, m: u32, n: u32) -> Model {
        let fam = AngularFamily::with_j(alpha, 0.0, m, n, 1.0, 1.0, 0.5).unwrap();
        Model::with_family(Curvature::FLAT, RadialPotential::kepler(1.0, 4.0, 0.5), fam).unwrap()
    }

    #[test]
    fn z_endpoints() {
        let m = ttw(0.3, -0.7, 3, 2);
        let fam = m.family().unwrap();
        let l = 2.5;
        let (lo, hi) = angular_turning_points(fam, l).unwrap();
        assert!(z_integral(fam, lo, l).unwrap().abs() < 1e-14);
        let full = z_integral(fam, hi, l).unwrap();
        assert!((SQRT_2 * full - crate::actions::period_closed(fam, l).unwrap()).abs() < 1e-10 * full);
        assert!((full - z_half(fam, l).unwrap()).abs() < 1e-10 * full);
        assert!(z_integral(fam, hi + 0.1, l).is_err());
    }

    #[test]
    fn closed_z_matches_quadrature() {
        let l = 2.5;
        for (a, b) in [(0.3, -0.7), (0.3, 0.2), (-0.4, 0.1), (-0.3, -0.5), (0.5, 0.0), (0.0, 0.4)] {
            let m = ttw(a, b, 3, 2);
            let fam = m.family().unwrap();
            let (lo, hi) = angular_turning_points(fam, l).unwrap();
            for i in 1..20 {
                let phi = lo + (hi - lo) * i as f64 / 20.0;
                let q = z_integral(fam, phi, l).unwrap();
                let c = z_closed(fam, phi, l).unwrap();
                assert!((q - c).abs() < 1e-9 * q, "alpha={a} beta={b} phi={phi}: {q} vs {c}");
            }
        }
        for a in [0.3, -0.4, 0.6, 0.0] {
            let m = gk(a, 1, 1);
            let fam = m.family().unwrap();
            let l = 1.5;
            let (lo, hi) = angular_turning_points(fam, l).unwrap();
            for i in 1..20 {
                let phi = lo + (hi - lo) * i as f64 / 20.0;
                let q = z_integral(fam, phi, l).unwrap();
                let c = z_closed(fam, phi, l).unwrap();
                assert!((q - c).abs() < 1e-9 * q, "alpha={a} phi={phi}: {q} vs {c}");
            }
        }
        let fam = AngularFamily::with_j(0.3, 0.2, 1, 1, 1.0, 1.0, 0.5).unwrap();
        assert!(z_closed(&fam, fam.domain().phi0, 1.5).is_err());
    }

    #[test]
    fn closed_y_matches_quadrature() {
        let cases = [
            (ttw(0.3, -0.7, 3, 2), SeparationConstants::new(8.0, 2.5)),
            (gk(0.3, 1, 1), SeparationConstants::new(-0.3, 1.5)),
            (
                Model::central(Curvature::FLAT, RadialPotential::kepler(0.5, 20.0, 0.3)).unwrap(),
                SeparationConstants::new(-2.0, 1.5),
            ),
        ];
        for (m, c) in cases {
            let lib = RadialLibration::new(&m, c).unwrap();
            assert!(y_integral(&m, lib.r_min, c).unwrap().abs() < 1e-14);
            let yh = y_half(&m, c).unwrap();
            assert!((y_integral(&m, lib.r_max, c).unwrap() - yh).abs() < 1e-10 * yh);
            for i in 1..20 {
                let r = lib.r_min + (lib.r_max - lib.r_min) * i as f64 / 20.0;
                let q = y_integral(&m, r, c).unwrap();
                let cl = y_closed_flat(&m, r, c).unwrap();
                assert!((q - cl).abs() < 1e-9 * q, "r={r}: {q} vs {cl}");
            }
        }
    }

    #[test]
    fn curved_y_energy_derivative_is_finite_difference_consistent() {
        // ∂Y(r)/∂E at a fixed interior endpoint equals −½ ∫ s⁻² g^{-3/2} dr,
        // which is singular at r_min; instead compare Y(r_max) = Y_half across E:
        // it must not depend on E for the linked oscillator.
        let m = Model::central(Curvature::new(1.0).unwrap(), RadialPotential::oscillator(0.3, 3.0)).unwrap();
        let y1 = y_integral(&m, RadialLibration::new(&m, SeparationConstants::new(9.0, 1.0)).unwrap().r_max, SeparationConstants::new(9.0, 1.0)).unwrap();
        let y2 = y_integral(&m, RadialLibration::new(&m, SeparationConstants::new(10.0, 1.0)).unwrap().r_max, SeparationConstants::new(10.0, 1.0)).unwrap();
        assert!((y1 - y2).abs() < 1e-10 * y1);
        assert!((y1 - y_half(&m, SeparationConstants::new(9.0, 1.0)).unwrap()).abs() < 1e-10 * y1);
    }

    #[test]
    fn winding_rules() {
        assert_eq!(winding(&ttw(0.3, -0.7, 6, 4)).unwrap(), (3, 2));
        let osc = Model::central(Curvature::FLAT, RadialPotential::oscillator(0.0, 1.0)).unwrap();
        assert_eq!(winding(&osc).unwrap(), (2, 1));
        let kep = Model::central(Curvature::new(1.0).unwrap(), RadialPotential::kepler(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(winding(&kep).unwrap(), (1, 1));
        let bad = Model::central(Curvature::FLAT, RadialPotential::oscillator(0.3, 1.0)).unwrap();
        assert!(winding(&bad).is_err());
    }

    fn tracked_drift(m: &Model, consts: SeparationConstants, path: PhasePath) -> (f64, Vec<PhaseValue>) {
        let s = initial_condition(m, consts, Placement::default()).unwrap();
        let t_r = radial_period(m, &s).unwrap();
        let traj = integrate(m, s, 10.0 * t_r, IntegratorControl::default()).unwrap();
        let vals = phase_along(m, &traj, path).unwrap();
        (phase_drift(&vals), vals)
    }

    #[test]
    fn phase_is_conserved_and_unwraps() {
        let (drift, vals) = tracked_drift(&ttw(0.3, -0.7, 3, 2), SeparationConstants::new(8.0, 2.5), PhasePath::Quadrature);
        assert!(drift < 1e-6, "{drift}");
        let last = vals.last().unwrap().ledger;
        assert_eq!(last.radial, 10);
        assert!(last.angular >= 6);
        let (drift, _) = tracked_drift(&ttw(0.3, -0.7, 3, 2), SeparationConstants::new(8.0, 2.5), PhasePath::Closed);
        assert!(drift < 1e-6, "{drift}");
        let (drift, _) = tracked_drift(&gk(0.3, 1, 1), SeparationConstants::new(-0.3, 1.5), PhasePath::Closed);
        assert!(drift < 1e-6, "{drift}");
    }

    #[test]
    fn mismatched_winding_drifts() {
        // family resonance 3:2 on a radial oscillator of a different shift
        let fam = AngularFamily::new(0.3, -0.7, 3, 2, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap();
        let m = Model::with_family(Curvature::FLAT, RadialPotential::oscillator(0.9, 1.0), fam).unwrap();
        let traj = ten_periods(&m, SeparationConstants::new(8.0, 2.5));
        assert!(single_valued_drift(&m, &traj, PhasePath::Quadrature).unwrap() > 1e-2);
        let m = ttw(0.3, -0.7, 3, 2);
        let traj = ten_periods(&m, SeparationConstants::new(8.0, 2.5));
        let drift = single_valued_drift(&m, &traj, PhasePath::Quadrature).unwrap();
        assert!(drift < 1e-6, "{drift}");
    }

    fn ten_periods(m: &Model, consts: SeparationConstants) -> Trajectory {
        let s = initial_condition(m, consts, Placement::default()).unwrap();
        let t_r = radial_period(m, &s).unwrap();
        integrate(m, s, 10.0 * t_r, IntegratorControl::default()).unwrap()
    }

    #[test]
    fn superconstant_amplitude_and_independence() {
        let m = ttw(0.3, -0.7, 3, 2);
        let s = initial_condition(&m, SeparationConstants::new(8.0, 2.5), Placement {
            radial: crate::dynamics::RadialPlacement::Radius { r: 1.0 },
            angular: crate::dynamics::AngularPlacement::Angle { phi: m.family().unwrap().domain().phi0 - 0.05 },
            ..Placement::default()
        })
        .unwrap();
        let c = superconstant_c(&m, &s, ActionWeight::default(), PhasePath::Quadrature).unwrap();
        assert!((c.norm() - 1.0).abs() < 1e-15);
        let sv = independence_singular_values(&m, &s, 1e-5).unwrap();
        assert!(sv[2] > 1e-6, "{sv:?}");
    }

    #[test]
    fn corrected_oscillator_arguments_stay_in_range() {
        for (a, b) in [(0.3, -0.7), (0.3, 0.2), (-0.4, 0.1), (-0.3, -0.5), (0.5, 0.0)] {
            let m = ttw(a, b, 3, 2);
            let fam = m.family().unwrap();
            for l in [0.6, 1.0, 2.5, 10.0] {
                let (lo, hi) = angular_turning_points(fam, l).unwrap();
                for i in 0..=40 {
                    let phi = lo + (hi - lo) * i as f64 / 40.0;
                    let ft = fam.ftilde_of_phi(phi).unwrap();
                    let g = oscillator_elliptic_args(fam, l + 0.2, 0.7, ft);
                    assert!((-1e-12..=1.0 + 1e-12).contains(&g.sin2_amplitude), "{a} {b} {l} {g:?}");
                    assert!(g.modulus2 < 1.0 && g.characteristic * g.sin2_amplitude < 1.0);
                }
            }
        }
    }

    #[test]
    fn printed_radial_argument_leaves_its_range() {
        // With E instead of E² under the root the radial arcsine argument
        // exceeds 1 on typical orbits.
        let m = ttw(0.3, -0.7, 3, 2);
        let fam = m.family().unwrap();
        let c = SeparationConstants::new(8.0, 2.5);
        let lib = RadialLibration::new(&m, c).unwrap();
        let ft = fam.ftilde_of_phi(fam.domain().phi0).unwrap();
        let args = printed::oscillator_args(fam, 1.0, c, 0.5 * (lib.r_min + lib.r_max), ft);
        assert!(!args.violations().is_empty());
    }

    // Reference values of the printed symbols at J = 1, B = 1, F = 0.5,
    // alpha = 0.3, D = 4, E = −0.3, L = 1.5, f̃ = 0.4, computed independently.
    #[test]
    fn printed_symbols() {
        let (j, b, f, al, dc, e, l, ft) = (1.0, 1.0, 0.5, 0.3, 4.0, -0.3, 1.5, 0.4);
        let a = printed::sym_a(j, b, f, l);
        assert!((a - 9.0).abs() < 1e-14);
        let bb = printed::sym_b(al, j, b, f);
        assert!((bb - (0.5f64 + 0.09 * 3.5).sqrt()).abs() < 1e-15);
        assert_eq!(printed::sym_d(j, b), -2.0);
        assert!((printed::sym_rho(j, b, f, ft) - (4.0f64 - 0.5 * 1.16).sqrt() / 0.4).abs() < 1e-14);
        // The printed μ collapses to arcsin √((b − d)/(b − a)) whatever ρ is;
        // here b < a, so it is not even real.
        let collapsed = ((bb + 2.0) / (bb - a)).sqrt().asin();
        assert!(collapsed.is_nan());
        assert!(printed::sym_mu(a, bb, -2.0, 3.0).is_nan());
        assert!(printed::sym_mu(a, bb, -2.0, 5.0).is_nan());
        let zeta = printed::sym_zeta(a, bb, -2.0);
        assert!((zeta * zeta - (bb - a) * (bb - 2.0) / ((bb + a) * (bb + 2.0))).abs() < 1e-14);
        assert!((printed::sym_p(j, b, f, l, 1.0) - (3.5 - 2.0 * 0.5 * 0.5f64.sqrt())).abs() < 1e-14);
        assert!((printed::sym_p(j, b, f, l, -1.0) - (3.5 + 2.0 * 0.5 * 0.5f64.sqrt())).abs() < 1e-14);
        assert!((printed::sym_q(j, b, f, l, 1.0) + 3.5 * (2.5 + 0.5f64.sqrt())).abs() < 1e-14);
        assert!((printed::sym_q(j, b, f, l, -1.0) + 3.5 * (2.5 - 0.5f64.sqrt())).abs() < 1e-14);
        assert!((printed::sym_delta(b, dc, f, e, l) - (1.0 - 0.3 * (2.5 - 0.0375))).abs() < 1e-14);
    }

    #[test]
    fn printed_radial_parenthesization_differs() {
        let m = gk(0.3, 1, 1);
        let c = SeparationConstants::new(-0.3, 1.5);
        let lib = RadialLibration::new(&m, c).unwrap();
        let r = 0.5 * (lib.r_min + lib.r_max);
        let quad = y_integral(&m, r, c).unwrap();
        assert!((y_closed_flat(&m, r, c).unwrap() - quad).abs() < 1e-10 * quad);
        // As printed, the arcsines carry no +π/2 offset, so compare increments.
        let r2 = lib.r_min + 0.7 * (lib.r_max - lib.r_min);
        let printed_step = printed::kepler_y(1.0, 4.0, 0.5, c, r2) - printed::kepler_y(1.0, 4.0, 0.5, c, r);
        let true_step = y_integral(&m, r2, c).unwrap() - quad;
        assert!(!printed_step.is_finite() || (printed_step - true_step).abs() > 1e-3 * true_step.abs());
    }
}
