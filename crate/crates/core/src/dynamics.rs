//! Hamiltonian flow of `H = p_r²/2 + (p_φ²/2 + c(φ))/s_k²(r) + a^k(r)`.
//!
//! The kinetic term couples `r` and `p_φ`, so splitting methods do not apply.
//! The default integrator is a fixed-step Gauss–Legendre collocation method
//! (symmetric and symplectic), with Dormand–Prince 5(4) as the adaptive
//! alternative.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::actions::{radial_turning_points, turning_points, RadialLibration, SeparationConstants};
use crate::error::{Error, Result};
use crate::model::{AngularPotential, Model};
use crate::quadrature::GapPower;

/// Closest approach to an angular wall that a step may produce.
pub const WALL_GUARD: f64 = 1e-9;
/// Fixed-point tolerance of the implicit stage equations.
pub const IMPLICIT_TOL: f64 = 1e-14;
const MAX_HALVINGS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

impl PhaseState {
    pub fn new(t: f64, r: f64, phi: f64, p_r: f64, p_phi: f64) -> Self {
        PhaseState { t, r, phi, p_r, p_phi }
    }

    fn to_vec(self) -> [f64; 4] {
        [self.r, self.phi, self.p_r, self.p_phi]
    }

    fn from_vec(t: f64, y: [f64; 4]) -> Self {
        PhaseState { t, r: y[0], phi: y[1], p_r: y[2], p_phi: y[3] }
    }

    /// Euclidean distance in `(r, φ, p_r, p_φ)`; with `wrap_angle` the angle
    /// difference is taken modulo `2π`.
    pub fn distance(&self, other: &PhaseState, wrap_angle: bool) -> f64 {
        let mut dphi = self.phi - other.phi;
        if wrap_angle {
            dphi = (dphi + PI).rem_euclid(2.0 * PI) - PI;
        }
        ((self.r - other.r).powi(2) + dphi.powi(2) + (self.p_r - other.p_r).powi(2)
            + (self.p_phi - other.p_phi).powi(2))
        .sqrt()
    }
}

/// `l = p_φ²/2 + c(φ)`.
pub fn liouville_l(model: &Model, phi: f64, p_phi: f64) -> Result<f64> {
    Ok(0.5 * p_phi * p_phi + model.angular_value(phi)?)
}

/// `H = p_r²/2 + l/s_k²(r) + a^k(r)`.
pub fn hamiltonian(model: &Model, s: &PhaseState) -> Result<f64> {
    let l = liouville_l(model, s.phi, s.p_phi)?;
    Ok(0.5 * s.p_r * s.p_r + l * model.curvature.inv_s2(s.r)? + model.radial.value(model.curvature, s.r)?)
}

fn check_state(model: &Model, y: &[f64; 4]) -> Result<()> {
    let limit = model.radial_limit();
    if !(y[0] > 0.0 && y[0] < limit) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("r = {} left the radial chart", y[0])));
    }
    if let AngularPotential::Family(f) = &model.angular {
        let d = f.domain();
        if !(y[1] > d.phi_tilde + WALL_GUARD && y[1] < d.phi_end - WALL_GUARD) {
            return Err(Error::Domain(format!("phi = {} too close to an angular wall", y[1])));
        }
    }
    Ok(())
}

/// Right-hand side of Hamilton's equations.
fn rhs(model: &Model, y: &[f64; 4]) -> Result<[f64; 4]> {
    check_state(model, y)?;
    let [r, phi, p_r, p_phi] = *y;
    let curv = model.curvature;
    let inv_s2 = curv.inv_s2(r)?;
    let q = curv.cot(r)?;
    let (c, dc) = model.angular_value_and_derivative(phi)?;
    let (_, da) = model.radial.value_and_derivative(curv, r)?;
    let l = 0.5 * p_phi * p_phi + c;
    Ok([p_r, p_phi * inv_s2, -da + 2.0 * l * q * inv_s2, -dc * inv_s2])
}

/// Time derivative of a state (`ṙ, φ̇, ṗ_r, ṗ_φ`).
pub fn vector_field(model: &Model, s: &PhaseState) -> Result<[f64; 4]> {
    rhs(model, &s.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Implicit midpoint rule (order 2).
    Gauss2,
    /// Two-stage Gauss–Legendre (order 4).
    Gauss4,
    /// Three-stage Gauss–Legendre (order 6).
    Gauss6,
    /// Adaptive Dormand–Prince 5(4).
    Dopri5,
}

impl Method {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Method::Dopri5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSize {
    Fixed { h: f64 },
    /// A fixed step equal to the radial period divided by `steps`.
    PerRadialPeriod { steps: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorControl {
    pub method: Method,
    pub step: StepSize,
    /// Tolerances of the adaptive method.
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorControl {
    fn default() -> Self {
        IntegratorControl {
            method: Method::Gauss6,
            step: StepSize::PerRadialPeriod { steps: 1000 },
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

/// Below this ratio `r_min / r_max` a fixed step spends too few points on
/// the pericenter passage, and [`IntegratorControl::suggested`] switches to
/// the adaptive method.
pub const ECCENTRIC_RATIO: f64 = 0.1;

impl IntegratorControl {
    /// The default control unless the radial libration is strongly eccentric,
    /// in which case adaptive DOPRI5 at the default tolerances.
    pub fn suggested(model: &Model, consts: SeparationConstants) -> Self {
        let base = IntegratorControl::default();
        match turning_points(model, consts) {
            Ok(tp) if tp.r_min < ECCENTRIC_RATIO * tp.r_max => IntegratorControl { method: Method::Dopri5, ..base },
            _ => base,
        }
    }
}

/// Stored samples of a trajectory, one per accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub control: IntegratorControl,
}

impl Trajectory {
    pub fn start(&self) -> &PhaseState {
        &self.samples[0]
    }

    pub fn end(&self) -> &PhaseState {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

struct Tableau {
    a: &'static [&'static [f64]],
    b: &'static [f64],
}

const S15: f64 = 3.872_983_346_207_417;
const S3: f64 = 1.732_050_807_568_877_2;

static GAUSS2: Tableau = Tableau { a: &[&[0.5]], b: &[1.0] };
static GAUSS4: Tableau = Tableau {
    a: &[&[0.25, 0.25 - S3 / 6.0], &[0.25 + S3 / 6.0, 0.25]],
    b: &[0.5, 0.5],
};
static GAUSS6: Tableau = Tableau {
    a: &[
        &[5.0 / 36.0, 2.0 / 9.0 - S15 / 15.0, 5.0 / 36.0 - S15 / 30.0],
        &[5.0 / 36.0 + S15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - S15 / 24.0],
        &[5.0 / 36.0 + S15 / 30.0, 2.0 / 9.0 + S15 / 15.0, 5.0 / 36.0],
    ],
    b: &[5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
};

fn axpy(y: &[f64; 4], h: f64, k: &[f64; 4]) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// One Gauss–Legendre step; the stage equations are solved by fixed-point iteration.
fn gauss_step(model: &Model, tab: &Tableau, y: &[f64; 4], h: f64) -> Result<[f64; 4]> {
    let s = tab.b.len();
    let f0 = rhs(model, y)?;
    let mut k = vec![f0; s];
    let mut converged = false;
    for _ in 0..200 {
        let mut change: f64 = 0.0;
        let mut next = Vec::with_capacity(s);
        for row in &tab.a[..s] {
            let yi = row.iter().zip(&k).fold(*y, |acc, (&a, kj)| axpy(&acc, h * a, kj));
            next.push(rhs(model, &yi)?);
        }
        for (new, old) in next.iter().zip(&k) {
            for c in 0..4 {
                let scale = y[c].abs().max(1.0);
                change = change.max((h * (new[c] - old[c])).abs() / scale);
            }
        }
        k = next;
        if change <= IMPLICIT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::StepFailure { t: f64::NAN, reason: "stage iteration diverged".into() });
    }
    let mut out = *y;
    for (&b, ki) in tab.b.iter().zip(&k) {
        out = axpy(&out, h * b, ki);
    }
    check_state(model, &out)?;
    Ok(out)
}

const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step: `(y_new, scaled error norm)`.
fn dopri_step(model: &Model, y: &[f64; 4], h: f64, ctl: &IntegratorControl) -> Result<([f64; 4], f64)> {
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(model, y)?;
    for i in 0..6 {
        let mut yi = *y;
        for j in 0..=i {
            yi = axpy(&yi, h * DP_A[i][j], &k[j]);
        }
        k[i + 1] = rhs(model, &yi)?;
    }
    let mut y5 = *y;
    for j in 0..6 {
        y5 = axpy(&y5, h * DP_A[5][j], &k[j]);
    }
    let mut err = 0.0;
    for c in 0..4 {
        let e: f64 = (0..7).map(|j| DP_E[j] * k[j][c]).sum::<f64>() * h;
        let sc = ctl.atol + ctl.rtol * y[c].abs().max(y5[c].abs());
        err += (e / sc).powi(2);
    }
    check_state(model, &y5)?;
    Ok((y5, (err / 4.0).sqrt()))
}

fn tableau(method: Method) -> &'static Tableau {
    match method {
        Method::Gauss2 => &GAUSS2,
        Method::Gauss4 => &GAUSS4,
        _ => &GAUSS6,
    }
}

/// Advance by exactly `h` with a fixed-step method, halving near domain walls.
fn advance_fixed(model: &Model, method: Method, y: &[f64; 4], h: f64, depth: u32) -> Result<[f64; 4]> {
    match gauss_step(model, tableau(method), y, h) {
        Ok(out) => Ok(out),
        Err(e) if depth >= MAX_HALVINGS => Err(e),
        Err(_) => {
            let mid = advance_fixed(model, method, y, 0.5 * h, depth + 1)?;
            advance_fixed(model, method, &mid, 0.5 * h, depth + 1)
        }
    }
}

/// Radial period `T_r = √2 ∫ dr / √(E − a^k − L/s_k²)` of the orbit through `state`.
pub fn radial_period(model: &Model, state: &PhaseState) -> Result<f64> {
    let e = hamiltonian(model, state)?;
    let l = liouville_l(model, state.phi, state.p_phi)?;
    let lib = RadialLibration::new(model, SeparationConstants::new(e, l))?;
    if lib.is_circular() {
        // Small-oscillation period 2π/√V''(r*).
        let h = 1e-5 * lib.r_star;
        let d1 = model.effective_derivative(lib.r_star + h, l)?;
        let d0 = model.effective_derivative(lib.r_star - h, l)?;
        return Ok(2.0 * PI / ((d1 - d0) / (2.0 * h)).sqrt());
    }
    Ok(2.0f64.sqrt() * lib.integrate(|_| 1.0, GapPower::InvSqrt, lib.r_min, lib.r_max)?.value)
}

fn resolve_step(model: &Model, state: &PhaseState, ctl: &IntegratorControl) -> Result<f64> {
    match ctl.step {
        StepSize::Fixed { h } if h > 0.0 => Ok(h),
        StepSize::Fixed { h } => Err(Error::InvalidParameters(format!("step size {h} must be > 0"))),
        StepSize::PerRadialPeriod { steps } => {
            if steps == 0 {
                return Err(Error::InvalidParameters("steps per period must be > 0".into()));
            }
            Ok(radial_period(model, state)? / steps as f64)
        }
    }
}

/// Integrate from `state` to `state.t + duration` (negative durations run backwards).
pub fn integrate(model: &Model, state: PhaseState, duration: f64, ctl: IntegratorControl) -> Result<Trajectory> {
    let mut y = state.to_vec();
    check_state(model, &y).map_err(|e| Error::StepFailure { t: state.t, reason: e.to_string() })?;
    let mut samples = vec![state];
    let dir = duration.signum();
    let t_end = state.t + duration;
    let mut t = state.t;
    let h0 = resolve_step(model, &state, &ctl)?;
    let fail = |t: f64, e: Error, last: &PhaseState| Error::StepFailure {
        t,
        reason: format!("{e}; last valid state {last:?}"),
    };
    if ctl.method.is_symmetric() {
        let n = (duration.abs() / h0).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        for i in 1..=n {
            y = advance_fixed(model, ctl.method, &y, h, 0)
                .map_err(|e| fail(t, e, samples.last().unwrap()))?;
            t = state.t + h * i as f64;
            samples.push(PhaseState::from_vec(t, y));
        }
        return Ok(Trajectory { samples, control: ctl });
    }
    let mut h = dir * h0;
    let mut rejects = 0;
    while dir * (t_end - t) > 0.0 {
        if dir * (t + h - t_end) > 0.0 {
            h = t_end - t;
        }
        match dopri_step(model, &y, h, &ctl) {
            Ok((ynew, err)) if err <= 1.0 => {
                y = ynew;
                t += h;
                samples.push(PhaseState::from_vec(t, y));
                h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                rejects = 0;
            }
            Ok((_, err)) => {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                rejects += 1;
            }
            Err(_) => {
                h *= 0.5;
                rejects += 1;
            }
        }
        if rejects > 60 || h.abs() < 1e-15 * t.abs().max(1.0) {
            return Err(fail(t, Error::Domain("step size underflow".into()), samples.last().unwrap()));
        }
    }
    Ok(Trajectory { samples, control: ctl })
}

/// Advance a single state by `h` with the trajectory's method (used to refine events).
pub fn step_state(model: &Model, state: &PhaseState, h: f64, ctl: &IntegratorControl) -> Result<PhaseState> {
    let y = state.to_vec();
    let out = if ctl.method.is_symmetric() {
        advance_fixed(model, ctl.method, &y, h, 0)?
    } else {
        // Substeps keep the explicit method well inside its tolerance.
        let n = 4;
        let mut y = y;
        for _ in 0..n {
            y = dopri_step(model, &y, h / n as f64, ctl)?.0;
        }
        y
    };
    Ok(PhaseState::from_vec(state.t + h, out))
}

/// Where to place the initial point of [`initial_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum RadialPlacement {
    Min,
    Max,
    WellMinimum,
    Radius { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum AngularPlacement {
    /// The bottom of the angular well (`φ = 0` for central models).
    WellMinimum,
    Min,
    Max,
    Angle { phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub radial: RadialPlacement,
    pub angular: AngularPlacement,
    /// Sign of `p_r` (irrelevant at a radial turning point).
    pub p_r_positive: bool,
    pub p_phi_positive: bool,
}

impl Default for Placement {
    fn default() -> Self {
        Placement {
            radial: RadialPlacement::Min,
            angular: AngularPlacement::WellMinimum,
            p_r_positive: true,
            p_phi_positive: true,
        }
    }
}

/// A state with `H = E` and `l = L`.
pub fn initial_condition(model: &Model, consts: SeparationConstants, at: Placement) -> Result<PhaseState> {
    let SeparationConstants { e, l } = consts;
    let (r_min, r_max, r_star) = radial_turning_points(model, consts)?;
    let r = match at.radial {
        RadialPlacement::Min => r_min,
        RadialPlacement::Max => r_max,
        RadialPlacement::WellMinimum => r_star,
        RadialPlacement::Radius { r } => r,
    };
    if !(r >= r_min && r <= r_max) {
        return Err(Error::Domain(format!("r = {r} outside the radial libration [{r_min}, {r_max}]")));
    }
    let phi = match (&model.angular, at.angular) {
        (AngularPotential::Central, AngularPlacement::Angle { phi }) => phi,
        (AngularPotential::Central, _) => 0.0,
        (AngularPotential::Family(f), place) => {
            let (lo, hi) = crate::actions::angular_turning_points(f, l)?;
            match place {
                AngularPlacement::WellMinimum => f.domain().phi0,
                AngularPlacement::Min => lo,
                AngularPlacement::Max => hi,
                AngularPlacement::Angle { phi } => {
                    if !(phi >= lo && phi <= hi) {
                        return Err(Error::Domain(format!(
                            "phi = {phi} outside the angular libration [{lo}, {hi}]"
                        )));
                    }
                    phi
                }
            }
        }
    };
    let ang_gap = (l - model.angular_value(phi)?).max(0.0);
    let p_phi = (2.0 * ang_gap).sqrt() * if at.p_phi_positive { 1.0 } else { -1.0 };
    let rad_gap = if r == r_min || r == r_max { 0.0 } else { (e - model.effective(r, l)?).max(0.0) };
    let p_r = (2.0 * rad_gap).sqrt() * if at.p_r_positive { 1.0 } else { -1.0 };
    Ok(PhaseState::new(0.0, r, phi, p_r, p_phi))
}

/// Which momentum to watch for crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// `p_r` from negative to positive: passage through `r_min`.
    RadialMin,
    /// `p_φ` from negative to positive: passage through `φ_min`.
    AngularMin,
}

fn component(s: &PhaseState, c: Crossing) -> f64 {
    match c {
        Crossing::RadialMin => s.p_r,
        Crossing::AngularMin => s.p_phi,
    }
}

/// Refined state at an upward zero of the watched momentum inside `[a, b]`.
fn refine_crossing(model: &Model, a: &PhaseState, b: &PhaseState, c: Crossing, ctl: &IntegratorControl) -> Result<PhaseState> {
    let h = b.t - a.t;
    let (fa, fb) = (component(a, c), component(b, c));
    let da = vector_field(model, a)?;
    let db = vector_field(model, b)?;
    let idx = if c == Crossing::RadialMin { 2 } else { 3 };
    let (ma, mb) = (da[idx] * h, db[idx] * h);
    // cubic Hermite of the momentum on s ∈ [0, 1]
    let herm = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * fa + (s3 - 2.0 * s2 + s) * ma + (-2.0 * s3 + 3.0 * s2) * fb + (s3 - s2) * mb
    };
    let s0 = crate::roots::bisect(herm, 0.0, 1.0).unwrap_or(fa / (fa - fb));
    // secant on exact partial steps
    let mut x0 = s0 * h;
    let mut g0 = component(&step_state(model, a, x0, ctl)?, c);
    let mut x1 = x0 + 1e-3 * h * if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut best = step_state(model, a, x0, ctl)?;
    for _ in 0..30 {
        let st = step_state(model, a, x1, ctl)?;
        let g1 = component(&st, c);
        best = st;
        if g1.abs() < 1e-15 || g1 == g0 {
            break;
        }
        let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        x0 = x1;
        g0 = g1;
        x1 = x2;
        if (x1 - x0).abs() < 1e-15 * h.abs().max(1e-300) {
            best = step_state(model, a, x1, ctl)?;
            break;
        }
    }
    Ok(best)
}

/// All upward crossings of the watched momentum after the first sample,
/// refined to the integrator's accuracy.
pub fn crossings(model: &Model, traj: &Trajectory, c: Crossing) -> Result<Vec<PhaseState>> {
    let mut out = Vec::new();
    for w in traj.samples.windows(2) {
        let (fa, fb) = (component(&w[0], c), component(&w[1], c));
        if fa < 0.0 && fb >= 0.0 {
            out.push(refine_crossing(model, &w[0], &w[1], c, &traj.control)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub m: u32,
    /// Reference state: the start if it sits on `r_min` with `p_r = 0`,
    /// otherwise the first refined passage through `r_min`.
    pub reference: PhaseState,
    /// State `m` radial periods after the reference.
    pub after: PhaseState,
    pub radial_period: f64,
    pub distance: f64,
}

/// Distance between a state and its image after `m` radial periods.
pub fn closure_detect(model: &Model, traj: &Trajectory, m: u32) -> Result<ClosureReport> {
    if m == 0 {
        return Err(Error::InvalidParameters("m must be positive".into()));
    }
    let mut passages = crossings(model, traj, Crossing::RadialMin)?;
    let start = *traj.start();
    let at_turning = start.p_r == 0.0 && vector_field(model, &start)?[2] > 0.0;
    if at_turning {
        passages.insert(0, start);
    }
    if passages.len() < m as usize + 1 {
        return Err(Error::InsufficientSpan(format!(
            "found {} passages through r_min, need {}",
            passages.len(),
            m + 1
        )));
    }
    let reference = passages[0];
    let after = passages[m as usize];
    let wrap = matches!(model.angular, AngularPotential::Central);
    Ok(ClosureReport {
        m,
        reference,
        after,
        radial_period: (after.t - reference.t) / m as f64,
        distance: reference.distance(&after, wrap),
    })
}

/// Mean spacing of successive crossings of the watched momentum.
pub fn mean_period(model: &Model, traj: &Trajectory, c: Crossing) -> Result<f64> {
    let xs = crossings(model, traj, c)?;
    if xs.len() < 2 {
        return Err(Error::InsufficientSpan("fewer than two crossings".into()));
    }
    Ok((xs[xs.len() - 1].t - xs[0].t) / (xs.len() - 1) as f64)
}

/// Largest relative deviation of `H` and `l` from their initial values.
pub fn invariant_drift(model: &Model, traj: &Trajectory) -> Result<(f64, f64)> {
    let s0 = traj.start();
    let h0 = hamiltonian(model, s0)?;
    let l0 = liouville_l(model, s0.phi, s0.p_phi)?;
    let (mut dh, mut dl) = (0.0f64, 0.0f64);
    for s in &traj.samples {
        dh = dh.max((hamiltonian(model, s)? - h0).abs() / h0.abs().max(1e-300));
        dl = dl.max((liouville_l(model, s.phi, s.p_phi)? - l0).abs() / l0.abs().max(1e-300));
    }
    Ok((dh, dl))
}

/// Write `t,r,phi,p_r,p_phi,H,l,Phi` rows; `phases` fills the last column
/// (left empty when absent).
pub fn write_csv<W: Write>(out: W, model: &Model, traj: &Trajectory, phases: Option<&[f64]>) -> Result<()> {
    let io = |e: csv::Error| Error::Domain(format!("CSV output failed: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "r", "phi", "p_r", "p_phi", "H", "l", "Phi"]).map_err(io)?;
    let fmt = |v: f64| format!("{v:.16e}");
    for (i, s) in traj.samples.iter().enumerate() {
        let phase = phases.and_then(|p| p.get(i)).map(|&v| fmt(v)).unwrap_or_default();
        w.write_record([
            fmt(s.t),
            fmt(s.r),
            fmt(s.phi),
            fmt(s.p_r),
            fmt(s.p_phi),
            fmt(hamiltonian(model, s)?),
            fmt(liouville_l(model, s.phi, s.p_phi)?),
            phase,
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("CSV output failed: {e}")))?;
    Ok(())
}
