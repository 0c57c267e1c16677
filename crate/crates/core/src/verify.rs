//! Verification suites with pass/fail reports.
//!
//! Every suite pairs its checks with a negative control that is expected to
//! fail. A suite whose control passes is reported as broken, since it would
//! no longer be able to tell a correct model from a wrong one.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{
    action_combination_check, angular_turning_points, dj_r_dl_link, period_from_radial, period_quadrature,
    SeparationConstants,
};
use crate::dynamics::{
    closure_detect, initial_condition, integrate, radial_period, AngularPlacement, IntegratorControl, Placement,
    RadialPlacement,
};
use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::model::Model;
use crate::potentials::{AngularFamily, Branch, RadialPotential};
use crate::superconstants::{phase_along, phase_drift, single_valued_drift, PhasePath};

/// Suite tolerances, all in one place.
pub mod tolerance {
    /// Relative spread of `T(L)` across isoperiodic families.
    pub const ISOPERIODIC: f64 = 1e-7;
    /// Relative spread of `m J_r + n J_φ` over an `L` grid.
    pub const COMBINATION: f64 = 1e-7;
    /// Phase-space distance after `m` radial periods.
    pub const CLOSURE: f64 = 1e-6;
    /// Relative drift of the unwrapped phase over ten radial periods.
    pub const PHASE: f64 = 1e-6;
    /// Largest change of the cold `C = e^{iΦ}` over ten radial periods.
    pub const SINGLE_VALUED: f64 = 1e-6;
    /// Relative mismatch between the quadrature period and `−2π(m/n) ∂J_r/∂L`.
    pub const ABEL_PERIOD: f64 = 1e-8;
    /// Relative residual of `c(φ±(c)) = c`.
    pub const ABEL_INVERSE: f64 = 1e-8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Pass when the measured value is at most the tolerance.
    Within,
    /// Negative control: pass when the measured value exceeds the tolerance.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub expect: Expectation,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, measured: f64, tolerance: f64, expect: Expectation) -> Self {
        let pass = match expect {
            Expectation::Within => measured <= tolerance,
            Expectation::Exceeds => measured > tolerance,
        };
        CheckRecord { name: name.into(), measured, tolerance, expect, pass }
    }

    fn from_result(name: impl Into<String>, r: Result<f64>, tolerance: f64, expect: Expectation) -> Self {
        let name = name.into();
        match r {
            Ok(v) => Self::new(name, v, tolerance, expect),
            // an error is a failed measurement; for a control it counts as "did not close"
            Err(e) => CheckRecord {
                name: format!("{name} [{e}]"),
                measured: f64::INFINITY,
                tolerance,
                expect,
                pass: expect == Expectation::Exceeds,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub descriptors: Vec<String>,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// All checks pass, controls included.
    pub pass: bool,
    /// A negative control passed as if it were a correct model.
    pub broken: bool,
}

impl VerificationReport {
    fn assemble(suite: &str, descriptors: Vec<String>, seed: u64, checks: Vec<CheckRecord>) -> Self {
        let broken = checks.iter().any(|c| c.expect == Expectation::Exceeds && !c.pass);
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport { suite: suite.to_string(), descriptors, seed, checks, pass, broken }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only serializable data")
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        let status = if self.pass { "PASS" } else if self.broken { "BROKEN" } else { "FAIL" };
        let _ = writeln!(s, "suite {} (seed {}): {status}", self.suite, self.seed);
        for d in &self.descriptors {
            let _ = writeln!(s, "  model {d}");
        }
        for c in &self.checks {
            let rel = match c.expect {
                Expectation::Within => "<=",
                Expectation::Exceeds => "> ",
            };
            let _ = writeln!(
                s,
                "  {:<width$}  {:>11.3e} {rel} {:>9.1e}  {}",
                c.name,
                c.measured,
                c.tolerance,
                if c.pass { "ok" } else { "FAIL" },
            );
        }
        s
    }
}

fn describe<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("domain types serialize")
}

/// Default grid: `points` values log-spaced in `(c₀ + 0.1·depth, c₀ + 10·depth)`.
pub fn default_l_grid(fam: &AngularFamily, points: usize) -> Vec<f64> {
    let depth = fam.depth();
    let (lo, hi) = ((0.1 * depth).ln(), (10.0 * depth).ln());
    (0..points)
        .map(|i| {
            let t = if points > 1 { i as f64 / (points - 1) as f64 } else { 0.5 };
            fam.c0 + (lo + t * (hi - lo)).exp()
        })
        .collect()
}

/// Isoperiodicity of families sharing `(ν, link)`, and agreement of the
/// period with `−2π(m/n) ∂J_r/∂L`. The control family must not match.
pub fn suite_isoperiodicity(families: &[AngularFamily], l_grid: &[f64], control: &AngularFamily) -> Result<VerificationReport> {
    if families.len() < 2 {
        return Err(Error::InvalidParameters("isoperiodicity needs at least two families".into()));
    }
    if l_grid.is_empty() {
        return Err(Error::InvalidParameters("empty L grid".into()));
    }
    let periods: Vec<Vec<f64>> = families
        .par_iter()
        .map(|f| l_grid.iter().map(|&l| period_quadrature(f, l)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let analytic: Vec<f64> = l_grid.iter().map(|&l| period_from_radial(&families[0], l)).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    let mut spread: f64 = 0.0;
    let mut vs_analytic: f64 = 0.0;
    for (i, &t) in analytic.iter().enumerate() {
        for p in &periods {
            vs_analytic = vs_analytic.max((p[i] - t).abs() / t);
            for q in &periods {
                spread = spread.max((p[i] - q[i]).abs() / t);
            }
        }
    }
    checks.push(CheckRecord::new("max pairwise |T_i - T_j| / T", spread, tolerance::ISOPERIODIC, Expectation::Within));
    checks.push(CheckRecord::new("max |T - T_radial| / T", vs_analytic, tolerance::ISOPERIODIC, Expectation::Within));
    let ctrl: f64 = l_grid
        .iter()
        .zip(&analytic)
        .map(|(&l, &t)| Ok((period_quadrature(control, l)? - t).abs() / t))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(CheckRecord::new("control family: |T - T_radial| / T", ctrl, tolerance::ISOPERIODIC, Expectation::Exceeds));
    let mut desc: Vec<String> = families.iter().map(describe).collect();
    desc.push(format!("control {}", describe(control)));
    Ok(VerificationReport::assemble("isoperiodicity", desc, 0, checks))
}

/// Grid point of [`suite_superintegrability`].
#[derive(Debug)]
struct PointOutcome {
    closure: Result<f64>,
    phase: Result<f64>,
    single: Result<f64>,
}

fn random_placement(model: &Model, l: f64, rng: &mut ChaCha8Rng) -> Result<Placement> {
    let angular = match model.family() {
        Some(f) => {
            let (lo, hi) = angular_turning_points(f, l)?;
            AngularPlacement::Angle { phi: lo + (hi - lo) * rng.random_range(0.05..0.95) }
        }
        None => AngularPlacement::Angle { phi: rng.random_range(0.0..2.0 * PI) },
    };
    Ok(Placement { radial: RadialPlacement::Min, angular, p_r_positive: true, p_phi_positive: rng.random_bool(0.5) })
}

fn run_point(model: &Model, consts: SeparationConstants, m: u32, placement: Placement, with_phase: bool) -> PointOutcome {
    let traj = initial_condition(model, consts, placement).and_then(|s| {
        let t_r = radial_period(model, &s)?;
        let span = if with_phase { (m as f64 + 0.5).max(10.0) } else { m as f64 + 0.5 };
        integrate(model, s, span * t_r, IntegratorControl::suggested(model, consts))
    });
    let traj = match traj {
        Ok(t) => t,
        Err(e) => {
            let msg = e.to_string();
            let err = || Err(Error::StepFailure { t: 0.0, reason: msg.clone() });
            return PointOutcome { closure: err(), phase: err(), single: err() };
        }
    };
    let closure = closure_detect(model, &traj, m).map(|r| r.distance);
    let (phase, single) = if with_phase {
        (
            phase_along(model, &traj, PhasePath::Quadrature).map(|v| phase_drift(&v)),
            single_valued_drift(model, &traj, PhasePath::Quadrature),
        )
    } else {
        (Ok(0.0), Ok(0.0))
    };
    PointOutcome { closure, phase, single }
}

/// Resonance of the actions, orbit closure and phase conservation on a grid.
///
/// `control` is the same model with a perturbed frequency; its orbits must
/// not close.
pub fn suite_superintegrability(
    model: &Model,
    e: f64,
    l_grid: &[f64],
    control: &Model,
    seed: u64,
) -> Result<VerificationReport> {
    let (m, n) = crate::superconstants::winding(model)?;
    let mut checks = Vec::new();
    let comb = action_combination_check(model, e, l_grid, m, n, tolerance::COMBINATION)?;
    checks.push(CheckRecord::new(
        format!("spread of {m} J_r + {n} J_phi at E = {e}"),
        comb.spread,
        tolerance::COMBINATION,
        Expectation::Within,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placements: Vec<Placement> =
        l_grid.iter().map(|&l| random_placement(model, l, &mut rng)).collect::<Result<_>>()?;
    let outcomes: Vec<PointOutcome> = l_grid
        .par_iter()
        .zip(placements.par_iter())
        .map(|(&l, &p)| run_point(model, SeparationConstants::new(e, l), m, p, true))
        .collect();
    for (&l, o) in l_grid.iter().zip(outcomes) {
        checks.push(CheckRecord::from_result(format!("closure after {m} radial periods, L = {l:.6}"), o.closure, tolerance::CLOSURE, Expectation::Within));
        checks.push(CheckRecord::from_result(format!("phase drift over 10 periods, L = {l:.6}"), o.phase, tolerance::PHASE, Expectation::Within));
        checks.push(CheckRecord::from_result(format!("|C(t) - C(0)| over 10 periods, L = {l:.6}"), o.single, tolerance::SINGLE_VALUED, Expectation::Within));
    }
    let l_mid = l_grid[l_grid.len() / 2];
    let p = random_placement(control, l_mid, &mut rng)?;
    let ctrl = run_point(control, SeparationConstants::new(e, l_mid), m, p, false);
    checks.push(CheckRecord::from_result(format!("control: closure after {m} radial periods"), ctrl.closure, tolerance::CLOSURE, Expectation::Exceeds));
    let desc = vec![describe(model), format!("control {}", describe(control))];
    Ok(VerificationReport::assemble("superintegrability", desc, seed, checks))
}

/// Bertrand's two closed central potentials and an open `r³` control.
pub fn suite_bertrand(seed: u64) -> Result<VerificationReport> {
    let osc = Model::central(Curvature::FLAT, RadialPotential::oscillator(0.0, 1.0))?;
    let kep = Model::central(Curvature::FLAT, RadialPotential::kepler(0.0, 1.0, 0.0))?;
    let cubic = Model::central(Curvature::FLAT, RadialPotential::PowerLaw { coefficient: 1.0, exponent: 3.0 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let cases: [(&str, &Model, SeparationConstants, u32, Expectation); 4] = [
        ("oscillator closes after 2 radial periods", &osc, SeparationConstants::new(3.0, 1.0), 2, Expectation::Within),
        ("Kepler closes after 1 radial period", &kep, SeparationConstants::new(-0.3, 0.5), 1, Expectation::Within),
        ("control r^3: open after 1 radial period", &cubic, SeparationConstants::new(4.0, 1.0), 1, Expectation::Exceeds),
        ("control r^3: open after 2 radial periods", &cubic, SeparationConstants::new(4.0, 1.0), 2, Expectation::Exceeds),
    ];
    for (name, model, consts, m, expect) in cases {
        let p = random_placement(model, consts.l, &mut rng)?;
        let o = run_point(model, consts, m, p, false);
        checks.push(CheckRecord::from_result(name, o.closure, tolerance::CLOSURE, expect));
    }
    let desc = vec![describe(&osc), describe(&kep), format!("control {}", describe(&cubic))];
    Ok(VerificationReport::assemble("bertrand", desc, seed, checks))
}

/// Both sides of the Abel equation for the period, and the branch maps
/// `φ±(c)` as inverses of `c(φ)`. The control uses a wrong winding on the
/// radial side.
pub fn suite_abel_consistency(fam: &AngularFamily, l_grid: &[f64]) -> Result<VerificationReport> {
    let (m, n) = fam
        .frequency
        .winding()
        .ok_or_else(|| Error::InvalidParameters("the Abel suite needs a rational frequency".into()))?;
    let rows: Vec<(f64, f64, f64)> = l_grid
        .par_iter()
        .map(|&l| {
            let t = period_quadrature(fam, l)?;
            let rhs = period_from_radial(fam, l)?;
            let wrong = -2.0 * PI * (m as f64 + 1.0) / n as f64 * dj_r_dl_link(fam.link, l)?;
            // invert on both monotone branches at values between c₀ and L
            let mut worst: f64 = 0.0;
            for i in 1..=16 {
                let c = fam.c0 + (l - fam.c0) * i as f64 / 16.0;
                for b in [Branch::Minus, Branch::Plus] {
                    let phi = fam.phi_of_c(c, b)?;
                    worst = worst.max((fam.value(phi)? - c).abs() / c.abs().max(1.0));
                }
            }
            Ok(((t - rhs).abs() / t, (t - wrong).abs() / t, worst))
        })
        .collect::<Result<_>>()?;
    let fold = |k: usize| rows.iter().map(|r| [r.0, r.1, r.2][k]).fold(0.0, f64::max);
    let checks = vec![
        CheckRecord::new("period quadrature vs -2pi (m/n) dJr/dL", fold(0), tolerance::ABEL_PERIOD, Expectation::Within),
        CheckRecord::new("branch maps invert c(phi)", fold(2), tolerance::ABEL_INVERSE, Expectation::Within),
        CheckRecord::new("control: wrong winding on the radial side", fold(1), tolerance::ABEL_PERIOD, Expectation::Exceeds),
    ];
    Ok(VerificationReport::assemble("abel", vec![describe(fam)], 0, checks))
}

/// A model with the family's frequency replaced by an irrational nearby one.
pub fn detuned(model: &Model) -> Result<Model> {
    let fam = model
        .family()
        .ok_or_else(|| Error::InvalidParameters("detuning needs an angular family".into()))?;
    let nu = fam.nu() * (1.0 + 0.05 * SQRT_2);
    Model::with_family(model.curvature, model.radial, fam.with_control_nu(nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::RadialLink;

    fn osc_fam(alpha: f64, beta: f64) -> AngularFamily {
        AngularFamily::new(alpha, beta, 3, 2, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap()
    }

    #[test]
    fn default_grid_spans_depths() {
        let fam = osc_fam(0.3, 0.4);
        let g = default_l_grid(&fam, 8);
        assert_eq!(g.len(), 8);
        assert!((g[0] - (0.5 + 0.07)).abs() < 1e-12 && (g[7] - (0.5 + 7.0)).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn isoperiodicity_and_control() {
        let fams = [osc_fam(0.0, 0.0), osc_fam(0.3, 0.4), osc_fam(0.5, -0.5)];
        let ctrl = AngularFamily::new(0.3, 0.4, 4, 3, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap();
        let grid = default_l_grid(&fams[0], 8);
        let rep = suite_isoperiodicity(&fams, &grid, &ctrl).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        // a "control" that is really isoperiodic is caught as broken
        let rep = suite_isoperiodicity(&fams, &grid, &fams[1]).unwrap();
        assert!(!rep.pass && rep.broken);
    }

    #[test]
    fn abel_suite() {
        let rep = suite_abel_consistency(&osc_fam(0.3, 0.4), &default_l_grid(&osc_fam(0.3, 0.4), 8)).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        let kep = AngularFamily::with_j(0.4, 0.0, 1, 1, 1.0, 1.0, 0.5).unwrap();
        let rep = suite_abel_consistency(&kep, &default_l_grid(&kep, 8)).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
    }

    #[test]
    fn bertrand_suite_is_deterministic() {
        let a = suite_bertrand(7).unwrap();
        assert!(a.pass, "{}", a.to_text());
        let b = suite_bertrand(7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn superintegrability_suite_flat_ttw() {
        let fam = AngularFamily::new(0.3, -0.7, 3, 2, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap();
        let model = Model::with_family(Curvature::FLAT, RadialPotential::oscillator(0.2, 1.0), fam).unwrap();
        let grid = [1.0, 2.0, 3.0];
        let rep = suite_superintegrability(&model, 10.0, &grid, &detuned(&model).unwrap(), 3).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert!(rep.to_text().contains("control"));
    }
}
