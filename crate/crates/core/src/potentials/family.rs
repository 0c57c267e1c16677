//! Two-parameter families of isoperiodic angular potentials.
//!
//! An angular potential `c(φ)` is built in two steps. The linear ansatz
//! `cos 2νG̃(f̃) = α f̃ + β` turns the implicit Abel solution into the
//! quadratic `a(φ) f̃² + b(φ) f̃ + d(φ) = 0`, whose root
//!
//! ```text
//! f̃(φ) = [β(cos 2νφ − α) − sin 2νφ · √(a(φ) − β²)] / a(φ),   a = 1 + α² − 2α cos 2νφ
//! ```
//!
//! is then composed with the inverse `c(f̃)` of the map `f(c)` fixed by the
//! radial potential. Every member of a family (fixed `ν`, link parameters and
//! `c₀`) has the same libration period `T(L)`; `α, β` only reshape the well.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Closest an angle may approach a wall of the angular domain.
pub const ENDPOINT_GUARD: f64 = 1e-12;

/// The parameters of the radial potential that enter the angular family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialLink {
    /// Oscillator-type radial potential, `ν = 2n/m`.
    Oscillator { gamma: f64 },
    /// Ordinary Kepler radial potential (`F = 0`), `ν = n/m`.
    Kepler { b: f64 },
    /// Generalized Kepler radial potential, `ν = n/m`.
    GeneralizedKepler { b: f64, f: f64 },
}

impl RadialLink {
    /// `γ` for the oscillator link, `B` otherwise.
    pub fn shift(&self) -> f64 {
        match *self {
            RadialLink::Oscillator { gamma } => gamma,
            RadialLink::Kepler { b } | RadialLink::GeneralizedKepler { b, .. } => b,
        }
    }

    /// `√F` (zero unless generalized Kepler).
    pub fn sqrt_f(&self) -> f64 {
        match *self {
            RadialLink::GeneralizedKepler { f, .. } => f.max(0.0).sqrt(),
            _ => 0.0,
        }
    }

    pub fn f(&self) -> f64 {
        match *self {
            RadialLink::GeneralizedKepler { f, .. } => f,
            _ => 0.0,
        }
    }

    /// `ν = factor · n/m`.
    pub fn nu_factor(&self) -> f64 {
        match self {
            RadialLink::Oscillator { .. } => 2.0,
            _ => 1.0,
        }
    }

    pub fn is_oscillator_like(&self) -> bool {
        self.sqrt_f() == 0.0
    }
}

/// Winding numbers of the superintegrable combination `m J_r + n J_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Frequency {
    /// Rational `ν`, stored as the integer pair in lowest terms.
    Rational { m: u32, n: u32 },
    /// Arbitrary real `ν`. Breaks the integer resonance; negative controls only.
    Control { nu: f64 },
}

impl Frequency {
    pub fn rational(m: u32, n: u32) -> Self {
        let g = gcd(m, n).max(1);
        Frequency::Rational { m: m / g, n: n / g }
    }

    pub fn winding(&self) -> Option<(u32, u32)> {
        match *self {
            Frequency::Rational { m, n } => Some((m, n)),
            Frequency::Control { .. } => None,
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(φ̃, φ_end = φ̃ + π/ν)` and the location `φ₀` of the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularDomain {
    pub phi_tilde: f64,
    pub phi_end: f64,
    pub phi0: f64,
}

impl AngularDomain {
    pub fn contains(&self, phi: f64) -> bool {
        phi > self.phi_tilde + ENDPOINT_GUARD && phi < self.phi_end - ENDPOINT_GUARD
    }

    pub fn width(&self) -> f64 {
        self.phi_end - self.phi_tilde
    }
}

/// Which monotone branch of `c(φ)`: left of the minimum (`Minus`) or right (`Plus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Minus,
    Plus,
}

/// `f̃` together with `1 ± f̃` computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTilde {
    pub value: f64,
    pub one_plus: f64,
    pub one_minus: f64,
}

impl FTilde {
    pub fn from_value(value: f64) -> Self {
        FTilde { value, one_plus: 1.0 + value, one_minus: 1.0 - value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyViolation {
    NonFinite,
    SquareConstraint { sum: f64 },
    DegenerateDomain,
    ZeroWinding,
    InvalidControlFrequency { nu: f64 },
    NegativeLinkParameter { name: &'static str, value: f64 },
    OscillatorWellDepth { gamma_plus_c0: f64 },
    ComplexKeplerWell { discriminant: f64 },
    KeplerWellDepth { value: f64 },
}

impl fmt::Display for FamilyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyViolation::NonFinite => write!(f, "parameters must be finite"),
            FamilyViolation::SquareConstraint { sum } => {
                write!(f, "|alpha| + |beta| = {sum} exceeds 1")
            }
            FamilyViolation::DegenerateDomain => {
                write!(f, "corner (alpha, beta) = (+-1, 0) leaves no domain around the minimum")
            }
            FamilyViolation::ZeroWinding => write!(f, "winding numbers m, n must be positive"),
            FamilyViolation::InvalidControlFrequency { nu } => {
                write!(f, "control frequency nu = {nu} must be positive and finite")
            }
            FamilyViolation::NegativeLinkParameter { name, value } => {
                write!(f, "link parameter {name} = {value} must be >= 0")
            }
            FamilyViolation::OscillatorWellDepth { gamma_plus_c0 } => {
                write!(f, "gamma + c0 = {gamma_plus_c0} must be > 0")
            }
            FamilyViolation::ComplexKeplerWell { discriminant } => {
                write!(f, "(c0 + B)^2 - F = {discriminant} must be >= 0")
            }
            FamilyViolation::KeplerWellDepth { value } => {
                write!(f, "c0 + B + sqrt(F) = {value} must be > 0")
            }
        }
    }
}

/// Outcome of [`AngularFamily::validate`]; empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<FamilyViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// A member of the (α, β) family of angular potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularFamily {
    pub alpha: f64,
    pub beta: f64,
    pub frequency: Frequency,
    /// Value of the potential at its minimum.
    pub c0: f64,
    pub link: RadialLink,
}

impl AngularFamily {
    /// Validated constructor.
    pub fn new(alpha: f64, beta: f64, m: u32, n: u32, c0: f64, link: RadialLink) -> Result<Self> {
        let fam = AngularFamily { alpha, beta, frequency: Frequency::rational(m, n), c0, link };
        fam.checked()
    }

    /// Generalized-Kepler family parameterized by `J = c₀ + √((c₀+B)² − F)` instead of `c₀`.
    pub fn with_j(alpha: f64, beta: f64, m: u32, n: u32, j: f64, b: f64, f: f64) -> Result<Self> {
        if !(j + b > 0.0) {
            return Err(Error::InvalidParameters(format!("J + B = {} must be > 0", j + b)));
        }
        let c0 = (j * j - b * b + f) / (2.0 * (j + b));
        let link = if f == 0.0 {
            RadialLink::Kepler { b }
        } else {
            RadialLink::GeneralizedKepler { b, f }
        };
        let fam = AngularFamily::new(alpha, beta, m, n, c0, link)?;
        if (fam.j() - j).abs() > 1e-12 * j.abs().max(1.0) {
            return Err(Error::InvalidParameters(format!(
                "J = {j} is not reachable for B = {b}, F = {f}"
            )));
        }
        Ok(fam)
    }

    /// Same family with its frequency replaced by an arbitrary real `ν`.
    pub fn with_control_nu(mut self, nu: f64) -> Self {
        self.frequency = Frequency::Control { nu };
        self
    }

    pub fn checked(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidParameters(report.to_string()))
        }
    }

    /// Every violated constraint of the family.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let (a, b) = (self.alpha, self.beta);
        if !a.is_finite() || !b.is_finite() || !self.c0.is_finite() {
            v.push(FamilyViolation::NonFinite);
            return ValidationReport { violations: v };
        }
        let sum = a.abs() + b.abs();
        if sum > 1.0 + 1e-15 {
            v.push(FamilyViolation::SquareConstraint { sum });
        } else if b.abs() < 1e-15 && (a.abs() - 1.0).abs() < 1e-15 {
            v.push(FamilyViolation::DegenerateDomain);
        }
        match self.frequency {
            Frequency::Rational { m, n } => {
                if m == 0 || n == 0 {
                    v.push(FamilyViolation::ZeroWinding);
                }
            }
            Frequency::Control { nu } => {
                if !(nu > 0.0) || !nu.is_finite() {
                    v.push(FamilyViolation::InvalidControlFrequency { nu });
                }
            }
        }
        match self.link {
            RadialLink::Oscillator { gamma } => {
                if !(gamma >= 0.0) {
                    v.push(FamilyViolation::NegativeLinkParameter { name: "gamma", value: gamma });
                }
                if !(gamma + self.c0 > 0.0) {
                    v.push(FamilyViolation::OscillatorWellDepth { gamma_plus_c0: gamma + self.c0 });
                }
            }
            RadialLink::Kepler { b } | RadialLink::GeneralizedKepler { b, .. } => {
                let f = self.link.f();
                if !(b >= 0.0) {
                    v.push(FamilyViolation::NegativeLinkParameter { name: "B", value: b });
                }
                if !(f >= 0.0) {
                    v.push(FamilyViolation::NegativeLinkParameter { name: "F", value: f });
                }
                let disc = (self.c0 + b).powi(2) - f;
                if !(disc >= 0.0) {
                    v.push(FamilyViolation::ComplexKeplerWell { discriminant: disc });
                }
                let depth = self.c0 + b + f.max(0.0).sqrt();
                if !(depth > 0.0) {
                    v.push(FamilyViolation::KeplerWellDepth { value: depth });
                }
            }
        }
        ValidationReport { violations: v }
    }

    pub fn nu(&self) -> f64 {
        match self.frequency {
            Frequency::Rational { m, n } => self.link.nu_factor() * n as f64 / m as f64,
            Frequency::Control { nu } => nu,
        }
    }

    /// `m/n` as it enters the closed-form actions (`2/ν` or `1/ν`).
    pub fn m_over_n(&self) -> f64 {
        match self.frequency {
            Frequency::Rational { m, n } => m as f64 / n as f64,
            Frequency::Control { nu } => self.link.nu_factor() / nu,
        }
    }

    /// `J = c₀ + √((c₀+B)² − F)`; for the oscillator link the analogous `2c₀ + γ`.
    pub fn j(&self) -> f64 {
        let s = self.link.shift();
        let disc = ((self.c0 + s).powi(2) - self.link.f()).max(0.0);
        self.c0 + disc.sqrt()
    }

    /// Well depth scale: `γ + c₀` (oscillator link) or `J + B` (Kepler links).
    pub fn depth(&self) -> f64 {
        match self.link {
            RadialLink::Oscillator { gamma } => gamma + self.c0,
            _ => self.j() + self.link.shift(),
        }
    }

    /// `f(c)`, mapping `[c₀, ∞)` onto `(−1, 1]`.
    pub fn f_of_c(&self, c: f64) -> Result<f64> {
        if !(c >= self.c0) {
            return domain(format!("f(c) needs c >= c0 = {}, got {c}", self.c0));
        }
        Ok(self.f_of_c_unchecked(c))
    }

    pub(crate) fn f_of_c_unchecked(&self, c: f64) -> f64 {
        let s = self.link.shift();
        if self.link.is_oscillator_like() {
            (2.0 * self.c0 + s - c) / (c + s)
        } else {
            let r = ((c + s).powi(2) - self.link.f()).max(0.0).sqrt();
            (self.j() - c) / r
        }
    }

    /// `df/dc`.
    pub fn df_dc(&self, c: f64) -> f64 {
        let s = self.link.shift();
        if self.link.is_oscillator_like() {
            -2.0 * (self.c0 + s) / (c + s).powi(2)
        } else {
            let f = self.link.f();
            let u = c + s;
            let r2 = u * u - f;
            -(u * (self.j() + s) - f) / (r2 * r2.sqrt())
        }
    }

    /// Inverse of [`f_of_c`](Self::f_of_c).
    pub fn c_of_ftilde(&self, ftilde: f64) -> Result<f64> {
        if !(ftilde > -1.0 && ftilde <= 1.0) {
            return domain(format!("f~ must lie in (-1, 1], got {ftilde}"));
        }
        Ok(self.c_of(FTilde::from_value(ftilde)))
    }

    pub(crate) fn c_of(&self, ft: FTilde) -> f64 {
        let s = self.link.shift();
        if self.link.is_oscillator_like() {
            2.0 * (s + self.c0) / ft.one_plus - s
        } else {
            let branch = if self.j() + s > 0.0 { Branch::Minus } else { Branch::Plus };
            kepler_inverse(self.j(), s, self.link.f(), ft, branch)
        }
    }

    /// `c − c₀` at a given `f̃`, free of cancellation near the minimum.
    pub(crate) fn excess_of(&self, ft: FTilde) -> f64 {
        if self.link.is_oscillator_like() {
            (self.link.shift() + self.c0) * ft.one_minus / ft.one_plus
        } else {
            self.c_of(ft) - self.c0
        }
    }

    /// `dc/df̃` at the potential value `c`.
    pub fn dc_dftilde(&self, c: f64) -> f64 {
        1.0 / self.df_dc(c)
    }

    /// Domain `(φ̃, φ̃ + π/ν)` and minimum `φ₀`.
    pub fn domain(&self) -> AngularDomain {
        let nu = self.nu();
        let t_tilde = (self.alpha - self.beta).clamp(-1.0, 1.0).acos();
        let t0 = 2.0 * PI - (self.alpha + self.beta).clamp(-1.0, 1.0).acos();
        AngularDomain {
            phi_tilde: t_tilde / (2.0 * nu),
            phi_end: t_tilde / (2.0 * nu) + PI / nu,
            phi0: t0 / (2.0 * nu),
        }
    }

    /// `f̃(φ)` without any domain check (the formula is `π/ν`-periodic).
    pub fn ftilde_raw(&self, phi: f64) -> FTilde {
        let (a_, b_) = (self.alpha, self.beta);
        let theta = 2.0 * self.nu() * phi;
        let (sin, cos) = theta.sin_cos();
        let a = 1.0 + a_ * a_ - 2.0 * a_ * cos;
        let root = radicand(a_, b_, theta).max(0.0).sqrt();
        let u = b_ * (cos - a_);
        let v = sin * root;
        let value = (u - v) / a;
        // On the edges |α| + |β| = 1 the walls sit at cos θ = ±1, where
        // cos θ − α ± β and a ± u vanish. Each is expanded around the nearer of
        // the two points with the distance in half-angle form.
        let (h_sin, h_cos) = (0.5 * theta).sin_cos();
        let (near, dc) = if h_sin.abs() <= h_cos.abs() { (1.0, -2.0 * h_sin * h_sin) } else { (-1.0, 2.0 * h_cos * h_cos) };
        let c_plus = dc + (near - a_ + b_); // cos θ − α + β
        let c_minus = dc + (near - a_ - b_); // cos θ − α − β
        let a_plus_u = (near - a_) * (near - a_ + b_) + (b_ - 2.0 * a_) * dc;
        let a_minus_u = (near - a_) * (near - a_ - b_) - (2.0 * a_ + b_) * dc;
        // a(1 + f̃₋)(1 + f̃₊) = (cos − α + β)², and the same with a sign flip for 1 − f̃.
        let one_plus = if v > 0.0 { c_plus * c_plus / (a_plus_u + v) } else { (a_plus_u - v) / a };
        let one_minus = if v < 0.0 { c_minus * c_minus / (a_minus_u - v) } else { (a_minus_u + v) / a };
        FTilde { value, one_plus, one_minus }
    }

    /// `(f̃(φ), df̃/dφ)` without a domain check.
    pub(crate) fn ftilde_with_derivative(&self, phi: f64) -> (FTilde, f64) {
        let (a_, b_) = (self.alpha, self.beta);
        let nu = self.nu();
        let theta = 2.0 * nu * phi;
        let (sin, cos) = theta.sin_cos();
        let a = 1.0 + a_ * a_ - 2.0 * a_ * cos;
        let root = radicand(a_, b_, theta).max(0.0).sqrt();
        let num = b_ * (cos - a_) - sin * root;
        let da = 2.0 * a_ * sin;
        let droot = if root > 1e-300 { a_ * sin / root } else { 0.0 };
        let dnum = -b_ * sin - cos * root - sin * droot;
        let df_dtheta = (dnum * a - num * da) / (a * a);
        (self.ftilde_raw(phi), 2.0 * nu * df_dtheta)
    }

    pub(crate) fn domain_check(&self, phi: f64) -> Result<AngularDomain> {
        let dom = self.domain();
        if !phi.is_finite() || !dom.contains(phi) {
            return domain(format!(
                "phi = {phi} outside the angular domain ({}, {})",
                dom.phi_tilde, dom.phi_end
            ));
        }
        Ok(dom)
    }

    /// `f̃(φ)` on the open domain.
    pub fn ftilde_of_phi(&self, phi: f64) -> Result<f64> {
        self.domain_check(phi)?;
        Ok(self.ftilde_raw(phi).value)
    }

    /// `c(φ) = c(f̃(φ))` on the open domain.
    pub fn value(&self, phi: f64) -> Result<f64> {
        self.domain_check(phi)?;
        Ok(self.c_of(self.ftilde_raw(phi)))
    }

    /// `(c(φ), dc/dφ)` on the open domain.
    pub fn value_and_derivative(&self, phi: f64) -> Result<(f64, f64)> {
        self.domain_check(phi)?;
        let (ft, dft) = self.ftilde_with_derivative(phi);
        let c = self.c_of(ft);
        let dc = if self.link.is_oscillator_like() {
            -2.0 * (self.link.shift() + self.c0) / (ft.one_plus * ft.one_plus)
        } else {
            self.dc_dftilde(c)
        };
        Ok((c, dc * dft))
    }

    /// `c(φ) − c₀`, accurate close to the minimum.
    pub(crate) fn excess(&self, phi: f64) -> Result<f64> {
        self.domain_check(phi)?;
        Ok(self.excess_of(self.ftilde_raw(phi)))
    }

    /// Inverse branch maps `φ±(c)`: `2νφ± = 2π ± arccos f(c) − arccos(α f(c) + β)`.
    pub fn phi_of_c(&self, c: f64, branch: Branch) -> Result<f64> {
        let f = self.f_of_c(c)?.clamp(-1.0, 1.0);
        let sign = match branch {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        };
        let g = (self.alpha * f + self.beta).clamp(-1.0, 1.0).acos();
        Ok((2.0 * PI + sign * f.acos() - g) / (2.0 * self.nu()))
    }
}

/// `1 + α² − 2α cos θ − β²`, expanded around whichever of `cos θ = ±1` is
/// closer. On the domain edges the constant part vanishes and the naive
/// difference would lose every digit next to the walls.
fn radicand(alpha: f64, beta: f64, theta: f64) -> f64 {
    let (h_sin, h_cos) = (0.5 * theta).sin_cos();
    if h_sin.abs() <= h_cos.abs() {
        // 1 − cos θ = 2 sin²(θ/2)
        ((1.0 - alpha).powi(2) - beta * beta) + 4.0 * alpha * h_sin * h_sin
    } else {
        // 1 + cos θ = 2 cos²(θ/2)
        ((1.0 + alpha).powi(2) - beta * beta) - 4.0 * alpha * h_cos * h_cos
    }
}

/// `c±(f̃)` for the generalized Kepler link, switching between the two
/// algebraically equivalent forms so that neither `f̃ → 1` nor `f̃ → −1` cancels.
pub(crate) fn kepler_inverse(j: f64, b: f64, f: f64, ft: FTilde, branch: Branch) -> f64 {
    let x = ft.value;
    let root = ((j + b).powi(2) + f * (x * x - 1.0)).max(0.0).sqrt();
    let sign = match branch {
        Branch::Minus => -1.0,
        Branch::Plus => 1.0,
    };
    if x >= 0.0 {
        // rationalized form, regular at f̃ = 1
        (j * j + (f - b * b) * x * x) / (j + b * x * x - sign * x * root)
    } else {
        (j + b * x * x + sign * x * root) / (ft.one_plus * ft.one_minus)
    }
}

/// Free-function form of [`AngularFamily::validate`].
pub fn validate_family(fam: &AngularFamily) -> ValidationReport {
    fam.validate()
}
