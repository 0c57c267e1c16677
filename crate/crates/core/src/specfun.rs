//! Carlson symmetric elliptic integrals and the incomplete elliptic integral
//! of the third kind.
//!
//! Convention: the characteristic enters with a minus sign,
//!
//! ```text
//! Π(Λ, Ω, Υ) = ∫₀^Λ dx / ((1 − Ω sin²x) √(1 − Υ² sin²x))
//! ```
//!
//! so `Ω < 0` is always regular and `Ω sin²x = 1` is the Cauchy singularity.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance `r` of the duplication algorithm; the truncation error of the
/// fifth-order series is bounded by roughly `r` itself.
const DUPLICATION_R: f64 = f64::EPSILON / 4.0;

/// Carlson's `R_F(x, y, z) = ½ ∫₀^∞ dt / √((t+x)(t+y)(t+z))`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) || !(x + y + z).is_finite() {
        return domain(format!("R_F needs finite non-negative arguments, got ({x}, {y}, {z})"));
    }
    if (x == 0.0) as u8 + (y == 0.0) as u8 + (z == 0.0) as u8 > 1 {
        return domain("R_F is infinite when two arguments vanish");
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let mut a = a0;
    let q = (3.0 * DUPLICATION_R).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let (x0, y0) = (x, y);
    let mut scale = 1.0;
    while scale * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        scale *= 0.25;
    }
    let xx = (a0 - x0) * scale / a;
    let yy = (a0 - y0) * scale / a;
    let zz = -xx - yy;
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt())
}

/// `R_C(1, 1 + e)` for `e > −1`, with a series near `e = 0`.
fn rc_one(e: f64) -> f64 {
    if e.abs() < 1e-4 {
        1.0 - e / 3.0 + e * e / 5.0 - e * e * e / 7.0 + e * e * e * e / 9.0
    } else if e > 0.0 {
        let s = e.sqrt();
        s.atan() / s
    } else {
        let s = (-e).sqrt();
        s.atanh() / s
    }
}

/// Carlson's `R_J(x, y, z, p) = (3/2) ∫₀^∞ dt / ((t+p) √((t+x)(t+y)(t+z)))` for `p > 0`.
pub fn carlson_rj(x: f64, y: f64, z: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return domain(format!("R_J needs p > 0 (no principal values), got p = {p}"));
    }
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) || !(x + y + z).is_finite() {
        return domain(format!("R_J needs finite non-negative x, y, z, got ({x}, {y}, {z})"));
    }
    if (x == 0.0) as u8 + (y == 0.0) as u8 + (z == 0.0) as u8 > 1 {
        return domain("R_J is infinite when two of x, y, z vanish");
    }
    let (x0, y0, z0) = (x, y, z);
    let (mut x, mut y, mut z, mut p) = (x, y, z, p);
    let a0 = (x + y + z + 2.0 * p) / 5.0;
    let mut a = a0;
    let delta = (p - x) * (p - y) * (p - z);
    let q = (0.25 * DUPLICATION_R).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs()).max((a0 - p).abs());
    let mut scale = 1.0;
    let mut sum = 0.0;
    while scale * q >= a.abs() {
        let (sx, sy, sz, sp) = (x.sqrt(), y.sqrt(), z.sqrt(), p.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        let d = (sp + sx) * (sp + sy) * (sp + sz);
        let e = scale * scale * scale * delta / (d * d);
        sum += scale / d * rc_one(e);
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        p = 0.25 * (p + lambda);
        a = 0.25 * (a + lambda);
        scale *= 0.25;
    }
    let xx = (a0 - x0) * scale / a;
    let yy = (a0 - y0) * scale / a;
    let zz = (a0 - z0) * scale / a;
    let pp = -0.5 * (xx + yy + zz);
    let e2 = xx * yy + xx * zz + yy * zz - 3.0 * pp * pp;
    let e3 = xx * yy * zz + 2.0 * e2 * pp + 4.0 * pp * pp * pp;
    let e4 = (2.0 * xx * yy * zz + e2 * pp + 3.0 * pp * pp * pp) * pp;
    let e5 = xx * yy * zz * pp * pp;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    Ok(scale * series / (a * a.sqrt()) + 6.0 * sum)
}

/// Arguments of [`ellip_pi`]: amplitude `Λ`, characteristic `Ω`, modulus `Υ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticArgs {
    pub lambda: f64,
    pub omega: f64,
    pub upsilon: f64,
}

impl EllipticArgs {
    pub fn new(lambda: f64, omega: f64, upsilon: f64) -> Self {
        EllipticArgs { lambda, omega, upsilon }
    }
}

/// `Π(Λ, Ω, Υ)` on `|Λ| ≤ π/2`.
fn ellip_pi_reduced(lambda: f64, omega: f64, k2: f64) -> Result<f64> {
    let (s, c) = lambda.sin_cos();
    let s2 = s * s;
    let y = 1.0 - k2 * s2;
    let c2 = c * c;
    let rf = carlson_rf(c2, y, 1.0)?;
    if omega == 0.0 || s == 0.0 {
        return Ok(s * rf);
    }
    let p = 1.0 - omega * s2;
    let rj = carlson_rj(c2, y, 1.0, p)?;
    Ok(s * rf + omega * s * s2 * rj / 3.0)
}

/// Incomplete elliptic integral of the third kind in the `(1 − Ω sin²x)` convention.
pub fn ellip_pi(args: EllipticArgs) -> Result<f64> {
    let EllipticArgs { lambda, omega, upsilon } = args;
    if !lambda.is_finite() || !omega.is_finite() || !upsilon.is_finite() {
        return domain("elliptic integral arguments must be finite");
    }
    let k2 = upsilon * upsilon;
    let reach = if lambda.abs() >= FRAC_PI_2 { 1.0 } else { lambda.sin().powi(2) };
    if k2 * reach >= 1.0 {
        return domain(format!(
            "modulus {upsilon} too large for amplitude {lambda}: |Υ sin Λ| must stay < 1"
        ));
    }
    if omega * reach >= 1.0 {
        return Err(Error::Singularity(format!(
            "1 − Ω sin²x vanishes on [0, {lambda}] for Ω = {omega}"
        )));
    }
    let sign = lambda.signum();
    let lam = lambda.abs();
    // Π(jπ + λ') = 2j Π(π/2) + Π(λ') with λ' ∈ (−π/2, π/2].
    let j = (lam / std::f64::consts::PI).round();
    let rest = lam - j * std::f64::consts::PI;
    let mut value = ellip_pi_reduced(rest, omega, k2)?;
    if j != 0.0 {
        value += 2.0 * j * ellip_pi_reduced(FRAC_PI_2, omega, k2)?;
    }
    Ok(sign * value)
}
