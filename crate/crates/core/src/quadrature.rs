//! Adaptive Gauss–Kronrod quadrature and its turning-point variant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// Nodes and weights keep the digits of the published tables.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

/// Value, error estimate and number of integrand calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let (value, error) = (k * h, ((k - g) * h).abs());
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive G7K15 quadrature of `f` over `[a, b]` split at `breaks`.
///
/// Converges when the summed error estimate falls below
/// `max(rel_tol · |I|, abs_tol)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    points.extend(inner);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        heap.push(kronrod(&mut f, w[0], w[1])?);
        evaluations += 15;
    }
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.error).sum();
        let target = (rel_tol * total.abs()).max(abs_tol);
        // Below this the Kronrod-Gauss difference is rounding noise.
        let noise = 50.0 * f64::EPSILON * heap.iter().map(|s| s.value.abs()).sum::<f64>();
        if err <= target || err <= noise {
            return Ok(QuadResult { value: sign * total, error: err, evaluations });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{lo}, {hi}]: estimate {total}, error {err}, target {target}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further; freeze it.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod(&mut f, worst.a, mid)?);
        heap.push(kronrod(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

/// `∫_a^b f` to relative tolerance `rel_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    Ok(integrate_adaptive(f, a, b, &[], rel_tol, 0.0)?.value)
}

/// Change of variables `x = a + (b − a) sin²(θ/2)`, `θ ∈ [0, π]`, that absorbs
/// square-root behaviour of the integrand at both ends of `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningMap {
    pub a: f64,
    pub b: f64,
}

impl TurningMap {
    pub fn new(a: f64, b: f64) -> Self {
        TurningMap { a, b }
    }

    pub fn x(&self, theta: f64) -> f64 {
        let w = self.b - self.a;
        if theta <= 0.5 * PI {
            self.a + w * (0.5 * theta).sin().powi(2)
        } else {
            self.b - w * (0.5 * theta).cos().powi(2)
        }
    }

    /// `(x − a, b − x)` computed without cancellation.
    pub fn gaps(&self, theta: f64) -> (f64, f64) {
        let w = self.b - self.a;
        (w * (0.5 * theta).sin().powi(2), w * (0.5 * theta).cos().powi(2))
    }

    /// `dx/dθ = (b − a) sin θ / 2`.
    pub fn jacobian(&self, theta: f64) -> f64 {
        0.5 * (self.b - self.a) * theta.sin()
    }

    /// Inverse map, accurate near either end.
    pub fn theta(&self, x: f64) -> f64 {
        let w = self.b - self.a;
        if w <= 0.0 {
            return 0.0;
        }
        let mid = 0.5 * (self.a + self.b);
        if x <= mid {
            2.0 * ((x - self.a) / w).clamp(0.0, 1.0).sqrt().asin()
        } else {
            PI - 2.0 * ((self.b - x) / w).clamp(0.0, 1.0).sqrt().asin()
        }
    }
}

/// `∫_{x0}^{x1} f(x) dx` for `a ≤ x0, x1 ≤ b`, where `f` may behave like
/// `1/√(x − a)` or `√(x − a)` at the ends (and likewise at `b`). The integrand
/// receives `(x, x − a, b − x)`; `breaks` are interior points where `f` loses
/// smoothness.
pub fn integrate_turning<F>(
    mut f: F,
    map: TurningMap,
    x0: f64,
    x1: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<QuadResult>
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let t0 = map.theta(x0);
    let t1 = map.theta(x1);
    let tbreaks: Vec<f64> = breaks.iter().map(|&x| map.theta(x)).collect();
    integrate_adaptive(
        |t| {
            let (ga, gb) = map.gaps(t);
            f(map.x(t), ga, gb) * map.jacobian(t)
        },
        t0,
        t1,
        &tbreaks,
        rel_tol,
        0.0,
    )
}

/// Shape of a turning-point integrand in the momentum gap `g(x) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPower {
    /// `w(x) √g(x)`, as in the action integrals.
    Sqrt,
    /// `w(x) / √g(x)`, as in periods and angle variables.
    InvSqrt,
}

/// Relative distance from a turning point inside which `g` is replaced by its
/// linearization; closer in, rounding in `g` exceeds the linearization error.
const LINEARIZE_BELOW: f64 = 1e-9;

/// `∫_{x0}^{x1} w(x) g(x)^{±1/2} dx` between simple zeros `a < b` of the gap
/// `g`, whose one-sided slopes `g ≈ slope_a (x − a)` and `g ≈ slope_b (b − x)`
/// are supplied by the caller.
#[allow(clippy::too_many_arguments)]
pub fn integrate_gap<G, W>(
    gap: G,
    weight: W,
    power: GapPower,
    map: TurningMap,
    slopes: (f64, f64),
    x0: f64,
    x1: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult>
where
    G: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let width = map.b - map.a;
    let (sa, sb) = slopes;
    let tbreaks: Vec<f64> = breaks.iter().map(|&x| map.theta(x)).collect();
    integrate_adaptive(
        |t| {
            let (ga, gb) = map.gaps(t);
            // ratio = g / (ga gb) stays finite and smooth at both ends
            let ratio = if ga < LINEARIZE_BELOW * width {
                sa / gb
            } else if gb < LINEARIZE_BELOW * width {
                sb / ga
            } else {
                let g = gap(map.x(t));
                if g > 0.0 {
                    g / (ga * gb)
                } else if ga < gb {
                    sa / gb
                } else {
                    sb / ga
                }
            };
            let w = weight(map.x(t));
            // dx/dθ = √(ga gb)
            match power {
                GapPower::Sqrt => w * ratio.max(0.0).sqrt() * ga * gb,
                GapPower::InvSqrt => w / ratio.sqrt(),
            }
        },
        map.theta(x0),
        map.theta(x1),
        &tbreaks,
        rel_tol,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(20), 0.0, 1.0, 1e-15).unwrap();
        assert!((v - 1.0 / 21.0).abs() < 1e-16);
        let v = integrate(|x| 3.0 * x * x, 2.0, -1.0, 1e-15).unwrap();
        assert!((v + 9.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(|x| (50.0 * x).cos(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 50f64.sin() / 50.0).abs() < 1e-15);
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-13).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn turning_map_round_trip() {
        let m = TurningMap::new(0.3, 2.1);
        for i in 0..=100 {
            let t = PI * i as f64 / 100.0;
            assert!((m.theta(m.x(t)) - t).abs() < 1e-7, "{t}");
            let (ga, gb) = m.gaps(t);
            assert!((ga + gb - 1.8).abs() < 1e-15);
        }
        assert_eq!(m.theta(0.3), 0.0);
        assert_eq!(m.theta(2.1), PI);
    }

    #[test]
    fn square_root_endpoints() {
        // ∫_{-1}^{1} dx / √(1 − x²) = π and ∫ √(1 − x²) = π/2
        let m = TurningMap::new(-1.0, 1.0);
        let v = integrate_turning(|_, ga, gb| 1.0 / (ga * gb).sqrt(), m, -1.0, 1.0, &[], 1e-15).unwrap();
        assert!((v.value - PI).abs() < 1e-14);
        let v = integrate_turning(|_, ga, gb| (ga * gb).sqrt(), m, -1.0, 1.0, &[], 1e-15).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-14);
        // Partial: ∫_{-1}^{x} dx/√(1 − x²) = arcsin x + π/2.
        for &x in &[-0.999999, -0.3, 0.5, 0.9999999] {
            let v = integrate_turning(|_, ga, gb| 1.0 / (ga * gb).sqrt(), m, -1.0, x, &[0.0], 1e-15).unwrap();
            assert!((v.value - (x.asin() + PI / 2.0)).abs() < 1e-13, "{x}");
        }
    }
}
