//! Adaptive Gauss–Kronrod (7/15) quadrature with global interval bisection.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_ABS_TOL: f64 = 1e-13;
pub const DEFAULT_REL_TOL: f64 = 1e-13;
const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        k += w * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Piece {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// `∫_a^b f` to within `max(abs_tol, rel_tol·|I|)`. Endpoints are never
/// evaluated, so integrable endpoint singularities are allowed.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    if b < a {
        return integrate(f, b, a, abs_tol, rel_tol).map(|r| QuadResult { value: -r.value, ..r });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let (mut value, mut error) = (first.value, first.error);
    heap.push(first);
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Domain(format!(
                "quadrature did not converge on [{a}, {b}]: error estimate {error:e}"
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        // recompute sums to avoid drift from repeated subtraction
        value = heap.iter().map(|p| p.value).sum();
        error = heap.iter().map(|p| p.error).sum();
    }
    Ok(QuadResult { value, error, intervals: heap.len() })
}

/// [`integrate`] with the default tolerances, returning only the value.
pub fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, DEFAULT_ABS_TOL, DEFAULT_REL_TOL).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let v = quad(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(quad(|x| x, 1.0, 1.0).unwrap(), 0.0);
        assert!((quad(|x| x, 1.0, 0.0).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 log x dx = -1
        let v = quad(|x| x.ln(), 0.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
        // ∫_0^1 log(1 - x) dx = -1
        let v = quad(|x| (-x).ln_1p(), 0.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn oscillatory() {
        let v = quad(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI).unwrap();
        assert!(v.abs() < 1e-13);
    }
}
