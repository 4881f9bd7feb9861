//! Limit objects of the process: covariance kernel, LLN limit, mod-Gaussian
//! speed and limiting function, moderate and large deviation rates, and the
//! precise tail approximation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankelproc::{exact_cgf, exact_cumulant, ProcessParams};
use crate::quad::quad;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `c(t1, t2) = ∫_0^{t1∧t2} (t1 − x)(t2 − x)/(1 − x)² dx` in closed form.
pub fn kernel_c(t1: f64, t2: f64) -> Result<f64> {
    check_unit("t1", t1)?;
    check_unit("t2", t2)?;
    let t = t1.min(t2);
    if t == 1.0 {
        return Ok(1.0);
    }
    let l = (-t).ln_1p();
    Ok((1.0 - t1) * (1.0 - t2) * (1.0 / (1.0 - t) - 1.0) + (2.0 - t1 - t2) * l + t)
}

/// The kernel integral by quadrature.
pub fn kernel_c_quad(t1: f64, t2: f64) -> Result<f64> {
    check_unit("t1", t1)?;
    check_unit("t2", t2)?;
    quad(|x| (t1 - x) * (t2 - x) / ((1.0 - x) * (1.0 - x)), 0.0, t1.min(t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub s1: f64,
    pub s2: f64,
    pub t1: f64,
    pub t2: f64,
    pub c: f64,
    /// `(s1 ∧ s2)²·c/2`.
    pub limit_cov: f64,
}

pub fn kernel_value(s1: f64, t1: f64, s2: f64, t2: f64) -> Result<KernelValue> {
    check_unit("s1", s1)?;
    check_unit("s2", s2)?;
    let c = kernel_c(t1, t2)?;
    let s = s1.min(s2);
    Ok(KernelValue { s1, s2, t1, t2, c, limit_cov: s * s * c / 2.0 })
}

/// `W(m, t) = ∫_0^t ((t − x)/(1 − x))^m dx`.
pub fn weighted_kernel_power(m: usize, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    if m == 0 {
        return Err(Error::Domain("power must be >= 1".into()));
    }
    if t == 1.0 {
        return Ok(1.0);
    }
    if m == 1 {
        return Ok(t + (1.0 - t) * (-t).ln_1p());
    }
    quad(|x| ((t - x) / (1.0 - x)).powi(m as i32), 0.0, t)
}

/// `−(s²/2)(t + (1 − t) log(1 − t))`.
pub fn lln_limit(s: f64, t: f64) -> Result<f64> {
    check_unit("s", s)?;
    Ok(-s * s / 2.0 * weighted_kernel_power(1, t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModGaussianSpeed {
    /// `(p/n)^{2/3} κ_2(H_n(s, t))`.
    pub exact: f64,
    /// `n^{1/3} p^{2/3} (s²/2) W(2, t)`.
    pub asymptotic: f64,
}

pub fn mod_gaussian_speed(params: &ProcessParams, s: f64, t: f64) -> Result<ModGaussianSpeed> {
    let (n, p) = (params.n as f64, params.p as f64);
    let k2 = exact_cumulant(2, params, s, t)?;
    Ok(ModGaussianSpeed {
        exact: (p / n).powf(2.0 / 3.0) * k2,
        asymptotic: n.cbrt() * p.powf(2.0 / 3.0) * s * s / 2.0 * weighted_kernel_power(2, t)?,
    })
}

/// `log ψ(z) = −z³ (s²/6) W(3, t)`.
pub fn mod_gaussian_log_psi(z: f64, s: f64, t: f64) -> Result<f64> {
    check_unit("s", s)?;
    Ok(-z.powi(3) * s * s / 6.0 * weighted_kernel_power(3, t)?)
}

pub fn mod_gaussian_psi(z: f64, s: f64, t: f64) -> Result<f64> {
    mod_gaussian_log_psi(z, s, t).map(f64::exp)
}

/// `log E exp(z c (H − E H)) − t_n z²/2 − log ψ(z)` with `c = (p/n)^{1/3}`,
/// evaluated exactly from the finite beta representation.
pub fn mod_gaussian_gap(params: &ProcessParams, s: f64, t: f64, z: f64) -> Result<f64> {
    let c = (params.p as f64 / params.n as f64).cbrt();
    let k1 = exact_cumulant(1, params, s, t)?;
    let tn = mod_gaussian_speed(params, s, t)?.exact;
    Ok(exact_cgf(c * z, params, s, t)? - c * z * k1 - tn * z * z / 2.0 - mod_gaussian_log_psi(z, s, t)?)
}

/// `x² / (s² W(2, t))`.
pub fn moderate_rate(x: f64, s: f64, t: f64) -> Result<f64> {
    check_unit("s", s)?;
    let d = s * s * weighted_kernel_power(2, t)?;
    if d == 0.0 {
        return Err(Error::Degenerate(format!("moderate rate undefined at s = {s}, t = {t}")));
    }
    Ok(x * x / d)
}

/// `Λ(λ) = −(s²/2) ∫_0^t log(1 + λ(t − y)/(1 − y)) dy`, `λ > −1/t`.
pub fn ldp_lambda(lam: f64, s: f64, t: f64) -> Result<f64> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if lam * t <= -1.0 {
        return Err(Error::Domain(format!("Λ(λ) needs λ > −1/t = {}, got {lam}", -1.0 / t)));
    }
    if t == 1.0 {
        return Ok(-s * s / 2.0 * lam.ln_1p());
    }
    let v = quad(|y| (lam * (t - y) / (1.0 - y)).ln_1p(), 0.0, t)?;
    Ok(-s * s / 2.0 * v)
}

/// `Λ'(λ) = −(s²/2) ∫_0^t g/(1 + λ g) dy`, `g = (t − y)/(1 − y)`.
fn ldp_lambda_prime(lam: f64, s: f64, t: f64) -> Result<f64> {
    if t == 1.0 {
        return Ok(-s * s / 2.0 / (1.0 + lam));
    }
    let v = quad(
        |y| {
            let g = (t - y) / (1.0 - y);
            g / (1.0 + lam * g)
        },
        0.0,
        t,
    )?;
    Ok(-s * s / 2.0 * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEval {
    pub x: f64,
    /// `f64::INFINITY` where the supremum diverges.
    pub value: f64,
    pub argmax_lambda: Option<f64>,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `Λ*(x) = sup_{λ > −1/t} (λx − Λ(λ))` by golden-section search on the
/// concave objective.
pub fn ldp_rate(x: f64, s: f64, t: f64) -> Result<RateEval> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    if s == 0.0 || t == 0.0 {
        return Err(Error::Degenerate(format!("rate undefined at s = {s}, t = {t}")));
    }
    // Λ' < 0 on the whole domain and tends to 0, so λx − Λ grows without
    // bound for x >= 0
    if x >= 0.0 {
        return Ok(RateEval { x, value: f64::INFINITY, argmax_lambda: None });
    }
    let lo = -1.0 / t + 1e-9;
    let mut hi = 1.0;
    let mut grown = 0;
    while x - ldp_lambda_prime(hi, s, t)? > 0.0 {
        hi *= 2.0;
        grown += 1;
        if grown > 200 {
            return Ok(RateEval { x, value: f64::INFINITY, argmax_lambda: None });
        }
    }
    let f = |lam: f64| -> Result<f64> { Ok(lam * x - ldp_lambda(lam, s, t)?) };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a) > 1e-12 * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    let lam = 0.5 * (a + b);
    Ok(RateEval { x, value: f(lam)?.max(0.0), argmax_lambda: Some(lam) })
}

/// Closed form of `Λ*` at `t = 1`, derived from `Λ(λ) = −(s²/2) log(1 + λ)`:
/// `−x − s²/2 + s² log s − (s²/2) log(−2x)` for `x < 0`.
pub fn ldp_rate_t1(x: f64, s: f64) -> f64 {
    if x >= 0.0 {
        return f64::INFINITY;
    }
    let s2 = s * s;
    -x - s2 / 2.0 + s2 * s.ln() - s2 / 2.0 * (-2.0 * x).ln()
}

/// Plus-sign variant of the `t = 1` closed form, `+ (s²/2) log(−2x)` in the last term.
pub fn ldp_rate_t1_printed(x: f64, s: f64) -> f64 {
    if x >= 0.0 {
        return f64::INFINITY;
    }
    let s2 = s * s;
    -(x + s2 / 2.0) + s2 * s.ln() + s2 / 2.0 * (-2.0 * x).ln()
}

/// Numeric transform against both closed forms at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdpComparison {
    pub s: f64,
    pub x: f64,
    pub numeric: f64,
    pub argmax_lambda: Option<f64>,
    pub closed_form: f64,
    pub printed: f64,
    pub matches_closed_form: bool,
    pub matches_printed: bool,
}

pub fn ldp_compare_t1(x: f64, s: f64, tol: f64) -> Result<LdpComparison> {
    let r = ldp_rate(x, s, 1.0)?;
    let closed_form = ldp_rate_t1(x, s);
    let printed = ldp_rate_t1_printed(x, s);
    let close = |a: f64, b: f64| (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= tol;
    Ok(LdpComparison {
        s,
        x,
        numeric: r.value,
        argmax_lambda: r.argmax_lambda,
        closed_form,
        printed,
        matches_closed_form: close(r.value, closed_form),
        matches_printed: close(r.value, printed),
    })
}

/// `(1/(|x| √(2π t_n))) exp(−t_n x²/2 − x³ (s²/6) W(3, t))`.
pub fn tail_asymptotic_with_speed(x: f64, tn: f64, s: f64, t: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("tail approximation needs x != 0".into()));
    }
    let pre = 1.0 / (x.abs() * (2.0 * std::f64::consts::PI * tn).sqrt());
    Ok(pre * (-tn * x * x / 2.0 + mod_gaussian_log_psi(x, s, t)?).exp())
}

/// Tail approximation with `t_n` from the exact second cumulant.
pub fn tail_asymptotic(x: f64, params: &ProcessParams, s: f64, t: f64) -> Result<f64> {
    let tn = mod_gaussian_speed(params, s, t)?.exact;
    tail_asymptotic_with_speed(x, tn, s, t)
}
