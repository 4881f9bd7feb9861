//! Exact cumulants and cumulant generating functions of log-beta variables.
//!
//! For `X ~ beta(a, b)` the CGF of `wa·log X + wb·log(1-X)` is
//! `log B(a + wa z, b + wb z) − log B(a, b)`, so every cumulant is a short
//! polygamma combination:
//!
//! `κ_m = wa^m ψ_{m-1}(a) + wb^m ψ_{m-1}(b) − (wa+wb)^m ψ_{m-1}(a+b)`.
//!
//! `log X` is the case `(1, 0)` and `log(X(1−X))` is `(1, 1)`.

use crate::error::{domain, Error, Result};
use crate::specfun::{self, log_beta_unchecked, polygamma_unchecked, BoundCheck};

/// Shape parameters of a beta distribution on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!(
                "beta shapes must be positive, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }
}

/// Ordered cumulants κ_1..κ_m.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CumulantVector {
    values: Vec<f64>,
}

impl CumulantVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// κ_m, 1-based.
    pub fn get(&self, m: usize) -> Option<f64> {
        m.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(domain("cumulant order must be >= 1"));
    }
    if m - 1 > specfun::MAX_POLYGAMMA_ORDER {
        return Err(Error::UnsupportedOrder {
            order: m - 1,
            max: specfun::MAX_POLYGAMMA_ORDER,
        });
    }
    Ok(())
}

/// m-th cumulant of `wa·log X + wb·log(1−X)`, `X ~ beta(a, b)`.
///
/// Weights must be nonnegative; a zero weight drops the corresponding term
/// (so `b` may be any positive value when `wb = 0`).
pub fn weighted_log_beta_cumulant(m: usize, wa: f64, wb: f64, p: BetaParams) -> Result<f64> {
    check_order(m)?;
    if wa < 0.0 || wb < 0.0 {
        return Err(domain("cumulant weights must be nonnegative"));
    }
    Ok(weighted_cumulant_unchecked(m, wa, wb, p.a, p.b))
}

pub(crate) fn weighted_cumulant_unchecked(m: usize, wa: f64, wb: f64, a: f64, b: f64) -> f64 {
    let k = m - 1;
    let e = m as i32;
    let mut v = 0.0;
    if wa != 0.0 {
        v += wa.powi(e) * polygamma_unchecked(k, a);
    }
    if wb != 0.0 {
        v += wb.powi(e) * polygamma_unchecked(k, b);
    }
    let w = wa + wb;
    if w != 0.0 {
        v -= w.powi(e) * polygamma_unchecked(k, a + b);
    }
    v
}

/// κ_m of `log X`: `ψ_{m−1}(a) − ψ_{m−1}(a+b)`.
pub fn log_beta_cumulant(m: usize, p: BetaParams) -> Result<f64> {
    weighted_log_beta_cumulant(m, 1.0, 0.0, p)
}

/// κ_m of `log(X(1−X))`: `ψ_{m−1}(a) + ψ_{m−1}(b) − 2^m ψ_{m−1}(a+b)`.
pub fn log_beta_sym_cumulant(m: usize, p: BetaParams) -> Result<f64> {
    weighted_log_beta_cumulant(m, 1.0, 1.0, p)
}

/// Cumulants κ_1..κ_order of `wa·log X + wb·log(1−X)`.
pub fn weighted_cumulants(order: usize, wa: f64, wb: f64, p: BetaParams) -> Result<CumulantVector> {
    let values = (1..=order)
        .map(|m| weighted_log_beta_cumulant(m, wa, wb, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulantVector::new(values))
}

/// `log E[X^{wa z} (1−X)^{wb z}] = log B(a + wa z, b + wb z) − log B(a, b)`.
pub fn weighted_log_beta_cgf(z: f64, wa: f64, wb: f64, p: BetaParams) -> Result<f64> {
    let a = p.a + wa * z;
    let b = p.b + wb * z;
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::OutOfStrip {
            z,
            binding: format!(
                "shifted shapes ({a}, {b}) from beta({}, {}) with weights ({wa}, {wb})",
                p.a, p.b
            ),
        });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(log_beta_unchecked(a, b) - log_beta_unchecked(p.a, p.b))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 20 {
        let k = k.min(n - k);
        let mut c: u64 = 1;
        for i in 0..k as u64 {
            c = c * (n as u64 - i) / (i + 1);
        }
        c as f64
    } else {
        let lg = specfun::log_gamma_unchecked;
        (lg(n as f64 + 1.0) - lg(k as f64 + 1.0) - lg((n - k) as f64 + 1.0))
            .exp()
            .round()
    }
}

/// Central moments μ_2..μ_m from cumulants via
/// `μ_n = κ_n + Σ_{j=2}^{n−2} C(n−1, j−1) κ_j μ_{n−j}`. κ_1 is ignored.
pub fn cumulants_to_central_moments(k: &CumulantVector) -> Result<Vec<f64>> {
    let m = k.order();
    if m < 2 {
        return Err(Error::Index(format!(
            "need cumulants up to order >= 2, got {m}"
        )));
    }
    let kap = |j: usize| k.values[j - 1];
    // mu[n] for n = 0..=m; mu[0] = 1, mu[1] = 0
    let mut mu = vec![0.0; m + 1];
    mu[0] = 1.0;
    for n in 2..=m {
        let mut v = kap(n);
        for j in 2..=n.saturating_sub(2) {
            v += binomial(n - 1, j - 1) * kap(j) * mu[n - j];
        }
        mu[n] = v;
    }
    Ok(mu[2..].to_vec())
}

/// The moment bound for `Y = log X` with `a, b >= M`:
/// `|μ_n| <= (n! 2^{n/2} (M∧1)^{−(n−1)/2} (1 + 1/M) + n)^n μ_2^{n/2}`.
pub fn log_moment_bound_check(n: usize, p: BetaParams, slack: f64) -> Result<BoundCheck> {
    if n < 2 {
        return Err(domain("moment order must be >= 2"));
    }
    let mm = p.a.min(p.b);
    let k = weighted_cumulants(n, 1.0, 0.0, p)?;
    let mu = cumulants_to_central_moments(&k)?;
    let mu_n = mu[n - 2];
    let mu_2 = mu[0];
    let nf: f64 = (1..=n).map(|i| i as f64).product();
    let c = nf * 2f64.powf(n as f64 / 2.0) * mm.min(1.0).powf(-(n as f64 - 1.0) / 2.0)
        * (1.0 + 1.0 / mm)
        + n as f64;
    let bound = c.powi(n as i32) * mu_2.powf(n as f64 / 2.0);
    Ok(BoundCheck::new(
        format!("log_moment_bound(n={n}, a={}, b={})", p.a, p.b),
        mu_n.abs(),
        None,
        Some(bound),
        slack,
    ))
}

/// Standardized central moment `|μ_n| / μ_2^{n/2}` of `log(X(1−X))`.
pub fn sym_standardized_moment(n: usize, p: BetaParams) -> Result<f64> {
    if n < 2 {
        return Err(domain("moment order must be >= 2"));
    }
    let k = weighted_cumulants(n, 1.0, 1.0, p)?;
    let mu = cumulants_to_central_moments(&k)?;
    Ok(mu[n - 2].abs() / mu[0].powf(n as f64 / 2.0))
}
