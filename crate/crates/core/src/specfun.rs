//! Log-gamma, digamma and polygamma functions for positive real arguments.
//!
//! Polygamma values are computed by shifting the argument upward with the
//! recurrence `ψ_k(x+1) = ψ_k(x) + (-1)^k k! x^{-(k+1)}` and then summing the
//! Euler–Maclaurin asymptotic series. Log-gamma uses Taylor series about 1 and
//! 2 on `[0.5, 2.5)` so that the zeros at 1 and 2 are reproduced exactly.
//!
//! The [`inequalities`] submodule exposes the classical polygamma bounds used
//! throughout the cumulant estimates as runtime-checkable predicates.

use crate::error::{domain, Error, Result};

/// Largest polygamma order accepted by [`polygamma`].
pub const MAX_POLYGAMMA_ORDER: usize = 16;

/// Base argument above which the asymptotic series is used. The effective
/// threshold grows with the order so the truncation error stays near 1e-16.
pub const SHIFT_THRESHOLD: f64 = 10.0;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bernoulli numbers B_2, B_4, ..., B_40.
const BERNOULLI_EVEN: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

/// ζ(k) − 1 for k = 2..=40.
const ZETA_MINUS_ONE: [f64; 39] = [
    6.449_340_668_482_264e-1,
    2.020_569_031_595_943e-1,
    8.232_323_371_113_819e-2,
    3.692_775_514_336_993e-2,
    1.734_306_198_444_914e-2,
    8.349_277_381_922_827e-3,
    4.077_356_197_944_34e-3,
    2.008_392_826_082_214e-3,
    9.945_751_278_180_853e-4,
    4.941_886_041_194_645e-4,
    2.460_865_533_080_483e-4,
    1.227_133_475_784_891e-4,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_763e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_962e-7,
    4.769_329_867_878_064e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_43e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_1e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_482e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_888e-13,
];

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} requires a finite positive argument, got {x}")))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `ln Γ(2+z)` for `|z| <= 0.5`, exact zero at `z = 0`.
fn log_gamma_near_two(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = z;
    for (idx, c) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = idx + 2;
        zk *= z;
        let term = c * zk / k as f64;
        let signed = if k % 2 == 0 { term } else { -term };
        sum += signed;
        if term.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    z * (1.0 - EULER_GAMMA) + sum
}

fn log_gamma_stirling(x: f64) -> f64 {
    let half_ln_2pi = 0.918_938_533_204_672_8;
    let mut series = 0.0;
    let x2 = x * x;
    let mut xpow = x;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * (j + 1);
        let term = b / ((n * (n - 1)) as f64 * xpow);
        series += term;
        if term.abs() < 1e-18 * series.abs() {
            break;
        }
        xpow *= x2;
    }
    (x - 0.5) * x.ln() - x + half_ln_2pi + series
}

/// Natural logarithm of the gamma function, `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x >= SHIFT_THRESHOLD {
        log_gamma_stirling(x)
    } else if x >= 2.5 {
        // Γ(x) = Γ(x-k) · Π (x-i): every log added is positive.
        let mut y = x;
        let mut acc = 0.0;
        while y >= 2.5 {
            y -= 1.0;
            acc += y.ln();
        }
        log_gamma_near_two(y - 2.0) + acc
    } else if x >= 1.5 {
        log_gamma_near_two(x - 2.0)
    } else if x >= 0.5 {
        let z = x - 1.0;
        log_gamma_near_two(z) - z.ln_1p()
    } else {
        let z = x;
        log_gamma_near_two(z) - z.ln_1p() - x.ln()
    }
}

/// Polygamma function ψ_k(x) = d^{k+1}/dx^{k+1} ln Γ(x); `k = 0` is digamma.
pub fn polygamma(k: usize, x: f64) -> Result<f64> {
    if k > MAX_POLYGAMMA_ORDER {
        return Err(Error::UnsupportedOrder {
            order: k,
            max: MAX_POLYGAMMA_ORDER,
        });
    }
    check_positive(x, "polygamma")?;
    Ok(polygamma_unchecked(k, x))
}

pub(crate) fn polygamma_unchecked(k: usize, x: f64) -> f64 {
    let threshold = SHIFT_THRESHOLD + k as f64;
    let shift = if x < threshold {
        (threshold - x).ceil() as usize
    } else {
        0
    };
    let y = x + shift as f64;
    let asym = if k == 0 {
        digamma_asymptotic(y)
    } else {
        polygamma_asymptotic(k, y)
    };
    if shift == 0 {
        return asym;
    }
    // ψ_k(x) = ψ_k(x+N) − (−1)^k k! Σ_{i<N} (x+i)^{−(k+1)}, summed small-first.
    let mut corr = 0.0;
    for i in (0..shift).rev() {
        corr += (x + i as f64).powi(-(k as i32 + 1));
    }
    let kf = factorial(k);
    if k % 2 == 0 {
        asym - kf * corr
    } else {
        asym + kf * corr
    }
}

fn digamma_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut series = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * (j + 1);
        let term = b / n as f64 * pow;
        series += term;
        if term.abs() < 1e-18 * series.abs() {
            break;
        }
        pow *= inv2;
    }
    x.ln() - 0.5 / x - series
}

fn polygamma_asymptotic(k: usize, x: f64) -> f64 {
    // |ψ_k(x)| ~ (k-1)!/x^k + k!/(2 x^{k+1}) + Σ B_{2j} (2j+k-1)!/((2j)! x^{2j+k})
    let xk = x.powi(k as i32);
    let mut total = factorial(k - 1) / xk + factorial(k) / (2.0 * xk * x);
    // ratio (2j+k-1)!/(2j)! maintained incrementally
    let mut ratio = factorial(k); // j = 1: (k+1)!/2! computed below from k!
    ratio *= (k + 1) as f64 / 2.0;
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2 / xk;
    for (idx, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = idx + 1;
        if j > 1 {
            let n = 2 * j;
            // (n+k-1)!/n! = (n+k-3)!/(n-2)! · (n+k-2)(n+k-1)/((n-1) n)
            ratio *= ((n + k - 2) * (n + k - 1)) as f64 / ((n - 1) * n) as f64;
        }
        let term = b * ratio * pow;
        total += term;
        if term.abs() < 1e-18 * total.abs() {
            break;
        }
        pow *= inv2;
    }
    if k % 2 == 1 {
        total
    } else {
        -total
    }
}

pub fn digamma(x: f64) -> Result<f64> {
    polygamma(0, x)
}

pub fn trigamma(x: f64) -> Result<f64> {
    polygamma(1, x)
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b)`.
pub fn log_beta_fn(a: f64, b: f64) -> Result<f64> {
    check_positive(a, "log_beta_fn")?;
    check_positive(b, "log_beta_fn")?;
    Ok(log_beta_unchecked(a, b))
}

pub(crate) fn log_beta_unchecked(a: f64, b: f64) -> f64 {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// A single evaluated polygamma value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyEval {
    pub order: usize,
    pub argument: f64,
    pub value: f64,
}

impl PolyEval {
    pub fn new(order: usize, argument: f64) -> Result<Self> {
        Ok(Self {
            order,
            argument,
            value: polygamma(order, argument)?,
        })
    }

    /// Expected sign `(-1)^{k+1}` for `k >= 1`; digamma has no fixed sign.
    pub fn expected_sign(&self) -> Option<f64> {
        match self.order {
            0 => None,
            k if k % 2 == 1 => Some(1.0),
            _ => Some(-1.0),
        }
    }
}

/// Outcome of evaluating one side of an inequality `lower <= value <= upper`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        lower: Option<f64>,
        upper: Option<f64>,
        slack: f64,
    ) -> Self {
        let lo_ok = lower.is_none_or(|l| value >= l - slack);
        let hi_ok = upper.is_none_or(|u| value <= u + slack);
        Self {
            name: name.into(),
            value,
            lower,
            upper,
            holds: lo_ok && hi_ok && value.is_finite(),
        }
    }
}

/// Classical polygamma inequalities as runtime predicates. Each check takes an
/// absolute `slack` (use [`DEFAULT_SLACK`](inequalities::DEFAULT_SLACK)) to
/// absorb floating-point rounding.
pub mod inequalities {
    use super::{factorial, polygamma, BoundCheck};
    use crate::error::Result;

    pub const DEFAULT_SLACK: f64 = 1e-9;

    /// `(n-1)! z^{-n} <= |ψ_n(z)| <= n! z^{-n} (1 + 1/z)`, `n >= 1`.
    pub fn sandwich(n: usize, z: f64, slack: f64) -> Result<BoundCheck> {
        let v = polygamma(n, z)?.abs();
        let zn = z.powi(-(n as i32));
        Ok(BoundCheck::new(
            format!("sandwich(n={n}, z={z})"),
            v,
            Some(factorial(n - 1) * zn),
            Some(factorial(n) * zn * (1.0 + 1.0 / z)),
            slack,
        ))
    }

    /// `b/(a(a+b)) <= ψ_1(a) − ψ_1(a+b) <= (1 + 2/a) b/(a(a+b))`.
    pub fn trigamma_difference(a: f64, b: f64, slack: f64) -> Result<BoundCheck> {
        let v = polygamma(1, a)? - polygamma(1, a + b)?;
        let base = b / (a * (a + b));
        Ok(BoundCheck::new(
            format!("trigamma_difference(a={a}, b={b})"),
            v,
            Some(base),
            Some((1.0 + 2.0 / a) * base),
            slack,
        ))
    }

    /// `|ψ_k(a) − ψ_k(a+b)| <= (k+1)! min(a,b) a^{-(k+1)} (1 + 1/a)`.
    pub fn higher_difference(k: usize, a: f64, b: f64, slack: f64) -> Result<BoundCheck> {
        let v = (polygamma(k, a)? - polygamma(k, a + b)?).abs();
        let bound = factorial(k + 1) * a.min(b) * a.powi(-(k as i32 + 1)) * (1.0 + 1.0 / a);
        Ok(BoundCheck::new(
            format!("higher_difference(k={k}, a={a}, b={b})"),
            v,
            None,
            Some(bound),
            slack,
        ))
    }

    /// `|ψ_1(a) − ψ_1(a+b) − b/(a(a+b))| <= 4/a²`.
    pub fn first_order_error(a: f64, b: f64, slack: f64) -> Result<BoundCheck> {
        let v = (polygamma(1, a)? - polygamma(1, a + b)? - b / (a * (a + b))).abs();
        Ok(BoundCheck::new(
            format!("first_order_error(a={a}, b={b})"),
            v,
            None,
            Some(4.0 / (a * a)),
            slack,
        ))
    }

    /// `|ψ_1(a) + ψ_1(b) − 4ψ_1(a+b)| <= (6 + (a−b)²/(a∧b)) (a∧b)^{-2}`.
    pub fn variance_bound(a: f64, b: f64, slack: f64) -> Result<BoundCheck> {
        let v = (polygamma(1, a)? + polygamma(1, b)? - 4.0 * polygamma(1, a + b)?).abs();
        let m = a.min(b);
        Ok(BoundCheck::new(
            format!("variance_bound(a={a}, b={b})"),
            v,
            None,
            Some((6.0 + (a - b).powi(2) / m) / (m * m)),
            slack,
        ))
    }

    /// `|ψ_n((a+b)/2)| <= sqrt(|ψ_n(a) ψ_n(b)|)`.
    pub fn log_convexity(n: usize, a: f64, b: f64, slack: f64) -> Result<BoundCheck> {
        let mid = polygamma(n, 0.5 * (a + b))?.abs();
        let geo = (polygamma(n, a)? * polygamma(n, b)?).abs().sqrt();
        Ok(BoundCheck::new(
            format!("log_convexity(n={n}, a={a}, b={b})"),
            mid,
            None,
            Some(geo),
            slack,
        ))
    }

    pub const SANDWICH_ORDERS: [usize; 6] = [1, 2, 3, 4, 5, 6];
    pub const SANDWICH_ARGS: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    pub const PAIR_GRID: [f64; 7] = [0.5, 1.0, 2.0, 3.5, 10.0, 50.0, 200.0];

    /// Runs every inequality family over its documented grid.
    pub fn full_suite(slack: f64) -> Result<Vec<BoundCheck>> {
        let mut out = Vec::new();
        for &n in &SANDWICH_ORDERS {
            for &z in &SANDWICH_ARGS {
                out.push(sandwich(n, z, slack)?);
            }
        }
        for &a in &PAIR_GRID {
            for &b in &PAIR_GRID {
                out.push(trigamma_difference(a, b, slack)?);
                out.push(first_order_error(a, b, slack)?);
                out.push(variance_bound(a, b, slack)?);
                for k in 1..=6 {
                    out.push(higher_difference(k, a, b, slack)?);
                }
                for &n in &SANDWICH_ORDERS {
                    out.push(log_convexity(n, a, b, slack)?);
                }
            }
        }
        Ok(out)
    }
}
