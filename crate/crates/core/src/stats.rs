//! Summary statistics and Kolmogorov–Smirnov tests with asymptotic p-values.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest sample accepted by the KS tests.
pub const KS_MIN_SAMPLE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub pvalue: f64,
}

impl KsResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.pvalue < alpha
    }
}

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub se: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        var,
        se: (var / n as f64).sqrt(),
    }
}

/// Sample covariance of paired observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1) as f64
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (covariance(xs, xs) * covariance(ys, ys)).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi theta form, fast for small x
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * c).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in KS sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// One-sample KS test of `sample` against a continuous `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let n = sample.len();
    if n < KS_MIN_SAMPLE {
        return Err(Error::SampleSize { min: KS_MIN_SAMPLE, got: n });
    }
    let xs = sorted(sample)?;
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult {
        statistic: d,
        pvalue: kolmogorov_sf(nf.sqrt() * d),
    })
}

/// Two-sample KS test with effective size `n1·n2/(n1+n2)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let min = a.len().min(b.len());
    if min < KS_MIN_SAMPLE {
        return Err(Error::SampleSize { min: KS_MIN_SAMPLE, got: min });
    }
    let (xa, xb) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        pvalue: kolmogorov_sf(ne.sqrt() * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn kolmogorov_reference_values() {
        // scipy.special.kolmogorov
        assert!((kolmogorov_sf(1.0) - 0.26999967167735456).abs() < 1e-12);
        assert!((kolmogorov_sf(0.5) - 0.9639452436648751).abs() < 1e-12);
        assert!((kolmogorov_sf(1.9494974) - 0.0009998222500030316).abs() < 1e-12);
        assert!((kolmogorov_sf(0.999_999_9) - kolmogorov_sf(1.000_000_1)).abs() < 1e-6);
    }

    #[test]
    fn uniform_null_not_rejected() {
        let mut rng = stream(1, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.pvalue > 0.001, "{r:?}");
    }

    #[test]
    fn identical_two_sample_is_zero() {
        let mut rng = stream(2, 0);
        let xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.pvalue, 1.0);
    }

    #[test]
    fn shifted_normal_rejected() {
        let mut rng = stream(3, 0);
        let xs: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal) + 1.0).collect();
        assert!(ks_test(&xs, normal_cdf).unwrap().rejects(0.001));
        let ys: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(ks_two_sample(&xs, &ys).unwrap().rejects(0.001));
    }

    #[test]
    fn small_sample_rejected() {
        assert!(matches!(ks_test(&[0.5; 10], |x| x), Err(Error::SampleSize { min: 50, got: 10 })));
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let v = normal_cdf(1.96);
        assert!((v - 0.9750021048517795).abs() < 1e-11, "{v:e}");
    }
}
