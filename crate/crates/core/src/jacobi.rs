//! Real Jacobi-beta ensemble: direct double-Wishart sampler, the subblock
//! determinant decomposition and the independent-beta fast path.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logbeta::{log_beta_cumulant, BetaParams};
use crate::momentspace::SymMatrix;

/// Eigenvalues of a direct sample must lie in `(EIG_MARGIN, 1 − EIG_MARGIN)`.
pub const EIG_MARGIN: f64 = 1e-14;

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JBEParams {
    pub p: usize,
    pub gamma: f64,
    pub delta: f64,
}

impl JBEParams {
    pub fn new(p: usize, gamma: f64, delta: f64) -> Result<Self> {
        let floor = (p as f64 - 1.0) / 2.0;
        if p == 0 {
            return Err(Error::Parameter("matrix size must be at least 1".into()));
        }
        if !(gamma.is_finite() && delta.is_finite() && gamma > floor && delta > floor) {
            return Err(Error::Parameter(format!(
                "JβE_{p} needs γ, δ > {floor}, got γ = {gamma}, δ = {delta}"
            )));
        }
        Ok(Self { p, gamma, delta })
    }

    /// `e_1 = (p + 1)/2`.
    pub fn e1(&self) -> f64 {
        (self.p as f64 + 1.0) / 2.0
    }

    /// Law of `p_{i,1}`.
    pub fn first_factor(&self, i: usize) -> BetaParams {
        BetaParams {
            a: self.gamma - i as f64 / 2.0,
            b: self.delta,
        }
    }

    /// Law of `p_{i,2}`, `i >= 1`.
    pub fn second_factor(&self, i: usize) -> BetaParams {
        BetaParams {
            a: self.delta - i as f64 / 2.0,
            b: i as f64 / 2.0,
        }
    }

    /// `m`-th cumulant of `log det M^{[j]}` (or of `log det(I − M^{[j]})`
    /// when `complement`), summed over the independent factors.
    pub fn logdet_cumulant(&self, m: usize, j: usize, complement: bool) -> Result<f64> {
        if j == 0 || j > self.p {
            return Err(Error::Index(format!("subblock size {j} outside 1..={}", self.p)));
        }
        let mut total = 0.0;
        for i in 0..j {
            let f = self.first_factor(i);
            total += if complement {
                log_beta_cumulant(m, BetaParams { a: f.b, b: f.a })?
            } else {
                log_beta_cumulant(m, f)?
            };
            if complement && i >= 1 {
                total += log_beta_cumulant(m, self.second_factor(i))?;
            }
        }
        Ok(total)
    }
}

/// Subblock determinants of `U` and `I − U` and the beta factors they
/// factor into. Index `j − 1` of the log-det lists refers to `M^{[j]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubblockDets {
    pub logdet_u: Vec<f64>,
    pub logdet_iu: Vec<f64>,
    /// `p_{0,1}, …, p_{p−1,1}`.
    pub p1: Vec<f64>,
    /// `p_{1,2}, …, p_{p−1,2}`.
    pub p2: Vec<f64>,
}

impl SubblockDets {
    pub fn p(&self) -> usize {
        self.p1.len()
    }

    /// Largest deviation over `j` between
    /// `a·log det M^{[j]} + b·log det(I − M^{[j]})` and its beta-factor form.
    pub fn identity_residual(&self, a: f64, b: f64) -> f64 {
        let mut rhs = 0.0;
        let mut worst: f64 = 0.0;
        for j in 0..self.p() {
            let x = self.p1[j];
            rhs += a * x.ln() + b * (-x).ln_1p();
            if j >= 1 {
                rhs += b * self.p2[j - 1].ln();
            }
            let lhs = a * self.logdet_u[j] + b * self.logdet_iu[j];
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }
}

/// `(log X, log(1 − X))` for `X ~ β(a, b)` via two gamma draws. Draws that
/// round to 0 or 1 are redrawn and counted in `redraws`.
pub fn sample_beta_logs<R: Rng + ?Sized>(rng: &mut R, p: BetaParams, redraws: &mut u64) -> (f64, f64) {
    let ga = Gamma::new(p.a, 1.0).expect("validated shape");
    let gb = Gamma::new(p.b, 1.0).expect("validated shape");
    loop {
        let x: f64 = ga.sample(rng);
        let y: f64 = gb.sample(rng);
        let s = x + y;
        let v = x / s;
        if x > 0.0 && y > 0.0 && v > 0.0 && v < 1.0 && s.is_finite() {
            let ls = s.ln();
            return (x.ln() - ls, y.ln() - ls);
        }
        *redraws += 1;
    }
}

/// One draw from `β(a, b)`.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, p: BetaParams) -> f64 {
    let mut redraws = 0;
    sample_beta_logs(rng, p, &mut redraws).0.exp()
}

/// Wishart `W_p(I, ν)` by Bartlett factorization, real `ν > p − 1`.
pub fn sample_wishart<R: Rng + ?Sized>(rng: &mut R, p: usize, nu: f64) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(p, p);
    for i in 0..p {
        let chi2: f64 = 2.0 * Gamma::new((nu - i as f64) / 2.0, 1.0).expect("ν > p − 1").sample(rng);
        t[(i, i)] = chi2.sqrt();
        for j in 0..i {
            t[(i, j)] = rng.sample(StandardNormal);
        }
    }
    &t * t.transpose()
}

/// Direct JβE sample `(A + B)^{−1/2} A (A + B)^{−1/2}`; also returns the
/// number of rejected replications.
pub fn sample_jbe_counted<R: Rng + ?Sized>(rng: &mut R, params: JBEParams) -> Result<(SymMatrix, usize)> {
    for attempt in 0..MAX_ATTEMPTS {
        let a = sample_wishart(rng, params.p, 2.0 * params.gamma);
        let b = sample_wishart(rng, params.p, 2.0 * params.delta);
        let Ok(root) = SymMatrix::symmetrized(&a + &b).inv_sqrt() else {
            continue;
        };
        let u = root.congruence(&SymMatrix::symmetrized(a));
        if u.in_unit_cube(EIG_MARGIN) {
            return Ok((u, attempt));
        }
    }
    Err(Error::Degenerate(format!(
        "{MAX_ATTEMPTS} consecutive JβE draws left the open unit cube"
    )))
}

pub fn sample_jbe<R: Rng + ?Sized>(rng: &mut R, params: JBEParams) -> Result<SymMatrix> {
    sample_jbe_counted(rng, params).map(|(u, _)| u)
}

/// Cholesky diagonal of a positive definite matrix.
fn cholesky_diag(m: &SymMatrix, what: &str) -> Result<Vec<f64>> {
    let ch = m
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Boundary(format!("a leading subblock of {what} is not positive definite")))?;
    Ok(ch.l_dirty().diagonal().iter().copied().collect())
}

/// Squared Cholesky diagonal `t_ii²` of `U`.
pub fn cholesky_diag_squared(u: &SymMatrix) -> Result<Vec<f64>> {
    Ok(cholesky_diag(u, "U")?.iter().map(|d| d * d).collect())
}

/// Factors `p_{i,1}`, `p_{i,2}` of `U` from ratios of leading subblock
/// determinants of `U` and `I − U`.
pub fn decompose_subblock_dets(u: &SymMatrix) -> Result<SubblockDets> {
    let du = cholesky_diag(u, "U")?;
    let diu = cholesky_diag(&u.complement(), "I − U")?;
    let p = u.dim();
    let mut logdet_u = Vec::with_capacity(p);
    let mut logdet_iu = Vec::with_capacity(p);
    let (mut lu, mut liu) = (0.0, 0.0);
    for j in 0..p {
        lu += 2.0 * du[j].ln();
        liu += 2.0 * diu[j].ln();
        logdet_u.push(lu);
        logdet_iu.push(liu);
    }
    let p1: Vec<f64> = du.iter().map(|d| d * d).collect();
    let p2 = (1..p)
        .map(|i| (2.0 * diu[i].ln() - (-p1[i]).ln_1p()).exp())
        .collect();
    Ok(SubblockDets {
        logdet_u,
        logdet_iu,
        p1,
        p2,
    })
}

/// Subblock determinants from `2p − 1` independent beta draws.
pub fn sample_subblock_dets_fast<R: Rng + ?Sized>(rng: &mut R, params: JBEParams) -> SubblockDets {
    let mut redraws = 0;
    let p = params.p;
    let mut out = SubblockDets {
        logdet_u: Vec::with_capacity(p),
        logdet_iu: Vec::with_capacity(p),
        p1: Vec::with_capacity(p),
        p2: Vec::with_capacity(p.saturating_sub(1)),
    };
    let (mut lu, mut liu) = (0.0, 0.0);
    for i in 0..p {
        let (lx, l1x) = sample_beta_logs(rng, params.first_factor(i), &mut redraws);
        lu += lx;
        liu += l1x;
        out.p1.push(lx.exp());
        if i >= 1 {
            let (ly, _) = sample_beta_logs(rng, params.second_factor(i), &mut redraws);
            liu += ly;
            out.p2.push(ly.exp());
        }
        out.logdet_u.push(lu);
        out.logdet_iu.push(liu);
    }
    out
}
