//! The log-determinant process `H_n(s, t)` of the random block Hankel matrix
//! `H̲_{2⌊nt⌋}` restricted to `⌊p s⌋ × ⌊p s⌋` subblocks: beta layout, path
//! sampling, exact cumulants and CGF, and the matrix-path oracle.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asympt::weighted_kernel_power;
use crate::error::{Error, Result};
use crate::jacobi::{sample_beta_logs, sample_jbe_counted, JBEParams};
use crate::logbeta::{weighted_cumulant_unchecked, BetaParams};
use crate::momentspace::{build_lower_hankel, canonical_to_moments, CanonicalSequence, SymMatrix};
use crate::quad::quad;
use crate::rng::stream;
use crate::specfun::{log_beta_unchecked, BoundCheck};
use crate::stats::{ks_two_sample, summarize, KsResult, Summary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessParams {
    pub n: usize,
    pub p: usize,
    pub grid: Vec<(f64, f64)>,
}

impl ProcessParams {
    pub fn new(n: usize, p: usize, grid: Vec<(f64, f64)>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Parameter(format!("need n, p >= 1, got n = {n}, p = {p}")));
        }
        for &(s, t) in &grid {
            check_point(s, t)?;
        }
        Ok(Self { n, p, grid })
    }

    /// `(n, p)` with the single grid point `(1, 1)`.
    pub fn unit(n: usize, p: usize) -> Result<Self> {
        Self::new(n, p, vec![(1.0, 1.0)])
    }

    /// `(p + 1)/2`.
    pub fn half(&self) -> f64 {
        (self.p as f64 + 1.0) / 2.0
    }

    /// `(⌊n t⌋, ⌊p s⌋)`.
    pub fn floors(&self, s: f64, t: f64) -> (usize, usize) {
        (
            ((self.n as f64 * t).floor() as usize).min(self.n),
            ((self.p as f64 * s).floor() as usize).min(self.p),
        )
    }

    /// Law of `p_{idx, j}`.
    pub fn p_shape(&self, idx: usize, j: usize) -> BetaParams {
        let c = self.half() * (2 * self.n + 2 - idx) as f64;
        BetaParams { a: c - j as f64 / 2.0, b: c }
    }

    /// Law of `r_{idx, j}`, `j >= 1`.
    pub fn r_shape(&self, idx: usize, j: usize) -> BetaParams {
        let c = self.half() * (2 * self.n + 2 - idx) as f64;
        BetaParams {
            a: c - j as f64 / 2.0,
            b: j as f64 / 2.0,
        }
    }
}

fn check_point(s: f64, t: f64) -> Result<()> {
    if !((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)) {
        return Err(Error::Parameter(format!("grid point ({s}, {t}) outside [0,1]²")));
    }
    Ok(())
}

/// Shape table for `i = 1..2n` (`p`-shapes for `j = 0..p−1`, `r`-shapes for
/// `j = 1..p−1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaLayout {
    pub n: usize,
    pub p: usize,
    /// `p_shapes[i − 1][j]`.
    pub p_shapes: Vec<Vec<BetaParams>>,
    /// `r_shapes[i − 1][j − 1]`.
    pub r_shapes: Vec<Vec<BetaParams>>,
}

impl BetaLayout {
    pub fn p_shape(&self, i: usize, j: usize) -> BetaParams {
        self.p_shapes[i - 1][j]
    }

    pub fn r_shape(&self, i: usize, j: usize) -> BetaParams {
        self.r_shapes[i - 1][j - 1]
    }
}

pub fn beta_layout(n: usize, p: usize) -> Result<BetaLayout> {
    let params = ProcessParams::new(n, p, vec![])?;
    Ok(BetaLayout {
        n,
        p,
        p_shapes: (1..=2 * n).map(|i| (0..p).map(|j| params.p_shape(i, j)).collect()).collect(),
        r_shapes: (1..=2 * n).map(|i| (1..p).map(|j| params.r_shape(i, j)).collect()).collect(),
    })
}

/// The four independent groups of terms in `H_n(s, t)`: `r`-terms at even
/// and odd `i` (`S`, `S′`) and `p`-terms at even and odd `i` (`T`, `T′`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    S,
    SPrime,
    T,
    TPrime,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::S, Group::SPrime, Group::T, Group::TPrime];

    pub fn label(self) -> &'static str {
        match self {
            Group::S => "S",
            Group::SPrime => "S'",
            Group::T => "T",
            Group::TPrime => "T'",
        }
    }
}

/// Per-group values; also used for per-group cumulants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GroupSums {
    pub s: f64,
    pub s_prime: f64,
    pub t: f64,
    pub t_prime: f64,
}

impl GroupSums {
    pub fn total(&self) -> f64 {
        self.s + self.s_prime + self.t + self.t_prime
    }

    pub fn get(&self, g: Group) -> f64 {
        match g {
            Group::S => self.s,
            Group::SPrime => self.s_prime,
            Group::T => self.t,
            Group::TPrime => self.t_prime,
        }
    }

    fn slot(&mut self, g: Group) -> &mut f64 {
        match g {
            Group::S => &mut self.s,
            Group::SPrime => &mut self.s_prime,
            Group::T => &mut self.t,
            Group::TPrime => &mut self.t_prime,
        }
    }
}

/// One term `wa·log X + wb·log(1 − X)`, `X ~ β(shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub group: Group,
    pub wa: f64,
    pub wb: f64,
    pub shape: BetaParams,
}

/// All nonzero-weight terms of `H_n(s, t)`.
pub fn process_terms(params: &ProcessParams, s: f64, t: f64) -> Result<Vec<Term>> {
    check_point(s, t)?;
    let (m, q) = params.floors(s, t);
    let mut out = Vec::with_capacity(4 * m * q);
    for i in 1..=m {
        let w = (m - i) as f64;
        for j in 1..q {
            if m > i {
                out.push(Term { group: Group::S, wa: w, wb: 0.0, shape: params.r_shape(2 * i, j) });
            }
            out.push(Term { group: Group::SPrime, wa: w + 1.0, wb: 0.0, shape: params.r_shape(2 * i - 1, j) });
        }
        for j in 0..q {
            out.push(Term { group: Group::T, wa: w + 1.0, wb: w, shape: params.p_shape(2 * i, j) });
            out.push(Term { group: Group::TPrime, wa: w + 1.0, wb: w + 1.0, shape: params.p_shape(2 * i - 1, j) });
        }
    }
    Ok(out)
}

/// Exact `κ_m` of each group of `H_n(s, t)`.
pub fn exact_group_cumulants(m: usize, params: &ProcessParams, s: f64, t: f64) -> Result<GroupSums> {
    if m == 0 {
        return Err(Error::Domain("cumulant order must be >= 1".into()));
    }
    if m - 1 > crate::specfun::MAX_POLYGAMMA_ORDER {
        return Err(Error::UnsupportedOrder { order: m - 1, max: crate::specfun::MAX_POLYGAMMA_ORDER });
    }
    let mut out = GroupSums::default();
    for term in process_terms(params, s, t)? {
        *out.slot(term.group) += weighted_cumulant_unchecked(m, term.wa, term.wb, term.shape.a, term.shape.b);
    }
    Ok(out)
}

pub fn exact_cumulant(m: usize, params: &ProcessParams, s: f64, t: f64) -> Result<f64> {
    exact_group_cumulants(m, params, s, t).map(|g| g.total())
}

pub fn exact_mean(params: &ProcessParams, s: f64, t: f64) -> Result<f64> {
    exact_cumulant(1, params, s, t)
}

/// Admissible `z`-range `(lower, ∞)` of the CGF and the term that binds it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CgfStrip {
    pub lower: f64,
    pub binding: String,
}

impl CgfStrip {
    pub fn contains(&self, z: f64) -> bool {
        z > self.lower
    }
}

pub fn cgf_strip(params: &ProcessParams, s: f64, t: f64) -> Result<CgfStrip> {
    let mut strip = CgfStrip { lower: f64::NEG_INFINITY, binding: "no terms".into() };
    for term in process_terms(params, s, t)? {
        for (w, shape, side) in [(term.wa, term.shape.a, "first"), (term.wb, term.shape.b, "second")] {
            if w > 0.0 && -shape / w > strip.lower {
                strip.lower = -shape / w;
                strip.binding = format!(
                    "{} term β({}, {}) with weights ({}, {}): {side} shape reaches 0",
                    term.group.label(),
                    term.shape.a,
                    term.shape.b,
                    term.wa,
                    term.wb
                );
            }
        }
    }
    Ok(strip)
}

/// `log E[exp(z H_n(s, t))]`.
pub fn exact_cgf(z: f64, params: &ProcessParams, s: f64, t: f64) -> Result<f64> {
    let strip = cgf_strip(params, s, t)?;
    if !strip.contains(z) {
        return Err(Error::OutOfStrip { z, binding: strip.binding });
    }
    Ok(process_terms(params, s, t)?
        .iter()
        .map(|term| {
            let (a, b) = (term.shape.a, term.shape.b);
            log_beta_unchecked(a + term.wa * z, b + term.wb * z) - log_beta_unchecked(a, b)
        })
        .sum())
}

/// Values of one replication on the grid, with the group decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessPath {
    pub seed: u64,
    pub replication: u64,
    pub values: Vec<f64>,
    pub groups: Vec<GroupSums>,
    pub redraws: u64,
}

/// Per-`i` prefix sums over `j` of the log beta draws.
struct Draws {
    /// `log r_{2i, j}` summed over `1 <= j < q`, indexed `[i − 1][q]`.
    r_even: Vec<Vec<f64>>,
    r_odd: Vec<Vec<f64>>,
    /// `log p_{2i, j}` and `log(1 − p_{2i, j})`, summed over `j < q`.
    p_even: Vec<Vec<f64>>,
    q_even: Vec<Vec<f64>>,
    /// `log p_{2i−1, j} + log(1 − p_{2i−1, j})`.
    pq_odd: Vec<Vec<f64>>,
}

fn draw_all<R: Rng + ?Sized>(rng: &mut R, params: &ProcessParams, redraws: &mut u64) -> Draws {
    let (n, p) = (params.n, params.p);
    let mut d = Draws {
        r_even: Vec::with_capacity(n),
        r_odd: Vec::with_capacity(n),
        p_even: Vec::with_capacity(n),
        q_even: Vec::with_capacity(n),
        pq_odd: Vec::with_capacity(n),
    };
    let prefix = |v: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len() + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for x in v {
            acc += x;
            out.push(acc);
        }
        out
    };
    for i in 1..=n {
        for idx in [2 * i - 1, 2 * i] {
            let mut lp = Vec::with_capacity(p);
            let mut lq = Vec::with_capacity(p);
            for j in 0..p {
                let (a, b) = sample_beta_logs(rng, params.p_shape(idx, j), redraws);
                lp.push(a);
                lq.push(b);
            }
            // r-terms start at j = 1, so slot 0 of the row is empty
            let mut lr = vec![0.0];
            for j in 1..p {
                lr.push(sample_beta_logs(rng, params.r_shape(idx, j), redraws).0);
            }
            if idx % 2 == 0 {
                d.r_even.push(prefix(&lr[..p]));
                d.p_even.push(prefix(&lp));
                d.q_even.push(prefix(&lq));
            } else {
                d.r_odd.push(prefix(&lr[..p]));
                let pq: Vec<f64> = lp.iter().zip(&lq).map(|(a, b)| a + b).collect();
                d.pq_odd.push(prefix(&pq));
            }
        }
    }
    d
}

fn evaluate(d: &Draws, params: &ProcessParams, s: f64, t: f64) -> GroupSums {
    let (m, q) = params.floors(s, t);
    let mut g = GroupSums::default();
    if q == 0 {
        return g;
    }
    for i in 1..=m {
        let w = (m - i) as f64;
        let k = i - 1;
        g.s += w * d.r_even[k][q];
        g.s_prime += (w + 1.0) * d.r_odd[k][q];
        g.t += (w + 1.0) * d.p_even[k][q] + w * d.q_even[k][q];
        g.t_prime += (w + 1.0) * d.pq_odd[k][q];
    }
    g
}

/// One replication of `H_n` on `params.grid` from stream `(seed, replication)`.
/// All grid points share one draw of the underlying beta variables.
pub fn sample_path(params: &ProcessParams, seed: u64, replication: u64) -> ProcessPath {
    let mut rng = stream(seed, replication);
    sample_path_with(&mut rng, params, seed, replication)
}

pub fn sample_path_with<R: Rng + ?Sized>(rng: &mut R, params: &ProcessParams, seed: u64, replication: u64) -> ProcessPath {
    let mut redraws = 0;
    let d = draw_all(rng, params, &mut redraws);
    let groups: Vec<GroupSums> = params.grid.iter().map(|&(s, t)| evaluate(&d, params, s, t)).collect();
    ProcessPath {
        seed,
        replication,
        values: groups.iter().map(GroupSums::total).collect(),
        groups,
        redraws,
    }
}

/// Replications `0..reps` in parallel, returned in replication order.
pub fn sample_paths(params: &ProcessParams, seed: u64, reps: usize) -> Vec<ProcessPath> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| sample_path(params, seed, r))
        .collect()
}

/// Exact `κ_m` of the groups against the sandwich and crude bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantBoundReport {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub s: f64,
    pub t: f64,
    pub kappa: GroupSums,
    pub checks: Vec<BoundCheck>,
    /// Intermediate bounds that are reported but do not enter `all_pass`.
    pub informational: Vec<BoundCheck>,
}

impl CumulantBoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `∫_0^c ((c + u − x)/(1 + v − x))^m dx`.
fn shifted_power_integral(m: usize, c: f64, u: f64, v: f64) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    quad(|x| ((c + u - x) / (1.0 + v - x)).powi(m as i32), 0.0, c)
}

pub fn cumulant_bound_check(m: usize, params: &ProcessParams, s: f64, t: f64, slack: f64) -> Result<CumulantBoundReport> {
    let kappa = exact_group_cumulants(m, params, s, t)?;
    let (n, p) = (params.n as f64, params.p as f64);
    let (_, q) = params.floors(s, t);
    let mut checks = Vec::new();
    let mut informational = Vec::new();

    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let norm = n * (q as f64 - 1.0) * q as f64 / (p + 1.0).powi(m as i32) * factorial(m - 1) / 4.0;
    if q >= 2 {
        let w = weighted_kernel_power(m, t)?;
        let c = t - 2.0 / n;
        let lo_s = shifted_power_integral(m, c, 0.0, 0.0)?;
        let lo_sp = shifted_power_integral(m, c, 1.0 / n, 1.0 / n)?;
        let up = (1.0 + m as f64 / p) * w;
        checks.push(BoundCheck::new("S sandwich", sign * kappa.s / norm, Some(lo_s), Some(up), slack));
        checks.push(BoundCheck::new(
            "S' sandwich",
            sign * kappa.s_prime / norm,
            Some(lo_sp),
            Some((1.0 + m as f64 / p) * (w + 1.0 / n)),
            slack,
        ));
    }
    let mf = m as i32;
    let s_bound = 2.0 * factorial(m + 1) * n * p.powi(2 - mf);
    checks.push(BoundCheck::new("|S| crude", kappa.s.abs(), None, Some(s_bound), slack));
    checks.push(BoundCheck::new("|S'| crude", kappa.s_prime.abs(), None, Some(s_bound), slack));
    let t_bound = 12.0 * 4f64.powi(mf) * factorial(m + 1) * n * p.powi(2 - mf);
    checks.push(BoundCheck::new("|T|", kappa.t.abs(), None, Some(t_bound), slack));
    checks.push(BoundCheck::new("|T'|", kappa.t_prime.abs(), None, Some(t_bound), slack));

    let t_mid = 6.0 * 4f64.powi(mf) * factorial(m + 1) * p.powi(-mf) * (n * p + (n.ln() + 1.0) * p * p);
    informational.push(BoundCheck::new("|T| intermediate", kappa.t.abs(), None, Some(t_mid), slack));
    informational.push(BoundCheck::new("|T'| intermediate", kappa.t_prime.abs(), None, Some(t_mid), slack));

    Ok(CumulantBoundReport { m, n: params.n, p: params.p, s, t, kappa, checks, informational })
}

/// Result of comparing the matrix path against the beta-product path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub p: usize,
    pub s: f64,
    pub t: f64,
    pub reps: usize,
    pub ks: KsResult,
    pub matrix: Summary,
    pub beta: Summary,
    pub exact_mean: f64,
    pub rejected: usize,
}

/// One draw of `log det H̲_{2⌊nt⌋}` through the matrix path: canonical
/// moments `U_i ~ JβE_p(e_1(2n − i + 2), same)`, their leading `⌊ps⌋`
/// subblocks, reconstructed moments and a dense log-determinant.
/// Returns the value and the number of rejected draws.
pub fn oracle_draw<R: Rng + ?Sized>(rng: &mut R, params: &ProcessParams, s: f64, t: f64) -> Result<(f64, usize)> {
    check_point(s, t)?;
    let (m, q) = params.floors(s, t);
    if m == 0 || q == 0 {
        return Ok((0.0, 0));
    }
    let e1 = params.half();
    let mut rejected = 0;
    for _ in 0..1000 {
        let mut canon = Vec::with_capacity(2 * m);
        for i in 1..=2 * m {
            let g = e1 * (2 * params.n + 2 - i) as f64;
            let (u, r) = sample_jbe_counted(rng, JBEParams::new(params.p, g, g)?)?;
            rejected += r;
            canon.push(u.leading(q));
        }
        let value = CanonicalSequence::new(q, canon, crate::jacobi::EIG_MARGIN)
            .and_then(|c| canonical_to_moments(&c))
            .and_then(|mom| build_lower_hankel(&mom, 2 * m))
            .and_then(|h: SymMatrix| h.log_det());
        match value {
            Ok(v) => return Ok((v, rejected)),
            Err(_) => rejected += 1,
        }
    }
    Err(Error::Degenerate("matrix-path oracle rejected 1000 consecutive draws".into()))
}

/// Two-sample comparison of the matrix path and the beta-product path.
/// Matrix replication `r` uses stream `(seed, 2r)`, beta replication `r`
/// uses `(seed, 2r + 1)`.
pub fn small_instance_oracle(n: usize, p: usize, s: f64, t: f64, reps: usize, seed: u64) -> Result<OracleReport> {
    let params = ProcessParams::new(n, p, vec![(s, t)])?;
    let matrix: Vec<(f64, usize)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| oracle_draw(&mut stream(seed, 2 * r), &params, s, t))
        .collect::<Result<_>>()?;
    let beta: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| sample_path(&params, seed, 2 * r + 1).values[0])
        .collect();
    let mvals: Vec<f64> = matrix.iter().map(|x| x.0).collect();
    Ok(OracleReport {
        n,
        p,
        s,
        t,
        reps,
        ks: ks_two_sample(&mvals, &beta)?,
        matrix: summarize(&mvals),
        beta: summarize(&beta),
        exact_mean: exact_mean(&params, s, t)?,
        rejected: matrix.iter().map(|x| x.1).sum(),
    })
}
