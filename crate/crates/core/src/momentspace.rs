//! Matrix moment space on `[0, 1]`: block Hankel matrices, extremal moments
//! and the canonical-moment bijection onto the matrix cube `{0 < U < I}`.
//!
//! Moments are indexed from 1; `M_0 = I_p` is implicit everywhere.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues in `[-EIG_CLAMP, 0)` are treated as zero by the square roots.
pub const EIG_CLAMP: f64 = 1e-12;

/// Default interior margin for canonical moments.
pub const DEFAULT_MARGIN: f64 = 1e-10;

const SYM_TOL: f64 = 1e-12;

/// Dense symmetric `p × p` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m`, rejecting non-square or asymmetric input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Parameter(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYM_TOL * scale {
            return Err(Error::Parameter(format!("matrix not symmetric (|A−Aᵗ| = {asym:e})")));
        }
        Ok(Self::symmetrized(m))
    }

    /// Averages `m` with its transpose.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn from_row_slice(p: usize, data: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(p, p, data))
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn zeros(p: usize) -> Self {
        Self(DMatrix::zeros(p, p))
    }

    pub fn scaled_identity(p: usize, c: f64) -> Self {
        Self(DMatrix::identity(p, p) * c)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `I − self`.
    pub fn complement(&self) -> Self {
        Self(DMatrix::identity(self.dim(), self.dim()) - &self.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `self · x · self`, symmetrized.
    pub fn congruence(&self, x: &Self) -> Self {
        Self::symmetrized(&self.0 * &x.0 * &self.0)
    }

    /// Upper-left `k × k` subblock.
    pub fn leading(&self, k: usize) -> Self {
        Self(self.0.view((0, 0), (k, k)).into_owned())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    /// `log det` via Cholesky; failure of the factorization means the matrix
    /// is not positive definite.
    pub fn log_det(&self) -> Result<f64> {
        log_det_pd(&self.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some()
    }

    /// Symmetric square root; tiny negative eigenvalues are clamped to zero.
    pub fn sqrt(&self) -> Result<Self> {
        self.spectral_map(|l| l.sqrt(), false)
    }

    /// Symmetric inverse square root; requires strict positive definiteness.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.spectral_map(|l| 1.0 / l.sqrt(), true)
    }

    fn spectral_map(&self, f: impl Fn(f64) -> f64, strict: bool) -> Result<Self> {
        let eig = SymmetricEigen::new(self.0.clone());
        let mut vals = eig.eigenvalues.clone();
        for l in vals.iter_mut() {
            if *l < -EIG_CLAMP {
                return Err(Error::Boundary(format!("matrix is indefinite (eigenvalue {l:e})")));
            }
            if *l < 0.0 {
                *l = 0.0;
            }
            if strict && *l <= 0.0 {
                return Err(Error::Boundary("matrix is singular".into()));
            }
            *l = f(*l);
        }
        let v = &eig.eigenvectors;
        Ok(Self::symmetrized(v * DMatrix::from_diagonal(&vals) * v.transpose()))
    }

    /// True when `margin·I <= self <= (1−margin)·I`.
    pub fn in_unit_cube(&self, margin: f64) -> bool {
        let ev = self.eigenvalues();
        ev.first().is_some_and(|&l| l >= margin) && ev.last().is_some_and(|&l| l <= 1.0 - margin)
    }
}

pub(crate) fn log_det_pd(m: &DMatrix<f64>) -> Result<f64> {
    let ch = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Boundary("Cholesky factorization failed (not positive definite)".into()))?;
    Ok(2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Moments `M_1..M_n` of a `p × p` matrix measure on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    p: usize,
    moments: Vec<SymMatrix>,
}

impl MomentSequence {
    pub fn new(p: usize, moments: Vec<SymMatrix>) -> Result<Self> {
        if let Some(bad) = moments.iter().find(|m| m.dim() != p) {
            return Err(Error::Parameter(format!(
                "moment of size {} in a sequence of size {p}",
                bad.dim()
            )));
        }
        Ok(Self { p, moments })
    }

    /// Scalar (`p = 1`) convenience constructor.
    pub fn scalar(values: &[f64]) -> Self {
        Self {
            p: 1,
            moments: values.iter().map(|&v| SymMatrix::scaled_identity(1, v)).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn moments(&self) -> &[SymMatrix] {
        &self.moments
    }

    /// `M_k`, with `M_0 = I`.
    pub fn moment(&self, k: usize) -> Result<SymMatrix> {
        if k == 0 {
            return Ok(SymMatrix::identity(self.p));
        }
        self.moments
            .get(k - 1)
            .cloned()
            .ok_or_else(|| Error::Index(format!("moment M_{k} requested, only {} available", self.len())))
    }

    fn truncated(&self, n: usize) -> Self {
        Self {
            p: self.p,
            moments: self.moments[..n.min(self.len())].to_vec(),
        }
    }

    /// Strict positivity of every `H̲_k`, `H̄_k` for `k <= n`.
    pub fn is_interior(&self) -> bool {
        (1..=self.len()).all(|k| {
            build_lower_hankel(self, k).is_ok_and(|h| h.is_positive_definite())
                && build_upper_hankel(self, k).is_ok_and(|h| h.is_positive_definite())
        })
    }
}

/// Canonical moments `U_1..U_n`, each inside `{0 < U < I}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSequence {
    p: usize,
    canon: Vec<SymMatrix>,
}

impl CanonicalSequence {
    /// Validates that each `U_i` satisfies `margin·I <= U_i <= (1−margin)·I`.
    pub fn new(p: usize, canon: Vec<SymMatrix>, margin: f64) -> Result<Self> {
        for (i, u) in canon.iter().enumerate() {
            if u.dim() != p {
                return Err(Error::Parameter(format!("U_{} has size {}, expected {p}", i + 1, u.dim())));
            }
            if !u.in_unit_cube(margin) {
                return Err(Error::Boundary(format!(
                    "U_{} not strictly inside the unit cube (eigenvalues {:?})",
                    i + 1,
                    u.eigenvalues()
                )));
            }
        }
        Ok(Self { p, canon })
    }

    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(
            1,
            values.iter().map(|&v| SymMatrix::scaled_identity(1, v)).collect(),
            DEFAULT_MARGIN,
        )
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.canon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canon.is_empty()
    }

    pub fn canon(&self) -> &[SymMatrix] {
        &self.canon
    }
}

/// Number of blocks and starting moment index of `H̲_k`.
fn lower_shape(k: usize) -> (usize, usize) {
    (k / 2 + 1, k % 2)
}

/// `H̲_k`: block `(i, j)` is `M_{i+j}` for even `k`, `M_{i+j+1}` for odd `k`.
pub fn build_lower_hankel(seq: &MomentSequence, k: usize) -> Result<SymMatrix> {
    if k > seq.len() {
        return Err(Error::Index(format!("H̲_{k} needs {k} moments, have {}", seq.len())));
    }
    let (blocks, offset) = lower_shape(k);
    assemble(seq.p, blocks, |i, j| seq.moment(i + j + offset))
}

/// `H̄_k`: block `(i, j)` is `M_{i+j+1} − M_{i+j+2}` for even `k`,
/// `M_{i+j} − M_{i+j+1}` for odd `k`.
pub fn build_upper_hankel(seq: &MomentSequence, k: usize) -> Result<SymMatrix> {
    if k == 0 {
        return Err(Error::Index("H̄_0 is empty".into()));
    }
    if k > seq.len() {
        return Err(Error::Index(format!("H̄_{k} needs {k} moments, have {}", seq.len())));
    }
    let blocks = k.div_ceil(2);
    let offset = 1 - k % 2;
    assemble(seq.p, blocks, |i, j| {
        Ok(seq.moment(i + j + offset)?.sub(&seq.moment(i + j + offset + 1)?))
    })
}

fn assemble(p: usize, blocks: usize, block: impl Fn(usize, usize) -> Result<SymMatrix>) -> Result<SymMatrix> {
    let mut out = DMatrix::zeros(p * blocks, p * blocks);
    for i in 0..blocks {
        for j in 0..blocks {
            let b = block(i, j)?;
            out.view_mut((i * p, j * p), (p, p)).copy_from(b.as_matrix());
        }
    }
    Ok(SymMatrix::symmetrized(out))
}

/// `hᵗ H^{-1} h` with `h` stacked from `blocks` and `H` positive definite.
fn schur_term(h: &[SymMatrix], hankel: &SymMatrix, what: &str) -> Result<SymMatrix> {
    let p = h[0].dim();
    let mut stacked = DMatrix::zeros(p * h.len(), p);
    for (i, b) in h.iter().enumerate() {
        stacked.view_mut((i * p, 0), (p, p)).copy_from(b.as_matrix());
    }
    let ch = hankel
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularHankel(format!("{what} is not positive definite")))?;
    let solved = ch.solve(&stacked);
    Ok(SymMatrix::symmetrized(stacked.transpose() * solved))
}

/// Extremal moments `(M_n^−, M_n^+)` given `M_1..M_{n−1}`.
pub fn extremal_moments(seq: &MomentSequence, n: usize) -> Result<(SymMatrix, SymMatrix)> {
    let p = seq.p;
    if n == 0 {
        return Err(Error::Index("extremal moments are defined for n >= 1".into()));
    }
    if n == 1 {
        return Ok((SymMatrix::zeros(p), SymMatrix::identity(p)));
    }
    if n - 1 > seq.len() {
        return Err(Error::Index(format!(
            "extremal moments of order {n} need {} moments, have {}",
            n - 1,
            seq.len()
        )));
    }
    let r = n - 1;

    // M_n^- = h̲_rᵗ H̲_{r-1}^{-1} h̲_r, h̲_r = (M_start, ..., M_r)
    let count = r.div_ceil(2);
    let start = r + 1 - count;
    let h_low: Vec<SymMatrix> = (start..=r).map(|i| seq.moment(i)).collect::<Result<_>>()?;
    let lower = schur_term(&h_low, &build_lower_hankel(seq, r - 1)?, &format!("H̲_{}", r - 1))?;

    if n == 2 {
        return Ok((lower, seq.moment(1)?));
    }
    // M_n^+ = M_r − h̄_rᵗ H̄_{r-1}^{-1} h̄_r, h̄_r = (M_i − M_{i+1}) for i = k..r-1
    let k = r.div_ceil(2);
    let h_up: Vec<SymMatrix> = (k..r)
        .map(|i| Ok(seq.moment(i)?.sub(&seq.moment(i + 1)?)))
        .collect::<Result<_>>()?;
    let upper = seq
        .moment(r)?
        .sub(&schur_term(&h_up, &build_upper_hankel(seq, r - 1)?, &format!("H̄_{}", r - 1))?);
    Ok((lower, upper))
}

/// Canonical moments `U_i = D^{-1/2}(M_i − M_i^−)D^{-1/2}`, `D = M_i^+ − M_i^−`.
pub fn moments_to_canonical(seq: &MomentSequence) -> Result<CanonicalSequence> {
    moments_to_canonical_with_margin(seq, DEFAULT_MARGIN)
}

pub fn moments_to_canonical_with_margin(seq: &MomentSequence, margin: f64) -> Result<CanonicalSequence> {
    let mut canon = Vec::with_capacity(seq.len());
    for i in 1..=seq.len() {
        let (lo, hi) = extremal_moments(&seq.truncated(i - 1), i)?;
        let range = hi.sub(&lo);
        let inv = range
            .inv_sqrt()
            .map_err(|e| Error::Boundary(format!("M_{i}^+ − M_{i}^− not positive definite: {e}")))?;
        canon.push(inv.congruence(&seq.moment(i)?.sub(&lo)));
    }
    CanonicalSequence::new(seq.p, canon, margin)
}

/// Inverse map `M_i = M_i^− + D^{1/2} U_i D^{1/2}`.
pub fn canonical_to_moments(c: &CanonicalSequence) -> Result<MomentSequence> {
    let mut seq = MomentSequence {
        p: c.p,
        moments: Vec::with_capacity(c.len()),
    };
    for (idx, u) in c.canon.iter().enumerate() {
        let i = idx + 1;
        let (lo, hi) = extremal_moments(&seq, i)?;
        let root = hi.sub(&lo).sqrt()?;
        seq.moments.push(lo.add(&root.congruence(u)));
    }
    Ok(seq)
}

/// `log det H̲_{2n}` from canonical moments:
/// `Σ_i (n−i+1)[log|U_{2i−1}| + log|I−U_{2i−1}| + log|U_{2i}|] + (n−i) log|I−U_{2i}|`.
pub fn hankel_log_det_product(c: &CanonicalSequence, n: usize) -> Result<f64> {
    if 2 * n > c.len() {
        return Err(Error::Index(format!(
            "log det H̲_{} needs {} canonical moments, have {}",
            2 * n,
            2 * n,
            c.len()
        )));
    }
    let mut total = 0.0;
    for i in 1..=n {
        let odd = &c.canon[2 * i - 2];
        let even = &c.canon[2 * i - 1];
        let w = (n - i + 1) as f64;
        total += w * (odd.log_det()? + odd.complement().log_det()? + even.log_det()?);
        if n > i {
            total += (n - i) as f64 * even.complement().log_det()?;
        }
    }
    Ok(total)
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, with the sign convention fixed by `diag(R) > 0`.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, p: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random interior canonical sequence: `U_i = V diag(d) Vᵗ` with `d` uniform
/// in `[0.05, 0.95]` and `V` orthogonal.
pub fn random_interior_canonical<R: Rng + ?Sized>(rng: &mut R, p: usize, len: usize) -> CanonicalSequence {
    let canon = (0..len)
        .map(|_| {
            let v = random_orthogonal(rng, p);
            let d: Vec<f64> = (0..p).map(|_| rng.random_range(0.05..0.95)).collect();
            let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
            SymMatrix::symmetrized(&v * dm * v.transpose())
        })
        .collect();
    CanonicalSequence { p, canon }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &SymMatrix, b: &SymMatrix, tol: f64) -> bool {
        (a.as_matrix() - b.as_matrix()).amax() <= tol
    }

    fn scalar(m: &SymMatrix) -> f64 {
        assert_eq!(m.dim(), 1);
        m.get(0, 0)
    }

    #[test]
    fn lower_hankel_examples() {
        let seq = MomentSequence::scalar(&[0.5, 0.375]);
        let h = build_lower_hankel(&seq, 2).unwrap();
        assert_eq!(h, SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.5, 0.375]).unwrap());
        assert_eq!(scalar(&build_lower_hankel(&seq, 1).unwrap()), 0.5);

        let seq2 = MomentSequence::new(2, vec![SymMatrix::scaled_identity(2, 0.5)]).unwrap();
        assert_eq!(build_lower_hankel(&seq2, 1).unwrap(), SymMatrix::scaled_identity(2, 0.5));
        assert!(matches!(build_lower_hankel(&seq2, 2), Err(Error::Index(_))));
    }

    #[test]
    fn upper_hankel_examples() {
        let seq = MomentSequence::scalar(&[0.5, 0.375, 0.3125]);
        assert_eq!(scalar(&build_upper_hankel(&seq, 1).unwrap()), 0.5);
        assert_eq!(scalar(&build_upper_hankel(&seq, 2).unwrap()), 0.125);
        let h3 = build_upper_hankel(&seq, 3).unwrap();
        assert_eq!(h3, SymMatrix::from_row_slice(2, &[0.5, 0.125, 0.125, 0.0625]).unwrap());
        assert!(build_upper_hankel(&seq, 0).is_err());
        assert!(build_upper_hankel(&seq, 4).is_err());
    }

    #[test]
    fn extremal_examples() {
        for p in 1..=3 {
            let seq = MomentSequence::new(p, vec![]).unwrap();
            let (lo, hi) = extremal_moments(&seq, 1).unwrap();
            assert_eq!(lo, SymMatrix::zeros(p));
            assert_eq!(hi, SymMatrix::identity(p));
        }
        let seq = MomentSequence::scalar(&[0.5]);
        let (lo, hi) = extremal_moments(&seq, 2).unwrap();
        assert!((scalar(&lo) - 0.25).abs() < 1e-15);
        assert!((scalar(&hi) - 0.5).abs() < 1e-15);

        let seq = MomentSequence::scalar(&[0.5, 0.375]);
        let (lo, hi) = extremal_moments(&seq, 3).unwrap();
        assert!((scalar(&lo) - 9.0 / 32.0).abs() < 1e-15);
        assert!((scalar(&hi) - 11.0 / 32.0).abs() < 1e-15);
        assert!(matches!(extremal_moments(&seq, 4), Err(Error::Index(_))));
    }

    #[test]
    fn extremal_singular_hankel() {
        // m1 = 0 is the boundary: H̲_1 = (0) is singular
        let seq = MomentSequence::scalar(&[0.0, 0.0]);
        assert!(matches!(extremal_moments(&seq, 3), Err(Error::SingularHankel(_))));
    }

    #[test]
    fn canonical_examples() {
        let c = moments_to_canonical(&MomentSequence::scalar(&[0.5, 0.375])).unwrap();
        assert!((scalar(&c.canon()[0]) - 0.5).abs() < 1e-15);
        assert!((scalar(&c.canon()[1]) - 0.5).abs() < 1e-15);

        let seq2 = MomentSequence::new(2, vec![SymMatrix::scaled_identity(2, 0.5)]).unwrap();
        let c2 = moments_to_canonical(&seq2).unwrap();
        assert!(close(&c2.canon()[0], &SymMatrix::scaled_identity(2, 0.5), 1e-15));

        let m = canonical_to_moments(&CanonicalSequence::scalar(&[0.5, 0.5]).unwrap()).unwrap();
        assert!((scalar(&m.moments()[0]) - 0.5).abs() < 1e-15);
        assert!((scalar(&m.moments()[1]) - 0.375).abs() < 1e-15);

        let m = canonical_to_moments(&CanonicalSequence::scalar(&[0.5]).unwrap()).unwrap();
        assert_eq!(scalar(&m.moments()[0]), 0.5);
    }

    #[test]
    fn half_identity_roundtrip() {
        let half = vec![SymMatrix::scaled_identity(3, 0.5); 4];
        let c = CanonicalSequence::new(3, half.clone(), DEFAULT_MARGIN).unwrap();
        let back = moments_to_canonical(&canonical_to_moments(&c).unwrap()).unwrap();
        for (u, v) in back.canon().iter().zip(&half) {
            assert!(close(u, v, 1e-10));
        }
    }

    #[test]
    fn boundary_moments_rejected() {
        // m2 = m1² is the lower boundary: u2 = 0
        let seq = MomentSequence::scalar(&[0.5, 0.25]);
        assert!(matches!(moments_to_canonical(&seq), Err(Error::Boundary(_))));
        assert!(CanonicalSequence::scalar(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn product_formula_examples() {
        let c = CanonicalSequence::scalar(&[0.5, 0.5]).unwrap();
        let v = hankel_log_det_product(&c, 1).unwrap();
        assert!((v - (1.0f64 / 8.0).ln()).abs() < 1e-15);
        let dense = build_lower_hankel(&canonical_to_moments(&c).unwrap(), 2).unwrap().log_det().unwrap();
        assert!((v - dense).abs() < 1e-14);

        // n = 1: the exponent of (1 − u2) is zero, so u2 near 1 only enters as u2
        let c = CanonicalSequence::scalar(&[0.5, 0.999_999]).unwrap();
        let v = hankel_log_det_product(&c, 1).unwrap();
        assert!((v - (0.25 * 0.999_999f64).ln()).abs() < 1e-14);

        let c = CanonicalSequence::new(2, vec![SymMatrix::scaled_identity(2, 0.5); 4], DEFAULT_MARGIN).unwrap();
        let v = hankel_log_det_product(&c, 2).unwrap();
        let dense = build_lower_hankel(&canonical_to_moments(&c).unwrap(), 4).unwrap().log_det().unwrap();
        assert!((v - dense).abs() <= 1e-8 * dense.abs().max(1.0));
    }

    /// p = 1, n = 1, 2 by brute force: assemble the scalar Hankel matrix from
    /// canonical moments by hand and compare both groupings of the product.
    #[test]
    fn product_formula_grouping_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..0.95)).collect();
            let c = CanonicalSequence::scalar(&u).unwrap();
            let m = canonical_to_moments(&c).unwrap();
            for n in 1..=2 {
                let dense = build_lower_hankel(&m, 2 * n).unwrap().log_det().unwrap();
                // grouping with det(I − U_{2i−2}) inside the (n−i+1) power, U_0 = 0
                let mut g1 = 0.0;
                for i in 1..=n {
                    let prev = if i == 1 { 0.0 } else { u[2 * i - 3] };
                    let f = (1.0 - prev) * u[2 * i - 2] * (1.0 - u[2 * i - 2]) * u[2 * i - 1];
                    g1 += (n - i + 1) as f64 * f.ln();
                }
                let g2 = hankel_log_det_product(&c, n).unwrap();
                assert!((g1 - dense).abs() < 1e-12 * dense.abs().max(1.0));
                assert!((g2 - dense).abs() < 1e-12 * dense.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sqrt_clamps_tiny_negative_eigenvalues() {
        let m = SymMatrix::diagonal(&[1.0, -1e-13]);
        let r = m.sqrt().unwrap();
        assert_eq!(r.get(1, 1), 0.0);
        assert!(SymMatrix::diagonal(&[1.0, -1e-9]).sqrt().is_err());
        assert!(SymMatrix::diagonal(&[1.0, 0.0]).inv_sqrt().is_err());
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SymMatrix::from_row_slice(2, &[1.0, 0.1, 0.2, 1.0]).is_err());
    }

    fn random_case(rng: &mut ChaCha8Rng, trial: usize) -> (usize, usize, CanonicalSequence) {
        let p = 1 + trial % 3;
        let n = 1 + (trial / 3) % 5;
        (p, n, random_interior_canonical(rng, p, 2 * n))
    }

    #[test]
    fn random_sequences_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..200 {
            let (_, n, c) = random_case(&mut rng, trial);
            let m = canonical_to_moments(&c).unwrap();
            assert!(m.is_interior(), "trial {trial}");
            for mk in m.moments() {
                assert!(mk.max_asymmetry() <= 1e-12);
            }
            let back = canonical_to_moments(&moments_to_canonical(&m).unwrap()).unwrap();
            for (a, b) in back.moments().iter().zip(m.moments()) {
                assert!(close(a, b, 1e-9), "trial {trial}");
            }
            let product = hankel_log_det_product(&c, n).unwrap();
            let dense = build_lower_hankel(&m, 2 * n).unwrap().log_det().unwrap();
            assert!((product - dense).abs() <= 1e-8 * dense.abs().max(1.0), "trial {trial}");
        }
    }
}
