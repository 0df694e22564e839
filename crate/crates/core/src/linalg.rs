//! Dense complex linear algebra used throughout the solver.
//!
//! Everything here operates on small Hermitian systems (sizes up to a few
//! dozen), so plain `nalgebra` dense factorizations are used. Hermitian
//! positive-definite solves go through Cholesky; a factorization failure
//! retries with a small diagonal jitter and logs the event.

use log::warn;
use nalgebra::{Cholesky, DMatrix, Dyn, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type CVec3 = Vector3<C64>;

/// Relative diagonal jitter applied when a Cholesky factorization fails.
pub const CHOLESKY_JITTER: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

pub fn trace_re(a: &CMat) -> f64 {
    a.trace().re
}

/// `Re Tr(A Bᴴ)` without forming the product.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// `Tr(A Aᴴ)`, the squared Frobenius norm.
pub fn energy(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Maximum entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// nalgebra's complex Cholesky takes complex square roots of the pivots and
/// so never reports failure; reject factors whose pivots are not real and
/// positive.
fn factor(a: CMat) -> Option<Cholesky<C64, Dyn>> {
    let ch = a.cholesky()?;
    let l = ch.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(ch)
}

/// Cholesky factorization of the Hermitian part of `a`, retrying with a
/// growing relative diagonal jitter when the plain factorization fails.
pub fn cholesky(a: &CMat, what: &'static str) -> Result<Cholesky<C64, Dyn>> {
    let sym = hermitian_part(a);
    if let Some(ch) = factor(sym.clone()) {
        return Ok(ch);
    }
    let n = sym.nrows();
    let scale = (0..n)
        .map(|i| sym[(i, i)].re.abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut jitter = CHOLESKY_JITTER * scale;
    for _ in 0..4 {
        let shifted = &sym + CMat::identity(n, n) * c(jitter, 0.0);
        if let Some(ch) = factor(shifted) {
            warn!("cholesky of {what} needed diagonal jitter {jitter:e}");
            return Ok(ch);
        }
        jitter *= 1e3;
    }
    Err(Error::NotPositiveDefinite(what))
}

/// `ln det A` for Hermitian positive-definite `A`.
pub fn logdet_hpd(a: &CMat, what: &'static str) -> Result<f64> {
    let ch = cholesky(a, what)?;
    let l = ch.l_dirty();
    Ok((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn solve_hpd(a: &CMat, b: &CMat, what: &'static str) -> Result<CMat> {
    Ok(cholesky(a, what)?.solve(b))
}

pub fn inverse_hpd(a: &CMat, what: &'static str) -> Result<CMat> {
    let inv = cholesky(a, what)?.inverse();
    Ok(hermitian_part(&inv))
}

/// `ln det(I + L⁻¹ S L⁻ᴴ)` where `Σ = L Lᴴ`; equal to `ln det(I + S Σ⁻¹)`
/// but evaluated on a Hermitian matrix.
pub fn logdet_whitened(signal: &CMat, sigma: &CMat) -> Result<f64> {
    let ch = cholesky(sigma, "interference-plus-noise covariance")?;
    let l = ch.l();
    let left = l
        .solve_lower_triangular(signal)
        .ok_or(Error::NotPositiveDefinite("interference-plus-noise covariance"))?;
    let whitened = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or(Error::NotPositiveDefinite("interference-plus-noise covariance"))?
        .adjoint();
    let n = signal.nrows();
    logdet_hpd(&(identity(n) + whitened), "whitened signal covariance")
}

/// Eigen-decomposition of the Hermitian part of `a`; eigenvalues ascending
/// is not guaranteed.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigen(a).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix; eigenvalues below
/// `rel_cutoff * λ_max` are treated as zero.
pub fn pinv_hermitian(a: &CMat, rel_cutoff: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let lmax = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let n = a.nrows();
    let mut out = CMat::zeros(n, n);
    if lmax == 0.0 {
        return out;
    }
    for (i, &lam) in vals.iter().enumerate() {
        if lam.abs() > rel_cutoff * lmax {
            let v = vecs.column(i);
            out += (v * v.adjoint()) * c(1.0 / lam, 0.0);
        }
    }
    out
}

/// Top-`k` eigenvectors (by eigenvalue) of a Hermitian matrix, as columns.
pub fn dominant_eigenvectors(a: &CMat, k: usize) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut out = CMat::zeros(a.nrows(), k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        out.set_column(col, &vecs.column(idx));
    }
    out
}

pub fn to_complex3(v: &Vec3) -> CVec3 {
    CVec3::new(c(v.x, 0.0), c(v.y, 0.0), c(v.z, 0.0))
}
