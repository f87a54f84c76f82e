//! Dense matrix functions via symmetric eigendecomposition.
//!
//! All SPD computations in this crate reduce to spectral calculus of real
//! symmetric matrices: `f(A) = U f(D) U^T` with `A = U D U^T`. Eigenvalues
//! are clamped below at [`tol::EIG_LOG_FLOOR`] before logarithms so that a
//! barely-positive-definite input degrades gracefully instead of producing
//! `-inf`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tol;

/// Applies `f` to the spectrum of the symmetric matrix `a`.
pub fn sym_func(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Matrix logarithm of a symmetric positive definite matrix.
pub fn sym_log(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_func(a, |x| x.max(tol::EIG_LOG_FLOOR).ln())
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_func(a, f64::exp)
}

/// Square root of a symmetric positive semidefinite matrix.
pub fn sym_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_func(a, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn sym_inv_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_func(a, |x| 1.0 / x.max(tol::EIG_LOG_FLOOR).sqrt())
}

/// Real power `A^t` of a symmetric positive definite matrix.
pub fn sym_pow(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    sym_func(a, |x| x.max(tol::EIG_LOG_FLOOR).powf(t))
}

/// Eigenvalues of a symmetric matrix, unordered.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    a.clone().symmetric_eigen().eigenvalues
}

/// Frobenius (Hilbert-Schmidt) norm.
pub fn hs_norm(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

/// Operator (spectral) norm of a real matrix.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().singular_values()[0]
}

/// Operator norm of a complex matrix (largest singular value).
pub fn operator_norm_complex(a: &DMatrix<Complex64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().singular_values()[0]
}

/// Symmetrizes a matrix: `(A + A^T) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Checks that `a` is square, symmetric and positive definite up to the
/// crate tolerances, returning its eigenvalue range.
pub fn check_spd(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::domain("SPD point must be a square matrix"));
    }
    let asym = (a - a.transpose()).norm();
    if asym > 1e-9 * (1.0 + a.norm()) {
        return Err(Error::domain(format!(
            "SPD point must be symmetric (asymmetry {asym:.3e})"
        )));
    }
    let eig = sym_eigenvalues(a);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > tol::SPD_MIN_EIG_REL * max.abs()) {
        return Err(Error::domain(format!(
            "matrix is not positive definite (min eigenvalue {min:.3e}, max {max:.3e})"
        )));
    }
    Ok((min, max))
}

/// A random matrix with `|det| = 1`, drawn by normalizing a matrix with
/// uniform entries (redrawn while nearly singular).
pub fn random_unimodular(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let det = g.determinant().abs();
        if det > 0.05 {
            return g / det.powf(1.0 / n as f64);
        }
    }
}

/// A random orthogonal matrix via the QR factor of a random matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    g.qr().q()
}
