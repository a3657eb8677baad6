//! Dense complex matrix helpers shared by the algebra and module layers.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{GFrameError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest absolute entry of a matrix; used for residuals.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value, counting only min(rows, cols) of them.
pub fn sigma_min(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenpairs of the Hermitian part of `m`, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector for value `k`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// PSD test for a square matrix: Hermitian within `tol * max(1, ‖m‖)` and
/// smallest eigenvalue at least `-tol * max(1, ‖m‖)`.
pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    let scale = spectral_norm(m).max(1.0);
    if hermitian_defect(m) > tol * scale {
        return false;
    }
    hermitian_eigenvalues(m)
        .first()
        .is_none_or(|&l| l >= -tol * scale)
}

/// Apply a real function to the spectrum of the Hermitian part of `m`.
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut d = CMatrix::zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = c(f(*v), 0.0);
    }
    &vecs * d * vecs.adjoint()
}

/// Apply a complex-valued function to the spectrum of the Hermitian part of `m`.
pub fn complex_spectral_map(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut d = CMatrix::zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = f(*v);
    }
    &vecs * d * vecs.adjoint()
}

/// Moore–Penrose inverse of a PSD matrix; eigenvalues at or below `cut` count as zero.
pub fn psd_pinv(m: &CMatrix, cut: f64) -> CMatrix {
    spectral_map(m, |v| if v > cut { 1.0 / v } else { 0.0 })
}

/// Square root of a PSD matrix with negative eigenvalues clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    spectral_map(m, |v| v.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &CMatrix) -> CMatrix {
    spectral_map(m, |v| 1.0 / v.sqrt())
}

/// Ratio σ_max / σ_min, infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Inverse of a square matrix, refusing anything worse conditioned than `cond_cap`.
pub fn inverse(m: &CMatrix, cond_cap: f64) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(GFrameError::Input(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let cond = condition_number(m);
    if !cond.is_finite() || cond > cond_cap {
        return Err(GFrameError::Domain(format!(
            "matrix is singular or ill-conditioned (condition estimate {cond:.3e}, cap {cond_cap:.1e})"
        )));
    }
    m.clone().try_inverse().ok_or_else(|| {
        GFrameError::Domain(format!(
            "LU factorisation failed (condition estimate {cond:.3e})"
        ))
    })
}

/// Minimum-norm least-squares solution of `a * x = b` via SVD.
pub fn least_squares(a: &CMatrix, b: &CMatrix, eps: f64) -> Result<CMatrix> {
    SVD::new(a.clone(), true, true)
        .solve(b, eps)
        .map_err(|e| GFrameError::Domain(format!("least squares failed: {e}")))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
