//! Dense complex linear-algebra primitives.
//!
//! Everything here is a pure function over `nalgebra` dense matrices with
//! `Complex64` entries. Tolerances are collected in [`tol`] so that every
//! solver built on top of these routines agrees on what "zero", "rank
//! deficient" and "Hermitian" mean.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Numerical thresholds shared across the crate.
pub mod tol {
    /// Relative max-abs asymmetry accepted for a Hermitian input.
    pub const HERMITIAN: f64 = 1e-10;
    /// Eigenvalues below `PSD * spectral_norm` are treated as zero.
    pub const PSD: f64 = 1e-10;
    /// Singular values below `RANK * sigma_max` are treated as zero.
    pub const RANK: f64 = 1e-12;
    /// Absolute norm below which a vector is considered zero.
    pub const ZERO: f64 = 1e-14;
    /// Moore-Penrose residual tolerance.
    pub const MOORE_PENROSE: f64 = 1e-9;
    /// Maximum number of bracket doublings in [`super::bisect_root`].
    pub const MAX_DOUBLINGS: usize = 60;
}

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Max-abs of `m - m^H`, relative to the max-abs of `m`.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(m - m.adjoint())) / scale
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Real part of `x^H m x`.
pub fn quad_form(m: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(m * x)).re
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized before decomposition; callers that need to reject
/// non-Hermitian input should check [`hermitian_asymmetry`] first.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Hermitian square root `S` with `S^H S = f`.
///
/// Computed through the eigendecomposition so that singular (rank-deficient)
/// PSD inputs are handled without special cases. Eigenvalues below
/// `−tol::PSD * ‖f‖₂` are rejected; the remaining negative rounding is
/// clamped to zero and small positive eigenvalues are kept.
pub fn hermitian_sqrt(f: &CMatrix) -> Result<CMatrix> {
    if !f.is_square() {
        return Err(Error::Dimension(format!(
            "square root of a {}x{} matrix",
            f.nrows(),
            f.ncols()
        )));
    }
    let asymmetry = hermitian_asymmetry(f);
    if asymmetry > tol::HERMITIAN {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (values, vectors) = hermitian_eigen(f);
    let norm = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = tol::PSD * norm;
    if let Some(&min) = values.iter().next() {
        if min < -floor {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let roots = values.map(|v| c(v.max(0.0).sqrt()));
    let scaled = CMatrix::from_fn(f.nrows(), f.ncols(), |i, j| vectors[(i, j)] * roots[j]);
    Ok(&scaled * vectors.adjoint())
}

/// Thin singular value decomposition `a = U diag(σ) Vᴴ`, `σ` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: DVector<f64>,
    pub v: CMatrix,
}

/// Thin SVD. Computed with `faer`: nalgebra's complex SVD loses accuracy on
/// rank-deficient square inputs, which are routine here (`F0` has rank ≤ Q).
pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        let k = m.min(n);
        return Ok(Svd {
            u: CMatrix::zeros(m, k),
            singular_values: DVector::zeros(k),
            v: CMatrix::zeros(n, k),
        });
    }
    let fa = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD did not converge: {e:?}")))?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = m.min(n);
    Ok(Svd {
        u: CMatrix::from_fn(m, k, |i, j| fu[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| fs[i].re),
        v: CMatrix::from_fn(n, k, |i, j| fv[(i, j)]),
    })
}

/// Moore-Penrose pseudoinverse; singular values below `tol::RANK * σ_max`
/// are treated as zero.
pub fn pseudo_inverse(m: &CMatrix) -> Result<CMatrix> {
    let d = svd(m)?;
    let top = d.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let mut pinv = CMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in d.singular_values.iter().enumerate() {
        if s > tol::RANK * top {
            pinv.gerc(c(1.0 / s), &d.v.column(i), &d.u.column(i), c(1.0));
        }
    }
    Ok(pinv)
}

/// Rank-one orthogonal projector `y yᴴ / ‖y‖²`.
pub fn vector_projector(y: &CVector) -> Result<CMatrix> {
    let norm2 = y.norm_squared();
    if norm2.sqrt() <= tol::ZERO {
        return Err(Error::ZeroVector);
    }
    Ok((y * y.adjoint()).unscale(norm2))
}

/// Projector onto the orthogonal complement of `y`.
pub fn complement_projector(y: &CVector) -> Result<CMatrix> {
    let p = vector_projector(y)?;
    Ok(CMatrix::identity(y.len(), y.len()) - p)
}

/// Orthonormal basis (as columns) of the orthogonal complement of `y`.
pub fn complement_basis(y: &CVector) -> Result<CMatrix> {
    let perp = complement_projector(y)?;
    let (values, vectors) = hermitian_eigen(&perp);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.5).collect();
    let mut basis = CMatrix::zeros(y.len(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &vectors.column(src));
    }
    Ok(basis)
}

/// Bisection for a monotone scalar function.
///
/// If `f(lo)` and `f(hi)` share a sign, `hi` is pushed away from `lo` by
/// doubling the bracket width up to [`tol::MAX_DOUBLINGS`] times. Bisection
/// stops once `|f(x)| <= tol`, the bracket is narrower than `tol`, or the
/// midpoint no longer moves in floating point; `tol = 0` therefore means
/// "to machine precision".
pub fn bisect_root<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let eval = |f: &mut F, x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NumericalFailure(format!("f({x}) = {v}")))
        }
    };

    let mut f_lo = eval(&mut f, lo)?;
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    let mut f_hi = eval(&mut f, hi)?;
    let mut doublings = 0;
    while f_hi.abs() > tol && f_lo.signum() == f_hi.signum() {
        if doublings == tol::MAX_DOUBLINGS {
            return Err(Error::NoSignChange { lo, hi });
        }
        hi = lo + 2.0 * (hi - lo);
        f_hi = eval(&mut f, hi)?;
        doublings += 1;
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }

    // 1100 halvings exhaust the full double range.
    for _ in 0..1100 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = eval(&mut f, mid)?;
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}
