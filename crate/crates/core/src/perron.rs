//! Perron-Frobenius quantities of strictly positive square matrices.
//!
//! The spectral radius is found by power iteration from the all-ones vector
//! with infinity-norm normalization. Convergence is tracked through the
//! Collatz-Wielandt bracket `min_i (Av)_i / v_i <= rho(A) <= max_i (Av)_i / v_i`,
//! which is valid at every step for positive `A` and positive `v`, so the
//! stopping rule is a certified relative error bound rather than a heuristic
//! on successive iterates.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Off-diagonal sign tolerance for [`is_inverse_z`].
pub const INVERSE_Z_TOL: f64 = 1e-12;

/// A square matrix with every entry finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMatrix(Matrix);

impl PositiveMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(Error::InvalidParams("matrix must be non-empty".into()));
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::NotPositive {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    /// `diag(d) * self`; `d` must be strictly positive for the result to stay positive.
    pub fn scale_rows(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: d.len(),
            });
        }
        Self::new(self.0.scale_rows(d))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

/// Spectral radius with positive right and left eigenvectors.
///
/// Normalized so that `max(right) == 1` and `left . right == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub radius: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

/// Power iteration returning `(radius, v)` with `||v||_inf = 1`, `v > 0` and
/// `||Av - radius v||_inf <= tol * radius`.
fn dominant(a: &Matrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    let n = a.rows();
    let mut v = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        let (mut lo, mut hi, mut norm) = (f64::INFINITY, 0.0_f64, 0.0_f64);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(a.row(i), &v);
            let ratio = *yi / v[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            norm = norm.max(*yi);
        }
        if !(hi.is_finite() && lo > 0.0) {
            return Err(Error::NonConvergence {
                what: "power iteration",
                iterations: 0,
                residual: f64::NAN,
            });
        }
        gap = (hi - lo) / hi;
        if gap <= tol {
            return Ok((0.5 * (lo + hi), v));
        }
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = yi / norm;
        }
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: max_iter,
        residual: gap,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")))
    }
}

/// Largest eigenvalue of a positive matrix; relative accuracy `tol`.
pub fn spectral_radius(a: &PositiveMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    check_tol(tol)?;
    dominant(a.matrix(), tol, max_iter).map(|(r, _)| r)
}

/// [`spectral_radius`] for a matrix the caller already knows is positive.
pub(crate) fn radius_of_positive(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    debug_assert!(a.as_slice().iter().all(|v| *v > 0.0));
    dominant(a, tol, max_iter).map(|(r, _)| r)
}

pub fn perron_pair(a: &PositiveMatrix, tol: f64, max_iter: usize) -> Result<PerronPair> {
    check_tol(tol)?;
    let (radius, right) = dominant(a.matrix(), tol, max_iter)?;
    let (_, left) = dominant(&a.matrix().transpose(), tol, max_iter)?;
    let scale = dot(&left, &right);
    let left = left.into_iter().map(|x| x / scale).collect();
    Ok(PerronPair {
        radius,
        right,
        left,
    })
}

/// True when every off-diagonal entry of `M^{-1}` is `<= tol`.
pub fn is_inverse_z(m: &PositiveMatrix, tol: f64) -> Result<bool> {
    let inv = m.matrix().inverse()?;
    let n = m.n();
    Ok((0..n).all(|i| (0..n).all(|j| i == j || inv[(i, j)] <= tol)))
}
