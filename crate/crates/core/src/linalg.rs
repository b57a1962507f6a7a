//! Dense complex kernels: LU determinant and Hermitian eigenvalues.

use nalgebra::{DMatrix, SymmetricTridiagonal};
use num_complex::Complex64;

/// Determinant of the `n × n` row-major matrix in `a` by LU with partial
/// pivoting. `a` is overwritten with the factors.
pub fn lu_determinant(a: &mut [Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = a[row * n + col].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        let inv = pivot.inv();
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row * n);
            let src = &upper[col * n + col + 1..col * n + n];
            let dst = &mut lower[col + 1..n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= factor * s;
            }
        }
    }
    det
}

/// Eigenvalues of a Hermitian matrix (row-major), sorted non-decreasing.
///
/// Only the lower triangle is referenced by the solver. Returns `None` if
/// the iteration does not converge or produces non-finite values.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, a);
    let eig = m.try_symmetric_eigen(f64::EPSILON, 10_000)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    Some(vals)
}

/// Real symmetric tridiagonal matrix unitarily similar to a Hermitian one.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diagonal: Vec<f64>,
    /// Squared moduli of the off-diagonal entries.
    pub off_diagonal_sq: Vec<f64>,
}

impl Tridiagonal {
    /// Householder reduction of a Hermitian matrix (row-major, lower triangle read).
    pub fn from_hermitian(a: &[Complex64], n: usize) -> Self {
        // Row-major storage is the transpose, i.e. the conjugate of a Hermitian matrix;
        // conjugation leaves the real tridiagonal form unchanged.
        let m = DMatrix::from_column_slice(n, n, a);
        let (diag, off) = SymmetricTridiagonal::new(m).unpack_tridiagonal();
        Self {
            diagonal: diag.iter().copied().collect(),
            off_diagonal_sq: off.iter().map(|e| e * e).collect(),
        }
    }

    /// `det(T − λI)` by the three-term recurrence.
    pub fn char_poly_value(&self, lambda: Complex64) -> Complex64 {
        let mut prev = Complex64::new(1.0, 0.0);
        let mut cur = Complex64::new(self.diagonal[0], 0.0) - lambda;
        for (a, e2) in self.diagonal[1..].iter().zip(&self.off_diagonal_sq) {
            let next = (Complex64::new(*a, 0.0) - lambda) * cur - *e2 * prev;
            prev = cur;
            cur = next;
        }
        cur
    }
}
