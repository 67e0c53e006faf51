//! Dense complex linear algebra kernel.
//!
//! Everything the Krylov solvers and the reference oracle need: vectors and
//! column-major matrices over `Complex64`, products, modified Gram-Schmidt
//! with selective reorthogonalization, Householder QR, triangular solves,
//! full-pivot rank determination and a shifted-QR eigensolver for upper
//! Hessenberg matrices. Real inputs are promoted to complex on ingestion.
//!
//! All functions are pure; nothing here holds shared mutable state.

mod eig;
mod matrix;
mod mgs;
mod qr;
mod rank;
mod vector;

use thiserror::Error;

pub use eig::{hessenberg_eig, EigOptions, EigenPair};
pub use matrix::DenseMatrix;
pub use mgs::{mgs_orthogonalize, Orthogonalized, DEFAULT_BREAKDOWN_TOL};
pub use qr::{least_squares, qr_factor, solve_upper_triangular, LeastSquares, DEFAULT_SINGULAR_TOL};
pub use rank::rank_of;
pub use vector::DenseVector;

/// Complex scalar used throughout.
pub type Scalar = num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("empty vector or matrix")]
    Empty,
    #[error("non-finite entry")]
    NonFinite,
    #[error("triangular factor is rank deficient at diagonal index {index} (|r_ii| = {magnitude:e})")]
    RankDeficient { index: usize, magnitude: f64 },
    #[error("matrix is not upper Hessenberg (entry ({row},{col}) is nonzero)")]
    NotHessenberg { row: usize, col: usize },
    #[error("eigensolver limited to dimension {max}, got {dim}")]
    TooLarge { dim: usize, max: usize },
    #[error("QR iteration did not converge after {sweeps} sweeps ({} eigenvalues found)", partial.len())]
    EigenNoConvergence { sweeps: usize, partial: Vec<Scalar> },
    #[error("inverse iteration for eigenvalue {value} left residual {residual:e}")]
    EigenvectorInaccurate { value: Scalar, residual: f64 },
}

/// `A x` in complex arithmetic.
pub fn matvec(a: &DenseMatrix, x: &DenseVector) -> Result<DenseVector, LinalgError> {
    if a.cols() != x.len() {
        return Err(LinalgError::DimensionMismatch {
            context: "matvec",
            expected: a.cols(),
            found: x.len(),
        });
    }
    let mut out = DenseVector::zeros(a.rows());
    for j in 0..a.cols() {
        let xj = x[j];
        if xj == Scalar::new(0.0, 0.0) {
            continue;
        }
        for (o, aij) in out.as_mut_slice().iter_mut().zip(a.column(j)) {
            *o += aij * xj;
        }
    }
    Ok(out)
}

/// `A^p x` by `p` successive products; `A^p` is never formed.
pub fn power_apply(a: &DenseMatrix, p: usize, x: &DenseVector) -> Result<DenseVector, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut y = x.clone();
    for _ in 0..p {
        y = matvec(a, &y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4() -> DenseMatrix {
        DenseMatrix::from_real_rows(&[
            [1.0, 1.0, 1.0, 2.0],
            [0.0, 1.0, 3.0, 4.0],
            [0.0, 0.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
    }

    #[test]
    fn matvec_identity() {
        let x = DenseVector::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(matvec(&DenseMatrix::identity(3), &x).unwrap(), x);
    }

    #[test]
    fn matvec_example4_by_hand() {
        // row sums: -4+7+1, 7+3, 1, 0
        let b = DenseVector::from_real(&[-4.0, 7.0, 1.0, 0.0]);
        let ab = matvec(&example4(), &b).unwrap();
        assert_eq!(ab, DenseVector::from_real(&[4.0, 10.0, 1.0, 0.0]));
    }

    #[test]
    fn matvec_zero_matrix_and_mismatch() {
        let x = DenseVector::from_real(&[5.0, -1.0]);
        assert!(matvec(&DenseMatrix::zeros(2, 2), &x).unwrap().is_zero());
        assert!(matches!(
            matvec(&DenseMatrix::zeros(2, 3), &x),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_apply_cases() {
        let x = DenseVector::from_real(&[1.0, 2.0]);
        let n = DenseMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(power_apply(&n, 0, &x).unwrap(), x);
        assert!(power_apply(&n, 2, &x).unwrap().is_zero());
        assert!(matches!(
            power_apply(&DenseMatrix::zeros(2, 3), 1, &DenseVector::zeros(3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn power_apply_agrees_with_explicit_power() {
        let a = example4();
        let x = DenseVector::from_real(&[0.5, -1.0, 2.0, 3.0]);
        let explicit = matvec(&a.power(3).unwrap(), &x).unwrap();
        let applied = power_apply(&a, 3, &x).unwrap();
        assert!(explicit.sub(&applied).norm() < 1e-12);
    }
}
