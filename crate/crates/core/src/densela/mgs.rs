use super::{DenseVector, Scalar};

/// Breakdown threshold relative to the norm of the vector being orthogonalized.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-13;

/// Outcome of orthogonalizing one vector against an orthonormal set.
#[derive(Clone, Debug)]
pub struct Orthogonalized {
    /// `h_i = <v_i, w>` accumulated over both passes.
    pub coeffs: Vec<Scalar>,
    /// Norm of the orthogonalized remainder.
    pub hnext: f64,
    /// Normalized remainder, or `None` on breakdown.
    pub next: Option<DenseVector>,
}

impl Orthogonalized {
    pub fn is_breakdown(&self) -> bool {
        self.next.is_none()
    }
}

/// Modified Gram-Schmidt step against `basis` (assumed orthonormal, zero
/// placeholder columns allowed). A second pass runs when the remainder norm
/// falls below `1/sqrt(2)` of the incoming norm. Breakdown is reported when
/// the remainder is at most `breakdown_tol * ||w||`.
pub fn mgs_orthogonalize(basis: &[DenseVector], mut w: DenseVector, breakdown_tol: f64) -> Orthogonalized {
    let scale = w.norm();
    let mut coeffs = vec![Scalar::new(0.0, 0.0); basis.len()];
    let mut before = scale;
    for pass in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = v.dot(&w);
            w.axpy(-h, v);
            *c += h;
        }
        let after = w.norm();
        if pass == 0 && after > before * std::f64::consts::FRAC_1_SQRT_2 {
            before = after;
            break;
        }
        before = after;
    }
    let hnext = before;
    let next = if hnext > breakdown_tol * scale && hnext > 0.0 {
        w.scale(Scalar::new(1.0 / hnext, 0.0));
        Some(w)
    } else {
        None
    };
    Orthogonalized { coeffs, hnext, next }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::DenseMatrix;

    #[test]
    fn vector_in_span_breaks_down() {
        let v1 = DenseVector::from_real(&[1.0, 0.0]);
        let out = mgs_orthogonalize(&[v1], DenseVector::from_real(&[2.0, 0.0]), DEFAULT_BREAKDOWN_TOL);
        assert_eq!(out.coeffs, vec![Scalar::new(2.0, 0.0)]);
        assert_eq!(out.hnext, 0.0);
        assert!(out.is_breakdown());
    }

    #[test]
    fn two_dimensional_hand_case() {
        let v1 = DenseVector::from_real(&[1.0, 0.0]);
        let out = mgs_orthogonalize(&[v1], DenseVector::from_real(&[1.0, 1.0]), DEFAULT_BREAKDOWN_TOL);
        assert_eq!(out.coeffs, vec![Scalar::new(1.0, 0.0)]);
        assert!((out.hnext - 1.0).abs() < 1e-15);
        assert_eq!(out.next.unwrap(), DenseVector::from_real(&[0.0, 1.0]));
    }

    #[test]
    fn zero_vector_breaks_down() {
        let out = mgs_orthogonalize(&[], DenseVector::zeros(3), DEFAULT_BREAKDOWN_TOL);
        assert!(out.is_breakdown());
        assert_eq!(out.hnext, 0.0);
    }

    #[test]
    fn builds_orthonormal_basis_from_hilbert_columns() {
        // Nearly dependent columns exercise the second pass.
        let n = 8;
        let h = DenseMatrix::from_fn(n, n, |i, j| Scalar::new(1.0 / (i + j + 1) as f64, 0.0));
        let mut basis: Vec<DenseVector> = Vec::new();
        for j in 0..6 {
            let out = mgs_orthogonalize(&basis, h.column_vector(j), 1e-15);
            basis.push(out.next.expect("hilbert columns are independent"));
        }
        let v = DenseMatrix::from_columns(&basis);
        let gram = v.adjoint().matmul(&v).unwrap();
        let err = gram.sub(&DenseMatrix::identity(6)).unwrap().frobenius_norm();
        assert!(err < 1e-10, "orthogonality loss {err:e}");
    }
}
