use super::{matvec, DenseMatrix, DenseVector, LinalgError, Scalar};

/// Diagonal entries of a triangular factor at or below this fraction of
/// `||R||_F` are treated as exact zeros.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-15;

/// Thin Householder QR of a tall matrix: `M = Q R` with `Q` (rows x cols)
/// having orthonormal columns and `R` (cols x cols) upper triangular with a
/// real nonnegative diagonal.
pub fn qr_factor(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix), LinalgError> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(LinalgError::DimensionMismatch {
            context: "qr_factor requires rows >= cols",
            expected: cols,
            found: rows,
        });
    }
    let mut r = m.clone();
    // Householder vectors, one per column (None when the column is already reduced).
    let mut reflectors: Vec<Option<Vec<Scalar>>> = Vec::with_capacity(cols);
    for k in 0..cols {
        let below: f64 = (k + 1..rows).map(|i| r[(i, k)].norm_sqr()).sum();
        if below == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = r[(k, k)];
        let xnorm = (x0.norm_sqr() + below).sqrt();
        let phase = if x0.norm() == 0.0 {
            Scalar::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Scalar> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for j in k..cols {
            let s: Scalar = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            let f = s * (2.0 / vnorm2);
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * f;
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = Scalar::new(0.0, 0.0);
        }
        reflectors.push(Some(v.into_iter().map(|z| z / vnorm2.sqrt()).collect()));
    }

    // Q = H_0 H_1 ... H_{cols-1} applied to the first `cols` identity columns.
    let mut q = DenseMatrix::from_fn(rows, cols, |i, j| {
        if i == j {
            Scalar::new(1.0, 0.0)
        } else {
            Scalar::new(0.0, 0.0)
        }
    });
    for k in (0..cols).rev() {
        let Some(v) = &reflectors[k] else { continue };
        for j in 0..cols {
            let s: Scalar = v.iter().enumerate().map(|(t, vi)| vi.conj() * q[(k + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                q[(k + t, j)] -= vi * s * 2.0;
            }
        }
    }

    // Rotate phases so diag(R) is real and nonnegative.
    let mut rr = r.leading(cols, cols);
    for k in 0..cols {
        let d = rr[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        let ph = d / d.norm();
        for j in k..cols {
            rr[(k, j)] *= ph.conj();
        }
        for i in 0..rows {
            q[(i, k)] *= ph;
        }
    }
    Ok((q, rr))
}

/// Back substitution for `R y = c`.
///
/// Fails with the first diagonal index whose magnitude is at most
/// `singular_tol * ||R||_F`.
pub fn solve_upper_triangular(r: &DenseMatrix, c: &DenseVector, singular_tol: f64) -> Result<DenseVector, LinalgError> {
    if !r.is_square() {
        return Err(LinalgError::NotSquare {
            rows: r.rows(),
            cols: r.cols(),
        });
    }
    let n = r.rows();
    if c.len() != n {
        return Err(LinalgError::DimensionMismatch {
            context: "solve_upper_triangular",
            expected: n,
            found: c.len(),
        });
    }
    let threshold = singular_tol * r.frobenius_norm();
    if let Some(index) = (0..n).find(|&i| r[(i, i)].norm() <= threshold) {
        return Err(LinalgError::RankDeficient {
            index,
            magnitude: r[(index, index)].norm(),
        });
    }
    let mut y = c.clone();
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / r[(i, i)];
    }
    Ok(y)
}

/// Solution of `min_y ||rhs - M y||`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub y: DenseVector,
    /// `||rhs - M y||`, recomputed from the solution.
    pub residual: f64,
    /// Number of leading columns used. Less than `M.cols()` when the
    /// triangular factor was rank deficient and trailing columns were dropped.
    pub columns_used: usize,
}

/// Least squares through [`qr_factor`] and [`solve_upper_triangular`].
///
/// If the triangular factor is rank deficient at index `d`, the problem is
/// re-solved over the leading `d` columns and the remaining coefficients are
/// zero. Column order therefore matters: put the most trusted directions
/// first.
pub fn least_squares(m: &DenseMatrix, rhs: &DenseVector, singular_tol: f64) -> Result<LeastSquares, LinalgError> {
    if rhs.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: "least_squares",
            expected: m.rows(),
            found: rhs.len(),
        });
    }
    let mut used = m.cols();
    let mut y_used = loop {
        if used == 0 {
            break DenseVector::zeros(0);
        }
        let sub = if used == m.cols() {
            m.clone()
        } else {
            m.leading(m.rows(), used)
        };
        let (q, r) = qr_factor(&sub)?;
        let c = matvec(&q.adjoint(), rhs)?;
        match solve_upper_triangular(&r, &c, singular_tol) {
            Ok(y) => break y,
            Err(LinalgError::RankDeficient { index, .. }) => used = index,
            Err(e) => return Err(e),
        }
    };
    let mut y = DenseVector::zeros(m.cols());
    for i in 0..used {
        y[i] = y_used[i];
    }
    y_used = y;
    let residual = rhs.sub(&matvec(m, &y_used)?).norm();
    Ok(LeastSquares {
        y: y_used,
        residual,
        columns_used: used,
    })
}
