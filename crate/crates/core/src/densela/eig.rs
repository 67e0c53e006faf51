use super::{matvec, DenseMatrix, DenseVector, LinalgError, Scalar};

#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Largest accepted dimension.
    pub max_dim: usize,
    /// Relative subdiagonal deflation threshold.
    pub eig_tol: f64,
    /// QR sweeps allowed per eigenvalue before giving up.
    pub sweeps_per_eigenvalue: usize,
    /// Accepted eigenpair residual `||Hy - ly|| / (||H||_F ||y||)`.
    pub resid_tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            max_dim: 200,
            eig_tol: f64::EPSILON,
            sweeps_per_eigenvalue: 30,
            resid_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Scalar,
    /// Unit-norm eigenvector.
    pub vector: DenseVector,
}

/// All eigenpairs of an upper Hessenberg matrix.
///
/// Eigenvalues come from single-shift complex QR iteration with Wilkinson
/// shifts; each eigenvector from inverse iteration on `H - lambda I`.
/// Defective eigenvalues yield repeated (parallel) vectors.
pub fn hessenberg_eig(h: &DenseMatrix, opts: &EigOptions) -> Result<Vec<EigenPair>, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let n = h.rows();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if n > opts.max_dim {
        return Err(LinalgError::TooLarge {
            dim: n,
            max: opts.max_dim,
        });
    }
    for j in 0..n {
        for i in j + 2..n {
            if h[(i, j)].norm() != 0.0 {
                return Err(LinalgError::NotHessenberg { row: i, col: j });
            }
        }
    }
    let values = hessenberg_eigenvalues(h, opts)?;
    let hnorm = h.frobenius_norm();
    values
        .into_iter()
        .map(|value| {
            let vector = inverse_iteration(h, value, hnorm);
            let residual = matvec(h, &vector)?.sub(&vector.scaled(value)).norm();
            if residual > opts.resid_tol * hnorm {
                return Err(LinalgError::EigenvectorInaccurate { value, residual });
            }
            Ok(EigenPair { value, vector })
        })
        .collect()
}

fn hessenberg_eigenvalues(h: &DenseMatrix, opts: &EigOptions) -> Result<Vec<Scalar>, LinalgError> {
    let n = h.rows();
    let zero = Scalar::new(0.0, 0.0);
    let mut t = h.clone();
    let mut found: Vec<Scalar> = Vec::with_capacity(n);
    let max_sweeps = opts.sweeps_per_eigenvalue * n.max(1);
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n;
    while hi > 0 {
        if hi == 1 {
            found.push(t[(0, 0)]);
            break;
        }
        let active_norm = t.block(0..hi, 0..hi).frobenius_norm();
        let mut l = hi - 1;
        while l > 0 {
            let mut s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if s == 0.0 {
                s = active_norm;
            }
            if t[(l, l - 1)].norm() <= opts.eig_tol * s {
                t[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi - 1 {
            found.push(t[(hi - 1, hi - 1)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(LinalgError::EigenNoConvergence { sweeps, partial: found });
        }
        sweeps += 1;
        since_deflation += 1;

        let mu = if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            t[(hi - 1, hi - 1)] + Scalar::new(1.5 * t[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(
                t[(hi - 2, hi - 2)],
                t[(hi - 2, hi - 1)],
                t[(hi - 1, hi - 2)],
                t[(hi - 1, hi - 1)],
            )
        };
        qr_sweep(&mut t, l, hi, mu);
    }
    Ok(found)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Scalar {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (m1, m2) = (mean + disc, mean - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One explicitly shifted QR step on the active block `l..hi`.
fn qr_sweep(t: &mut DenseMatrix, l: usize, hi: usize, mu: Scalar) {
    for k in l..hi {
        t[(k, k)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - l - 1);
    for k in l..hi - 1 {
        let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
        for j in k..hi {
            let x = t[(k, j)];
            let y = t[(k + 1, j)];
            t[(k, j)] = x * c + s * y;
            t[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (idx, k) in (l..hi - 1).enumerate() {
        let (c, s) = rotations[idx];
        for i in l..=(k + 2).min(hi - 1) {
            let a = t[(i, k)];
            let b = t[(i, k + 1)];
            t[(i, k)] = a * c + b * s.conj();
            t[(i, k + 1)] = -a * s + b * c;
        }
    }
    for k in l..hi {
        t[(k, k)] += mu;
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` (real `c`) mapping `(x, y)` to `(r, 0)`.
fn givens(x: Scalar, y: Scalar) -> (f64, Scalar) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Scalar::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = x * y.conj() / (ax * r);
    (c, s)
}

/// Inverse iteration with a perturbed Hessenberg LU of `H - lambda I`.
fn inverse_iteration(h: &DenseMatrix, lambda: Scalar, hnorm: f64) -> DenseVector {
    let n = h.rows();
    let floor = f64::EPSILON * hnorm.max(f64::MIN_POSITIVE);
    let lu = HessenbergLu::factor(h, lambda, floor);
    // deterministic, generic start vector
    let mut y = DenseVector::from_vec_unchecked(
        (0..n)
            .map(|i| Scalar::new(1.0 + 0.37 * ((i * 7 + 3) % 11) as f64 / 11.0, 0.0))
            .collect(),
    );
    for _ in 0..3 {
        y = lu.solve(&y);
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            return DenseVector::unit(n, 0);
        }
        y.scale(Scalar::new(1.0 / norm, 0.0));
    }
    y
}

/// LU with adjacent-row partial pivoting for a shifted Hessenberg matrix.
/// Pivots below `floor` in magnitude are replaced by `floor`.
struct HessenbergLu {
    u: DenseMatrix,
    multipliers: Vec<Scalar>,
    swapped: Vec<bool>,
}

impl HessenbergLu {
    fn factor(h: &DenseMatrix, shift: Scalar, floor: f64) -> Self {
        let n = h.rows();
        let mut u = h.clone();
        for k in 0..n {
            u[(k, k)] -= shift;
        }
        let mut multipliers = vec![Scalar::new(0.0, 0.0); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if u[(k + 1, k)].norm() > u[(k, k)].norm() {
                for j in k..n {
                    let tmp = u[(k, j)];
                    u[(k, j)] = u[(k + 1, j)];
                    u[(k + 1, j)] = tmp;
                }
                swapped[k] = true;
            }
            if u[(k, k)].norm() < floor {
                u[(k, k)] = Scalar::new(floor, 0.0);
            }
            let f = u[(k + 1, k)] / u[(k, k)];
            multipliers[k] = f;
            for j in k..n {
                let t = u[(k, j)];
                u[(k + 1, j)] -= f * t;
            }
        }
        if n > 0 && u[(n - 1, n - 1)].norm() < floor {
            u[(n - 1, n - 1)] = Scalar::new(floor, 0.0);
        }
        Self {
            u,
            multipliers,
            swapped,
        }
    }

    fn solve(&self, b: &DenseVector) -> DenseVector {
        let n = self.u.rows();
        let mut y = b.clone();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                let t = y[k];
                y[k] = y[k + 1];
                y[k + 1] = t;
            }
            let t = y[k];
            y[k + 1] -= self.multipliers[k] * t;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.u[(i, j)] * y[j];
            }
            y[i] = s / self.u[(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(pairs: &[EigenPair]) -> Vec<f64> {
        let mut v: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn check_residuals(h: &DenseMatrix, pairs: &[EigenPair], tol: f64) {
        for p in pairs {
            assert!((p.vector.norm() - 1.0).abs() < 1e-12);
            let r = matvec(h, &p.vector).unwrap().sub(&p.vector.scaled(p.value)).norm();
            assert!(
                r <= tol * h.frobenius_norm().max(1e-300),
                "residual {r:e} for {}",
                p.value
            );
        }
    }

    #[test]
    fn diagonal_matrix() {
        let h = DenseMatrix::from_real_rows(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        let pairs = hessenberg_eig(&h, &EigOptions::default()).unwrap();
        assert_eq!(sorted_re(&pairs), vec![1.0, 2.0, 3.0]);
        for p in &pairs {
            // eigenvector is the matching coordinate axis
            let axis = [3.0, 1.0, 2.0].iter().position(|&d| d == p.value.re).unwrap();
            assert!((p.vector[axis].norm() - 1.0).abs() < 1e-12);
        }
        check_residuals(&h, &pairs, 1e-12);
    }

    #[test]
    fn jordan_block_at_zero() {
        let h = DenseMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let pairs = hessenberg_eig(&h, &EigOptions::default()).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert_eq!(p.value, Scalar::new(0.0, 0.0));
            assert!((p.vector[0].norm() - 1.0).abs() < 1e-12);
        }
        check_residuals(&h, &pairs, 1e-8);
    }

    #[test]
    fn companion_matrix_of_cubic() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let h = DenseMatrix::from_real_rows(&[[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let pairs = hessenberg_eig(&h, &EigOptions::default()).unwrap();
        let got = sorted_re(&pairs);
        for (g, want) in got.iter().zip([1.0, 2.0, 3.0]) {
            assert!((g - want).abs() < 1e-10, "{got:?}");
        }
        for p in &pairs {
            assert!(p.value.im.abs() < 1e-10);
        }
        check_residuals(&h, &pairs, 1e-10);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let h = DenseMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let pairs = hessenberg_eig(&h, &EigOptions::default()).unwrap();
        let mut ims: Vec<f64> = pairs.iter().map(|p| p.value.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        check_residuals(&h, &pairs, 1e-10);
    }

    #[test]
    fn rejects_non_hessenberg_and_oversized() {
        let full = DenseMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]);
        assert!(matches!(
            hessenberg_eig(&full, &EigOptions::default()),
            Err(LinalgError::NotHessenberg { row: 2, col: 0 })
        ));
        let opts = EigOptions {
            max_dim: 2,
            ..EigOptions::default()
        };
        assert!(matches!(
            hessenberg_eig(&DenseMatrix::identity(3), &opts),
            Err(LinalgError::TooLarge { .. })
        ));
    }

    #[test]
    fn non_convergence_carries_partial_results() {
        let h = DenseMatrix::from_real_rows(&[[1.0, 2.0, 0.5], [3.0, 4.0, 1.0], [0.0, 0.7, -2.0]]);
        let opts = EigOptions {
            sweeps_per_eigenvalue: 0,
            ..EigOptions::default()
        };
        match hessenberg_eig(&h, &opts) {
            Err(LinalgError::EigenNoConvergence { sweeps, .. }) => assert_eq!(sweeps, 0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
