//! Reference Drazin inverse built from Gauss-Jordan eliminations only.
//!
//! The solvers are checked against this module, so it deliberately avoids
//! every Krylov, Gram-Schmidt and QR routine. Ranks and bases come from
//! full-pivot elimination:
//!
//! * the index is the first level where `rank(A^j)` stops dropping, with the
//!   ranks tracked through nested range bases `range(A^{j+1}) = A range(A^j)`
//!   so every rank decision is made relative to `||A||` instead of `||A^j||`;
//! * `range(A^l)` and `null(A^l)` (for any `l >= ind(A)`) are complementary
//!   invariant subspaces, and with `S = [F N]` the core part `C` of `A` in
//!   that basis gives `A^D = F C^{-1} [I 0] S^{-1}`.
//!
//! The classical `A^l (A^{2l+1})^{(1)} A^l` identity is also provided
//! ([`drazin_via_one_inverse`]); it forms `A^{2l+1}` explicitly and so only
//! suits matrices with a modest spread of nonzero eigenvalue magnitudes.

use thiserror::Error;

use crate::densela::{matvec, DenseMatrix, DenseVector, LinalgError, Scalar};

/// Rank decisions: pivots at or below `DEFAULT_RANK_TOL * ||M||_F` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Scaled tolerance for the three Drazin axioms.
pub const AXIOM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("level {level} is below the index {index}")]
    LevelBelowIndex { level: usize, index: usize },
    #[error("range and null space dimensions {range} + {null} do not add up to {n}; adjust the rank tolerance")]
    Decomposition { range: usize, null: usize, n: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("Drazin axioms violated (scaled residuals: core {core:e}, reflexive {reflexive:e}, commute {commute:e})")]
    AxiomViolation { core: f64, reflexive: f64, commute: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Index, a {1}-inverse of `A^{2l+1}` and the assembled Drazin inverse.
#[derive(Clone, Debug)]
pub struct DrazinFactors {
    pub index_a: usize,
    /// The level `l >= index_a` the factors were built at.
    pub level: usize,
    /// A {1}-inverse of `A^{2l+1}`, namely `S diag(C^{-(2l+1)}, 0) S^{-1}`.
    pub one_inverse_b: DenseMatrix,
    pub drazin: DenseMatrix,
}

/// Scaled residuals of the three Drazin axioms for a candidate `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxiomResiduals {
    /// `||A^{a+1} X - A^a|| / (||A||^{a+1} ||X||)`
    pub core: f64,
    /// `||X A X - X|| / (||X||^2 ||A||)`
    pub reflexive: f64,
    /// `||A X - X A|| / (||A|| ||X||)`
    pub commute: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.core.max(self.reflexive).max(self.commute)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub fn axiom_residuals(a: &DenseMatrix, x: &DenseMatrix, index: usize) -> Result<AxiomResiduals, OracleError> {
    let na = a.frobenius_norm();
    let nx = x.frobenius_norm();
    let a_pow = a.power(index)?;
    let a_pow1 = a.matmul(&a_pow)?;
    let core = a_pow1.matmul(x)?.sub(&a_pow)?.frobenius_norm();
    let xax = x.matmul(a)?.matmul(x)?;
    let reflexive = xax.sub(x)?.frobenius_norm();
    let commute = a.matmul(x)?.sub(&x.matmul(a)?)?.frobenius_norm();
    Ok(AxiomResiduals {
        core: ratio(core, na.powi(index as i32 + 1) * nx),
        reflexive: ratio(reflexive, nx * nx * na),
        commute: ratio(commute, na * nx),
    })
}

/// Reduced row echelon form under full pivoting.
struct Echelon {
    /// (row, col) of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
    rref: DenseMatrix,
}

fn eliminate(m: &DenseMatrix, tol: f64) -> Echelon {
    let (rows, cols) = (m.rows(), m.cols());
    let threshold = tol * m.frobenius_norm();
    let mut w = m.clone();
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut pivots = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for j in (0..cols).filter(|&j| !col_used[j]) {
            for i in (0..rows).filter(|&i| !row_used[i]) {
                let v = w[(i, j)].norm();
                if best.is_none_or(|b| v > b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((pi, pj, pv)) = best else { break };
        if pv <= threshold || pv == 0.0 {
            break;
        }
        let inv = Scalar::new(1.0, 0.0) / w[(pi, pj)];
        for j in 0..cols {
            w[(pi, j)] *= inv;
        }
        for i in (0..rows).filter(|&i| i != pi) {
            let f = w[(i, pj)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..cols {
                let t = w[(pi, j)];
                w[(i, j)] -= f * t;
            }
        }
        row_used[pi] = true;
        col_used[pj] = true;
        pivots.push((pi, pj));
    }
    Echelon { pivots, rref: w }
}

/// Null space basis of `m` (one column per free variable).
fn null_space(m: &DenseMatrix, tol: f64) -> Vec<DenseVector> {
    let ech = eliminate(m, tol);
    let cols = m.cols();
    let mut is_pivot = vec![false; cols];
    for &(_, c) in &ech.pivots {
        is_pivot[c] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = DenseVector::zeros(cols);
            x[f] = Scalar::new(1.0, 0.0);
            for &(r, c) in &ech.pivots {
                x[c] = -ech.rref[(r, f)];
            }
            x
        })
        .collect()
}

fn normalized(mut v: DenseVector) -> DenseVector {
    let n = v.norm();
    if n > 0.0 {
        v.scale(Scalar::new(1.0 / n, 0.0));
    }
    v
}

/// `range(A F)` as normalized pivot columns of `A F`.
fn next_range(a: &DenseMatrix, f: &[DenseVector], tol: f64) -> Result<Vec<DenseVector>, OracleError> {
    if f.is_empty() {
        return Ok(Vec::new());
    }
    let af = DenseMatrix::from_columns(&f.iter().map(|c| matvec(a, c)).collect::<Result<Vec<_>, _>>()?);
    let mut pivot_cols: Vec<usize> = eliminate(&af, tol).pivots.iter().map(|&(_, c)| c).collect();
    pivot_cols.sort_unstable();
    Ok(pivot_cols
        .into_iter()
        .map(|c| normalized(af.column_vector(c)))
        .collect())
}

/// `null(A^{j+1})` from `null(A^j)`: all `x` with `A x` in `span(N)`.
fn next_null(a: &DenseMatrix, n_basis: &[DenseVector], tol: f64) -> Vec<DenseVector> {
    let n = a.rows();
    let k = DenseMatrix::from_fn(
        n,
        n + n_basis.len(),
        |i, j| {
            if j < n {
                a[(i, j)]
            } else {
                -n_basis[j - n][i]
            }
        },
    );
    null_space(&k, tol)
        .into_iter()
        .map(|z| normalized(DenseVector::from_vec_unchecked(z.as_slice()[..n].to_vec())))
        .collect()
}

fn check_square(a: &DenseMatrix) -> Result<(), OracleError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(OracleError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

fn identity_columns(n: usize) -> Vec<DenseVector> {
    (0..n).map(|i| DenseVector::unit(n, i)).collect()
}

/// `ind(A)`: the smallest `a` with `rank(A^{a+1}) = rank(A^a)`, `A^0 = I`.
pub fn index_of(a: &DenseMatrix, tol: f64) -> Result<usize, OracleError> {
    check_square(a)?;
    let n = a.rows();
    let mut basis = identity_columns(n);
    for j in 0..=n {
        let next = next_range(a, &basis, tol)?;
        if next.len() == basis.len() {
            return Ok(j);
        }
        basis = next;
    }
    unreachable!("rank sequence of an n x n matrix stabilizes within n steps")
}

/// Gauss-Jordan inverse with partial pivoting; fails on an exactly zero pivot.
pub fn inverse(m: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
    check_square(m)?;
    let n = m.rows();
    let mut w = m.clone();
    let mut inv = DenseMatrix::identity(n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| w[(i, k)].norm().partial_cmp(&w[(j, k)].norm()).unwrap())
            .unwrap_or(k);
        if w[(p, k)].norm() == 0.0 {
            return Err(OracleError::Singular);
        }
        if p != k {
            for j in 0..n {
                let t = w[(k, j)];
                w[(k, j)] = w[(p, j)];
                w[(p, j)] = t;
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let d = Scalar::new(1.0, 0.0) / w[(k, k)];
        for j in 0..n {
            w[(k, j)] *= d;
            inv[(k, j)] *= d;
        }
        for i in (0..n).filter(|&i| i != k) {
            let f = w[(i, k)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let t = w[(k, j)];
                w[(i, j)] -= f * t;
                let t = inv[(k, j)];
                inv[(i, j)] -= f * t;
            }
        }
    }
    Ok(inv)
}

/// A {1}-inverse `G` (`B G B = B`): with pivot rows `R` and columns `C` from
/// full-pivot elimination, `G[C, R] = B[R, C]^{-1}` and zero elsewhere.
pub fn one_inverse(b: &DenseMatrix, tol: f64) -> Result<DenseMatrix, OracleError> {
    check_square(b)?;
    let ech = eliminate(b, tol);
    let r = ech.pivots.len();
    let mut g = DenseMatrix::zeros(b.cols(), b.rows());
    if r == 0 {
        return Ok(g);
    }
    let b11 = DenseMatrix::from_fn(r, r, |i, j| b[(ech.pivots[i].0, ech.pivots[j].1)]);
    let b11_inv = inverse(&b11)?;
    for (ci, &(_, col)) in ech.pivots.iter().enumerate() {
        for (ri, &(row, _)) in ech.pivots.iter().enumerate() {
            g[(col, row)] = b11_inv[(ci, ri)];
        }
    }
    Ok(g)
}

/// Drazin inverse assembled at level `level >= ind(A)`.
pub fn drazin_inverse_at_level(a: &DenseMatrix, level: usize, tol: f64) -> Result<DrazinFactors, OracleError> {
    check_square(a)?;
    let index = index_of(a, tol)?;
    if level < index {
        return Err(OracleError::LevelBelowIndex { level, index });
    }
    let n = a.rows();
    let mut range = identity_columns(n);
    let mut null: Vec<DenseVector> = Vec::new();
    for _ in 0..level {
        range = next_range(a, &range, tol)?;
        null = next_null(a, &null, tol);
    }
    let r = range.len();
    if r + null.len() != n {
        return Err(OracleError::Decomposition {
            range: r,
            null: null.len(),
            n,
        });
    }
    let mut cols = range.clone();
    cols.extend(null.iter().cloned());
    let s = DenseMatrix::from_columns(&cols);
    let s_inv = inverse(&s)?;

    let (drazin, one_inverse_b) = if r == 0 {
        (DenseMatrix::zeros(n, n), DenseMatrix::zeros(n, n))
    } else {
        let f = DenseMatrix::from_columns(&range);
        let af = a.matmul(&f)?;
        let c = s_inv.matmul(&af)?.leading(r, r);
        let c_inv = inverse(&c)?;
        let top = s_inv.block(0..r, 0..n);
        let drazin = f.matmul(&c_inv)?.matmul(&top)?;

        let mut c_pow = DenseMatrix::identity(r);
        for _ in 0..(2 * level + 1) {
            c_pow = c_pow.matmul(&c_inv)?;
        }
        let one_inv = s.matmul(&c_pow.resized(n, n))?.matmul(&s_inv)?;
        (drazin, one_inv)
    };

    let res = axiom_residuals(a, &drazin, index)?;
    if !res.within(AXIOM_TOL) {
        return Err(OracleError::AxiomViolation {
            core: res.core,
            reflexive: res.reflexive,
            commute: res.commute,
        });
    }
    Ok(DrazinFactors {
        index_a: index,
        level,
        one_inverse_b,
        drazin,
    })
}

/// Drazin inverse at level `ind(A)`.
pub fn drazin_inverse(a: &DenseMatrix, tol: f64) -> Result<DrazinFactors, OracleError> {
    let index = index_of(a, tol)?;
    drazin_inverse_at_level(a, index, tol)
}

/// `A^D b`.
pub fn drazin_solution(a: &DenseMatrix, b: &DenseVector, tol: f64) -> Result<DenseVector, OracleError> {
    check_square(a)?;
    if b.len() != a.rows() {
        return Err(OracleError::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let factors = drazin_inverse(a, tol)?;
    Ok(matvec(&factors.drazin, b)?)
}

/// `A^l (A^{2l+1})^{(1)} A^l` with the elimination-based {1}-inverse.
/// Forms `A^{2l+1}` explicitly; see the module notes on its limits.
pub fn drazin_via_one_inverse(a: &DenseMatrix, level: usize, tol: f64) -> Result<DenseMatrix, OracleError> {
    check_square(a)?;
    let a_l = a.power(level)?;
    let big = a.power(2 * level + 1)?;
    let g = one_inverse(&big, tol)?;
    Ok(a_l.matmul(&g)?.matmul(&a_l)?)
}
