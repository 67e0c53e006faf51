//! Restarted DGMRES(m).
//!
//! One cycle seeds Arnoldi with `A^a r0`, forms the stacked Hessenberg
//! product `H_m H_{m-1} ... H_{m-a}` from the leading blocks of a single
//! `(m+1) x m` Arnoldi matrix, solves `min ||beta e1 - H y||` by QR and
//! updates `x = x0 + V_{m-a} y`. The seminorm `||A^a (b - A x)||` used for
//! stopping is recomputed from scratch after every cycle.

use std::time::Instant;

use thiserror::Error;

use crate::densela::{
    least_squares, matvec, mgs_orthogonalize, power_apply, DenseMatrix, DenseVector, LinalgError, Scalar,
    DEFAULT_BREAKDOWN_TOL, DEFAULT_SINGULAR_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("restart size m = {m} must exceed the index a = {a}")]
    RestartTooSmall { m: usize, a: usize },
    #[error("invalid tolerance {name} = {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("Drazin-consistent residual already annihilated (zero Krylov seed)")]
    ZeroSeed,
    #[error("Arnoldi needs at least one step")]
    NoSteps,
    #[error("Hessenberg matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    HessenbergShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("only {found} nonzero Ritz values available, {wanted} requested; increase m or decrease k")]
    NotEnoughRitz { wanted: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Solver parameters shared by DGMRES and ADGMRES.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// The index `a = ind(A)`.
    pub index_a: usize,
    /// Restart size `m`; the Krylov part of each cycle has width `m - a`.
    pub restart_m: usize,
    /// Stop once `||A^a r|| / ||A^a b|| < tol_eps`.
    pub tol_eps: f64,
    pub max_cycles: usize,
    /// Relative Arnoldi breakdown threshold.
    pub breakdown_tol: f64,
    /// Ritz values with `|lambda| <= zero_ritz_tol * ||A||_F` count as zero.
    pub zero_ritz_tol: f64,
}

impl SolverConfig {
    pub const DEFAULT_EPS: f64 = 1e-12;
    pub const DEFAULT_MAX_CYCLES: usize = 10_000;
    pub const DEFAULT_ZERO_RITZ_TOL: f64 = 1e-8;

    pub fn new(index_a: usize, restart_m: usize) -> Self {
        SolverConfig {
            index_a,
            restart_m,
            tol_eps: Self::DEFAULT_EPS,
            max_cycles: Self::DEFAULT_MAX_CYCLES,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
            zero_ritz_tol: Self::DEFAULT_ZERO_RITZ_TOL,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.tol_eps = eps;
        self
    }

    pub fn with_max_cycles(mut self, max_cycles: usize) -> Self {
        self.max_cycles = max_cycles;
        self
    }

    /// Width of the Krylov part of a cycle, `m - a`.
    pub fn krylov_width(&self) -> usize {
        self.restart_m.saturating_sub(self.index_a)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.restart_m <= self.index_a {
            return Err(SolverError::RestartTooSmall {
                m: self.restart_m,
                a: self.index_a,
            });
        }
        let checks = [
            ("tol_eps", self.tol_eps, self.tol_eps > 0.0),
            ("breakdown_tol", self.breakdown_tol, self.breakdown_tol >= 0.0),
            ("zero_ritz_tol", self.zero_ritz_tol, self.zero_ritz_tol >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(SolverError::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

/// Orthonormal Arnoldi vectors and their extended Hessenberg matrix.
///
/// Without breakdown, `steps` columns give `steps + 1` vectors and a
/// `(steps + 1) x steps` matrix. On breakdown at step `j` the basis stops at
/// `j` vectors and `hbar` is `(j + 1) x j` with a zero last row, so
/// `A V_j = V_j H_j` holds exactly in the zero-padded sense.
#[derive(Clone, Debug)]
pub struct KrylovBasis {
    pub vectors: Vec<DenseVector>,
    pub hbar: DenseMatrix,
    /// Step (1-based column count) at which the Krylov space became invariant.
    pub breakdown_at: Option<usize>,
}

impl KrylovBasis {
    /// Number of Arnoldi columns, i.e. `hbar.cols()`.
    pub fn steps(&self) -> usize {
        self.hbar.cols()
    }

    pub fn basis_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_columns(&self.vectors)
    }

    /// `max_j ||A v_j - V_{j+1} h_j||` over all columns.
    pub fn arnoldi_residual(&self, a: &DenseMatrix) -> Result<f64, LinalgError> {
        let mut worst = 0.0_f64;
        for j in 0..self.steps() {
            let mut r = matvec(a, &self.vectors[j])?;
            for (i, v) in self.vectors.iter().enumerate().take(j + 2) {
                r.axpy(-self.hbar[(i, j)], v);
            }
            worst = worst.max(r.norm());
        }
        Ok(worst)
    }
}

/// Arnoldi with modified Gram-Schmidt starting from `seed / ||seed||`.
pub fn build_krylov(
    a: &DenseMatrix,
    seed: &DenseVector,
    steps: usize,
    cfg: &SolverConfig,
) -> Result<KrylovBasis, SolverError> {
    check_square(a)?;
    check_len("seed", a.rows(), seed.len())?;
    if steps == 0 {
        return Err(SolverError::NoSteps);
    }
    let beta = seed.norm();
    if beta == 0.0 {
        return Err(SolverError::ZeroSeed);
    }
    let mut vectors = vec![seed.scaled(Scalar::new(1.0 / beta, 0.0))];
    let mut hbar = DenseMatrix::zeros(steps + 1, steps);
    for j in 0..steps {
        let w = matvec(a, &vectors[j])?;
        let out = mgs_orthogonalize(&vectors, w, cfg.breakdown_tol);
        for (i, c) in out.coeffs.iter().enumerate() {
            hbar[(i, j)] = *c;
        }
        match out.next {
            Some(v) => {
                hbar[(j + 1, j)] = Scalar::new(out.hnext, 0.0);
                vectors.push(v);
            }
            None => {
                return Ok(KrylovBasis {
                    vectors,
                    hbar: hbar.leading(j + 2, j + 1),
                    breakdown_at: Some(j + 1),
                });
            }
        }
    }
    Ok(KrylovBasis {
        vectors,
        hbar,
        breakdown_at: None,
    })
}

/// `H_m H_{m-1} ... H_{m-a}` where `H_k` is the leading `(k+1) x k` block of
/// the `(m+1) x m` matrix `hbar_full`. The result is `(m+1) x (m-a)`.
pub fn stacked_hessenberg(hbar_full: &DenseMatrix, m: usize, a: usize) -> Result<DenseMatrix, SolverError> {
    if m <= a {
        return Err(SolverError::RestartTooSmall { m, a });
    }
    if hbar_full.rows() != m + 1 || hbar_full.cols() != m {
        return Err(SolverError::HessenbergShape {
            rows: hbar_full.rows(),
            cols: hbar_full.cols(),
            expected_rows: m + 1,
            expected_cols: m,
        });
    }
    let mut product = hbar_full.leading(m - a + 1, m - a);
    for k in (m - a + 1)..=m {
        product = hbar_full.leading(k + 1, k).matmul(&product)?;
    }
    Ok(product)
}

/// Outcome of one restart cycle.
#[derive(Clone, Debug)]
pub struct CycleResult {
    pub x_new: DenseVector,
    /// `||A^a (b - A x_new)||`, recomputed directly.
    pub seminorm: f64,
    /// `||beta e1 - H y||` from the least-squares solve.
    pub ls_residual: f64,
    /// Number of basis columns the update was built from.
    pub basis_dim: usize,
    pub breakdown: bool,
    /// ADGMRES only: Ritz extraction failed and a plain DGMRES cycle ran.
    pub fallback: bool,
    pub matvecs: usize,
    /// ADGMRES only: Ritz values used for augmentation.
    pub ritz_values: Vec<Scalar>,
}

/// `A^a (b - A x)` together with the number of products spent.
pub(crate) fn seminorm_residual(
    a: &DenseMatrix,
    b: &DenseVector,
    x: &DenseVector,
    index: usize,
) -> Result<(DenseVector, usize), SolverError> {
    let r = b.sub(&matvec(a, x)?);
    Ok((power_apply(a, index, &r)?, index + 1))
}

pub(crate) fn check_square(a: &DenseMatrix) -> Result<(), SolverError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(SolverError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), SolverError> {
    if expected == found {
        Ok(())
    } else {
        Err(SolverError::DimensionMismatch { what, expected, found })
    }
}

pub(crate) fn check_problem(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    cfg: &SolverConfig,
) -> Result<(), SolverError> {
    cfg.validate()?;
    check_square(a)?;
    check_len("right-hand side", a.rows(), b.len())?;
    check_len("initial guess", a.rows(), x0.len())
}

/// `x0 + sum_i y_i w_i` over the first `y.len()` columns.
pub(crate) fn combine(x0: &DenseVector, columns: &[&DenseVector], y: &DenseVector) -> DenseVector {
    let mut x = x0.clone();
    for (c, yi) in columns.iter().zip(y.iter()) {
        x.axpy(*yi, c);
    }
    x
}

pub(crate) fn unit_rhs(rows: usize, beta: f64) -> DenseVector {
    let mut rhs = DenseVector::zeros(rows);
    rhs[0] = Scalar::new(beta, 0.0);
    rhs
}

/// One DGMRES(m) cycle from `x0`.
pub fn dgmres_cycle(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    cfg: &SolverConfig,
) -> Result<CycleResult, SolverError> {
    check_problem(a, b, x0, cfg)?;
    let (m, ia) = (cfg.restart_m, cfg.index_a);
    let (seed, mut matvecs) = seminorm_residual(a, b, x0, ia)?;
    let beta = seed.norm();
    if beta == 0.0 {
        return Ok(CycleResult {
            x_new: x0.clone(),
            seminorm: 0.0,
            ls_residual: 0.0,
            basis_dim: 0,
            breakdown: false,
            fallback: false,
            matvecs,
            ritz_values: Vec::new(),
        });
    }
    let basis = build_krylov(a, &seed, m, cfg)?;
    matvecs += basis.steps();
    // Zero padding keeps A V_m = V_{m+1} H_m valid after breakdown, with
    // placeholder columns that the update never touches.
    let hbar = basis.hbar.resized(m + 1, m);
    let width = (m - ia).min(basis.steps());
    let product = stacked_hessenberg(&hbar, m, ia)?.leading(m + 1, width);
    let ls = least_squares(&product, &unit_rhs(m + 1, beta), DEFAULT_SINGULAR_TOL)?;
    let columns: Vec<&DenseVector> = basis.vectors.iter().take(width).collect();
    let x_new = combine(x0, &columns, &ls.y);
    let (res, spent) = seminorm_residual(a, b, &x_new, ia)?;
    Ok(CycleResult {
        x_new,
        seminorm: res.norm(),
        ls_residual: ls.residual,
        basis_dim: width,
        breakdown: basis.breakdown_at.is_some(),
        fallback: false,
        matvecs: matvecs + spent,
        ritz_values: Vec::new(),
    })
}

/// One entry of a convergence history.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    /// 1-based cycle number.
    pub cycle: usize,
    pub seminorm: f64,
    /// `seminorm / ||A^a b||` (or `/ 1` when `A^a b = 0`).
    pub relative: f64,
    /// Seconds since the run started.
    pub wall_time: f64,
    /// Cumulative matrix-vector products.
    pub matvecs: usize,
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct RunHistory {
    pub records: Vec<CycleRecord>,
    pub converged: bool,
    pub final_x: DenseVector,
    /// `||A^a (b - A x0)||`.
    pub initial_seminorm: f64,
    /// Denominator of the relative seminorm.
    pub reference_norm: f64,
}

impl RunHistory {
    pub fn cycles(&self) -> usize {
        self.records.len()
    }

    /// Relative seminorm after `cycle` cycles; cycle 0 is the starting point.
    pub fn relative_at(&self, cycle: usize) -> Option<f64> {
        if cycle == 0 {
            Some(self.initial_seminorm / self.reference_norm)
        } else {
            self.records.get(cycle - 1).map(|r| r.relative)
        }
    }

    pub fn final_relative(&self) -> f64 {
        self.relative_at(self.cycles()).unwrap_or(0.0)
    }

    pub fn fallback_cycles(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.fallback).map(|r| r.cycle).collect()
    }
}

/// Shared restart driver: applies `cycle` until the relative seminorm drops
/// below `cfg.tol_eps` or `cfg.max_cycles` cycles have run.
pub(crate) fn restart_loop(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    cfg: &SolverConfig,
    mut cycle: impl FnMut(&DenseVector) -> Result<CycleResult, SolverError>,
) -> Result<RunHistory, SolverError> {
    check_problem(a, b, x0, cfg)?;
    let start = Instant::now();
    let reference = power_apply(a, cfg.index_a, b)?.norm();
    let reference_norm = if reference > 0.0 { reference } else { 1.0 };
    let (r0, mut matvecs) = seminorm_residual(a, b, x0, cfg.index_a)?;
    let initial_seminorm = r0.norm();
    let mut history = RunHistory {
        records: Vec::new(),
        converged: initial_seminorm == 0.0 || initial_seminorm / reference_norm < cfg.tol_eps,
        final_x: x0.clone(),
        initial_seminorm,
        reference_norm,
    };
    let mut c = 1;
    while !history.converged && c <= cfg.max_cycles {
        let out = cycle(&history.final_x)?;
        matvecs += out.matvecs;
        let relative = out.seminorm / reference_norm;
        history.records.push(CycleRecord {
            cycle: c,
            seminorm: out.seminorm,
            relative,
            wall_time: start.elapsed().as_secs_f64(),
            matvecs,
            fallback: out.fallback,
        });
        history.final_x = out.x_new;
        history.converged = out.seminorm == 0.0 || relative < cfg.tol_eps;
        c += 1;
    }
    Ok(history)
}

/// DGMRES(m) restarted from `x0` until convergence or the cycle cap.
pub fn dgmres_restarted(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    cfg: &SolverConfig,
) -> Result<RunHistory, SolverError> {
    restart_loop(a, b, x0, cfg, |x| dgmres_cycle(a, b, x, cfg))
}
