//! DGMRES augmented with approximate eigenvectors, ADGMRES(m, k).
//!
//! Each cycle runs `p = m - a` Arnoldi steps from `A^a r0`, takes the `k`
//! smallest-magnitude nonzero Ritz pairs of the leading `p x p` block
//! `H#`, and forms `W = [v_1 .. v_p, z_1 .. z_k]`. Arnoldi is continued on
//! `A W` to get `A W = V(0) H(0)`, then `a` further levels
//! `A V(t-1) = V(t) H(t)` give
//!
//! ```text
//! A^{a+1} W = V(a) H(a) ... H(0)
//! ```
//!
//! and the update `x = x0 + W y` minimizes `||beta e1 - H y||`. Level `t`
//! shares its first `p + t` basis vectors with level `t - 1`, so only the
//! trailing `k + 1` columns of each `H(t)` need new inner products.
//!
//! Ritz vectors `z_i = V_p y_i` that add no direction beyond the columns
//! before them are flagged as contained. Their columns stay in `W` and in
//! the Hessenberg chain but are left out of the least-squares problem, which
//! would otherwise be rank deficient.

use crate::densela::{
    hessenberg_eig, least_squares, matvec, mgs_orthogonalize, power_apply, DenseMatrix, DenseVector, EigOptions,
    LinalgError, Scalar, DEFAULT_SINGULAR_TOL,
};
use crate::dgmres::{
    build_krylov, check_problem, combine, dgmres_cycle, restart_loop, seminorm_residual, unit_rhs, CycleResult,
    KrylovBasis, RunHistory, SolverConfig, SolverError,
};

/// A unit Ritz vector whose component outside the preceding columns of `W`
/// is at most this large is treated as contained in their span.
pub const CONTAINED_TOL: f64 = 1e-8;

/// Ritz pairs selected for augmentation.
#[derive(Clone, Debug)]
pub struct RitzSet {
    /// Sorted by magnitude, then argument.
    pub values: Vec<Scalar>,
    /// `z_i = V_p y_i`, unit norm.
    pub vectors: Vec<DenseVector>,
    /// Ritz values rejected as numerically zero.
    pub discarded_near_zero: usize,
    /// `||H# y_i - lambda_i y_i||` for each selected pair.
    pub residuals: Vec<f64>,
}

impl RitzSet {
    pub fn empty() -> Self {
        RitzSet {
            values: Vec::new(),
            vectors: Vec::new(),
            discarded_near_zero: 0,
            residuals: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Width of the usable Krylov part: `p`, or fewer columns after breakdown.
fn usable_width(basis: &KrylovBasis, p: usize) -> usize {
    p.min(basis.steps())
}

/// The `k` smallest-magnitude nonzero Ritz pairs from the leading `p x p`
/// block of `basis.hbar`.
pub fn ritz_pairs(
    a: &DenseMatrix,
    basis: &KrylovBasis,
    p: usize,
    k: usize,
    cfg: &SolverConfig,
) -> Result<RitzSet, SolverError> {
    if k == 0 {
        return Ok(RitzSet::empty());
    }
    let p = usable_width(basis, p);
    if p == 0 {
        return Err(SolverError::NotEnoughRitz { wanted: k, found: 0 });
    }
    let h_sharp = basis.hbar.leading(p, p);
    let threshold = cfg.zero_ritz_tol * a.frobenius_norm();
    let mut pairs = hessenberg_eig(&h_sharp, &EigOptions::default())?;
    let total = pairs.len();
    pairs.retain(|pair| pair.value.norm() > threshold);
    let discarded_near_zero = total - pairs.len();
    if pairs.len() < k {
        return Err(SolverError::NotEnoughRitz {
            wanted: k,
            found: pairs.len(),
        });
    }
    pairs.sort_by(|x, y| {
        x.value
            .norm()
            .total_cmp(&y.value.norm())
            .then(x.value.arg().total_cmp(&y.value.arg()))
    });
    pairs.truncate(k);

    let mut set = RitzSet {
        discarded_near_zero,
        ..RitzSet::empty()
    };
    for pair in pairs {
        let mut hy = matvec(&h_sharp, &pair.vector)?;
        hy.axpy(-pair.value, &pair.vector);
        let mut z = DenseVector::zeros(a.rows());
        for (yi, v) in pair.vector.iter().zip(&basis.vectors) {
            z.axpy(*yi, v);
        }
        let nz = z.norm();
        z.scale(Scalar::new(1.0 / nz, 0.0));
        set.values.push(pair.value);
        set.vectors.push(z);
        set.residuals.push(hy.norm());
    }
    Ok(set)
}

/// Augmented basis and the Hessenberg chain `H(0) .. H(a)`.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    /// Number of Krylov columns `p` at the front of `W`.
    pub krylov_width: usize,
    /// `[v_1 .. v_p, z_1 .. z_k]`.
    pub w: DenseMatrix,
    /// Basis of the last completed level, `V(0)` after [`augment_basis`]
    /// and `V(a)` after [`build_h_chain`]. Breakdowns leave zero columns.
    pub v_final: DenseMatrix,
    pub h_chain: Vec<DenseMatrix>,
    /// `H(t) ... H(0)` for the levels built so far.
    pub h_product: DenseMatrix,
    /// Per Ritz vector: already in the span of the columns before it.
    pub contained: Vec<bool>,
    /// `(level, column)` of each breakdown; the column got a zero vector.
    pub breakdowns: Vec<(usize, usize)>,
    /// Newly computed Hessenberg entries per level.
    pub new_entries: Vec<usize>,
    pub matvecs: usize,
    v_current: Vec<DenseVector>,
}

impl AugmentedSystem {
    /// Column indices of `W` that enter the least-squares problem.
    pub fn active_columns(&self) -> Vec<usize> {
        let p = self.krylov_width;
        (0..p)
            .chain(
                self.contained
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !**c)
                    .map(|(i, _)| p + i),
            )
            .collect()
    }

    /// Number of completed chain levels after `H(0)`.
    pub fn levels(&self) -> usize {
        self.h_chain.len().saturating_sub(1)
    }

    /// `||A^{t+1} W - V(t) H(t) ... H(0)||_F` for the levels built so far.
    pub fn relation_residual(&self, a: &DenseMatrix) -> Result<f64, LinalgError> {
        let power = self.levels() + 1;
        let vh = self.v_final.matmul(&self.h_product)?;
        let mut total = 0.0_f64;
        for j in 0..self.w.cols() {
            let lhs = power_apply(a, power, &self.w.column_vector(j))?;
            total += lhs.sub(&vh.column_vector(j)).norm().powi(2);
        }
        Ok(total.sqrt())
    }
}

/// Orthogonalizes `A x` against `basis`, appending the new vector (or a zero
/// placeholder on breakdown) and writing column `col` of `h`. Returns whether
/// a breakdown occurred.
fn extend_column(
    a: &DenseMatrix,
    x: &DenseVector,
    basis: &mut Vec<DenseVector>,
    h: &mut DenseMatrix,
    col: usize,
    cfg: &SolverConfig,
    matvecs: &mut usize,
) -> Result<bool, SolverError> {
    if x.is_zero() {
        basis.push(DenseVector::zeros(x.len()));
        return Ok(true);
    }
    let ax = matvec(a, x)?;
    *matvecs += 1;
    let out = mgs_orthogonalize(basis, ax, cfg.breakdown_tol);
    for (i, c) in out.coeffs.iter().enumerate() {
        h[(i, col)] = *c;
    }
    match out.next {
        Some(v) => {
            h[(col + 1, col)] = Scalar::new(out.hnext, 0.0);
            basis.push(v);
            Ok(false)
        }
        None => {
            basis.push(DenseVector::zeros(x.len()));
            Ok(true)
        }
    }
}

/// Level 0: `A W = V(0) H(0)` with `H(0)` of shape `(p+k+1) x (p+k)`.
pub fn augment_basis(
    a: &DenseMatrix,
    basis: &KrylovBasis,
    p: usize,
    ritz: &RitzSet,
    cfg: &SolverConfig,
) -> Result<AugmentedSystem, SolverError> {
    let n = a.rows();
    let p = usable_width(basis, p);
    let k = ritz.len();
    let mut v0: Vec<DenseVector> = basis.vectors.iter().take(p + 1).cloned().collect();
    if v0.len() == p {
        v0.push(DenseVector::zeros(n));
    }
    let mut h0 = DenseMatrix::zeros(p + k + 1, p + k);
    for j in 0..p {
        for i in 0..=j + 1 {
            h0[(i, j)] = basis.hbar[(i, j)];
        }
    }

    // Orthonormal basis of the columns of W seen so far, for containment.
    let mut span: Vec<DenseVector> = basis.vectors.iter().take(p).cloned().collect();
    let mut contained = Vec::with_capacity(k);
    let mut breakdowns = Vec::new();
    let mut matvecs = 0;
    let mut entries = 0;
    for (i, z) in ritz.vectors.iter().enumerate() {
        let out = mgs_orthogonalize(&span, z.clone(), 0.0);
        let is_contained = out.hnext <= CONTAINED_TOL * z.norm();
        if !is_contained {
            if let Some(q) = out.next {
                span.push(q);
            }
        }
        contained.push(is_contained);

        let col = p + i;
        entries += col + 2;
        if extend_column(a, z, &mut v0, &mut h0, col, cfg, &mut matvecs)? {
            breakdowns.push((0, col));
        }
    }

    let mut w_cols: Vec<DenseVector> = basis.vectors.iter().take(p).cloned().collect();
    w_cols.extend(ritz.vectors.iter().cloned());
    Ok(AugmentedSystem {
        krylov_width: p,
        w: DenseMatrix::from_columns(&w_cols),
        v_final: DenseMatrix::from_columns(&v0),
        h_chain: vec![h0.clone()],
        h_product: h0,
        contained,
        breakdowns,
        new_entries: vec![entries],
        matvecs,
        v_current: v0,
    })
}

/// Levels `1 ..= a` of the chain and the product `H(a) ... H(0)`.
///
/// At level `t`, columns `j < p + t - 1` of `H(t)` are copied from
/// `H(t-1)`; columns `p + t - 1 ..= p + k + t - 1` apply `A` to the
/// corresponding vectors of `V(t-1)` and orthogonalize against `V(t)`.
pub fn build_h_chain(
    a: &DenseMatrix,
    mut sys: AugmentedSystem,
    index_a: usize,
    cfg: &SolverConfig,
) -> Result<AugmentedSystem, SolverError> {
    let p = sys.krylov_width;
    let k = sys.contained.len();
    for t in (sys.levels() + 1)..=index_a {
        let prev = std::mem::take(&mut sys.v_current);
        let h_prev = sys.h_chain.last().expect("chain starts with H(0)");
        let cols = p + k + t;
        let keep = p + t;
        let mut h = DenseMatrix::zeros(cols + 1, cols);
        for j in 0..keep - 1 {
            for i in 0..=j + 1 {
                h[(i, j)] = h_prev[(i, j)];
            }
        }
        let mut v: Vec<DenseVector> = prev[..keep].to_vec();
        let mut entries = 0;
        for (j, prev_j) in prev.iter().enumerate().take(cols).skip(keep - 1) {
            entries += j + 2;
            if extend_column(a, prev_j, &mut v, &mut h, j, cfg, &mut sys.matvecs)? {
                sys.breakdowns.push((t, j));
            }
        }
        sys.h_product = h.matmul(&sys.h_product)?;
        sys.h_chain.push(h);
        sys.new_entries.push(entries);
        sys.v_current = v;
    }
    sys.v_final = DenseMatrix::from_columns(&sys.v_current);
    Ok(sys)
}

/// One ADGMRES(m, k) cycle. If the Ritz extraction fails the cycle is a
/// plain DGMRES(m) cycle with `fallback` set.
pub fn adgmres_cycle(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    k: usize,
    cfg: &SolverConfig,
) -> Result<CycleResult, SolverError> {
    check_problem(a, b, x0, cfg)?;
    let ia = cfg.index_a;
    let (seed, mut matvecs) = seminorm_residual(a, b, x0, ia)?;
    let beta = seed.norm();
    if beta == 0.0 {
        return dgmres_cycle(a, b, x0, cfg);
    }
    let p = cfg.krylov_width();
    let basis = build_krylov(a, &seed, p, cfg)?;
    matvecs += basis.steps();
    let ritz = match ritz_pairs(a, &basis, p, k, cfg) {
        Ok(r) => r,
        Err(SolverError::NotEnoughRitz { .. }) | Err(SolverError::Linalg(_)) => {
            let mut out = dgmres_cycle(a, b, x0, cfg)?;
            out.fallback = true;
            out.matvecs += matvecs;
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let sys = augment_basis(a, &basis, p, &ritz, cfg)?;
    let sys = build_h_chain(a, sys, ia, cfg)?;
    matvecs += sys.matvecs;

    let active = sys.active_columns();
    let product = sys.h_product.select_columns(&active);
    let ls = least_squares(&product, &unit_rhs(product.rows(), beta), DEFAULT_SINGULAR_TOL)?;
    let columns: Vec<DenseVector> = active.iter().map(|&j| sys.w.column_vector(j)).collect();
    let refs: Vec<&DenseVector> = columns.iter().collect();
    let x_new = combine(x0, &refs, &ls.y);
    let (res, spent) = seminorm_residual(a, b, &x_new, ia)?;
    Ok(CycleResult {
        x_new,
        seminorm: res.norm(),
        ls_residual: ls.residual,
        basis_dim: active.len(),
        breakdown: basis.breakdown_at.is_some() || !sys.breakdowns.is_empty(),
        fallback: false,
        matvecs: matvecs + spent,
        ritz_values: ritz.values,
    })
}

/// ADGMRES(m, k) restarted from `x0`; Ritz pairs are recomputed every cycle.
pub fn adgmres_restarted(
    a: &DenseMatrix,
    b: &DenseVector,
    x0: &DenseVector,
    k: usize,
    cfg: &SolverConfig,
) -> Result<RunHistory, SolverError> {
    restart_loop(a, b, x0, cfg, |x| adgmres_cycle(a, b, x, k, cfg))
}
