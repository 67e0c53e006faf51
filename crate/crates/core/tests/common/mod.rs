//! Random singular test matrices with a known Drazin inverse.
#![allow(dead_code)]

use drazin_krylov::densela::{DenseMatrix, DenseVector, Scalar};
use drazin_krylov::oracle::inverse;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `A = S diag(C, N) S^{-1}` with a nonsingular core `C`, a nilpotent `N`
/// made of Jordan blocks at zero and a well-conditioned `S`.
pub struct Planted {
    pub a: DenseMatrix,
    pub index: usize,
    /// `S diag(C^{-1}, 0) S^{-1}`.
    pub drazin: DenseMatrix,
    pub b: DenseVector,
}

fn real(v: f64) -> Scalar {
    Scalar::new(v, 0.0)
}

/// `n` in `4..=max_n`; nilpotent part of 1 to 3 Jordan blocks of size at
/// most `max_block`; core eigenvalue magnitudes in `[0.5, 2]`.
pub fn planted(seed: u64, max_n: usize, max_block: usize) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_n);
    let mut blocks = Vec::new();
    let mut nil = 0;
    for _ in 0..rng.gen_range(1..=3) {
        let size = rng.gen_range(1..=max_block);
        if nil + size >= n {
            break;
        }
        blocks.push(size);
        nil += size;
    }
    if blocks.is_empty() {
        blocks.push(1);
        nil = 1;
    }
    let r = n - nil;
    let index = *blocks.iter().max().unwrap();

    let mut core = DenseMatrix::zeros(r, r);
    for i in 0..r {
        let mag = rng.gen_range(0.5..2.0);
        core[(i, i)] = real(if rng.gen_bool(0.5) { mag } else { -mag });
        for j in i + 1..r {
            core[(i, j)] = real(0.3 * rng.gen_range(-1.0..1.0));
        }
    }
    let mut block = DenseMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..r {
            block[(i, j)] = core[(i, j)];
        }
    }
    let mut start = r;
    for size in &blocks {
        for t in 0..size - 1 {
            block[(start + t, start + t + 1)] = real(1.0);
        }
        start += size;
    }
    let s = DenseMatrix::from_fn(n, n, |i, j| {
        real(if i == j { 1.0 } else { 0.0 } + 0.1 * rng.gen_range(-1.0..1.0))
    });
    let s_inv = inverse(&s).unwrap();
    let core_inv = inverse(&core).unwrap();
    let a = s.matmul(&block).unwrap().matmul(&s_inv).unwrap();
    let drazin = s.matmul(&core_inv.resized(n, n)).unwrap().matmul(&s_inv).unwrap();
    let b = DenseVector::from_real(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
    Planted { a, index, drazin, b }
}

pub fn relative_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    x.sub(y).unwrap().frobenius_norm() / y.frobenius_norm().max(f64::MIN_POSITIVE)
}
