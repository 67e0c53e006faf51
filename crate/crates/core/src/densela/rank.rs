use super::DenseMatrix;

/// Numerical rank: the number of full-pivot Gaussian elimination pivots
/// with magnitude above `tol * ||M||_F`.
pub fn rank_of(m: &DenseMatrix, tol: f64) -> usize {
    let threshold = tol * m.frobenius_norm();
    let mut work = m.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, -1.0_f64);
        for j in rank..cols {
            for i in rank..rows {
                let v = work[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        if pv <= threshold || pv == 0.0 {
            break;
        }
        swap_rows(&mut work, rank, pi);
        swap_cols(&mut work, rank, pj);
        let pivot = work[(rank, rank)];
        for i in rank + 1..rows {
            let f = work[(i, rank)] / pivot;
            if f.norm() == 0.0 {
                continue;
            }
            for j in rank..cols {
                let t = work[(rank, j)];
                work[(i, j)] -= f * t;
            }
        }
        rank += 1;
    }
    rank
}

fn swap_rows(m: &mut DenseMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let t = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = t;
    }
}

fn swap_cols(m: &mut DenseMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_ranks() {
        assert_eq!(rank_of(&DenseMatrix::zeros(3, 3), 1e-10), 0);
        assert_eq!(rank_of(&DenseMatrix::identity(4), 1e-10), 4);
    }

    #[test]
    fn example4_has_rank_three() {
        let a = DenseMatrix::from_real_rows(&[
            [1.0, 1.0, 1.0, 2.0],
            [0.0, 1.0, 3.0, 4.0],
            [0.0, 0.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(rank_of(&a, 1e-10), 3);
    }

    #[test]
    fn rank_one_outer_product() {
        let m = DenseMatrix::from_real_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [-1.0, -2.0, -3.0]]);
        assert_eq!(rank_of(&m, 1e-10), 1);
    }
}
