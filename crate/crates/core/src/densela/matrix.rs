use std::ops::{Index, IndexMut};

use super::{DenseVector, LinalgError, Scalar};

/// Dense complex matrix stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl DenseMatrix {
    /// Zero matrix. Zero-sized shapes are allowed here for intermediate
    /// results; public ingestion goes through [`DenseMatrix::new`].
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Scalar::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from column-major `data`.
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix storage",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Real row-major literal, promoted to complex.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), ncols, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Scalar::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Stacks `columns` side by side. All must share one length.
    pub fn from_columns(columns: &[DenseVector]) -> Self {
        let rows = columns.first().map_or(0, DenseVector::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c.as_slice());
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[Scalar] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_vector(&self, j: usize) -> DenseVector {
        DenseVector::from_vec_unchecked(self.column(j).to_vec())
    }

    pub fn columns(&self) -> Vec<DenseVector> {
        (0..self.cols).map(|j| self.column_vector(j)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        DenseVector::from_vec_unchecked(self.data.clone()).norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Copy of the leading `rows x cols` block.
    pub fn leading(&self, rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows <= self.rows && cols <= self.cols);
        DenseMatrix::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    /// Copy of the block with the given row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DenseMatrix {
        let r0 = rows.start;
        let c0 = cols.start;
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)])
    }

    /// Copy with the selected columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    /// Copy padded with zeros (or truncated) to `rows x cols`.
    pub fn resized(&self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)]
            } else {
                Scalar::new(0.0, 0.0)
            }
        })
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                context: "matmul",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for p in 0..self.cols {
                let b = rhs[(p, j)];
                if b == Scalar::new(0.0, 0.0) {
                    continue;
                }
                let a_col = self.column(p);
                let o = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (oi, ai) in o.iter_mut().zip(a_col) {
                    *oi += ai * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_same_shape(rhs, "matrix subtraction")?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_same_shape(rhs, "matrix addition")?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, alpha: Scalar) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    /// Explicit power `A^p` by repeated multiplication. Test-scale helper;
    /// solvers never form powers.
    pub fn power(&self, p: usize) -> Result<DenseMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = DenseMatrix::identity(self.rows);
        for _ in 0..p {
            acc = self.matmul(&acc)?;
        }
        Ok(acc)
    }

    fn check_same_shape(&self, rhs: &DenseMatrix, context: &'static str) -> Result<(), LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                context,
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Scalar;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = DenseMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c, DenseMatrix::from_real_rows(&[[2.0, 1.0], [4.0, 3.0]]));
        assert!(a.matmul(&DenseMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn power_of_nilpotent_vanishes() {
        let n = DenseMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(n.power(2).unwrap(), DenseMatrix::zeros(2, 2));
        assert_eq!(n.power(0).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn new_validates_shape() {
        assert!(DenseMatrix::new(2, 2, vec![Scalar::new(0.0, 0.0); 3]).is_err());
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
    }
}
