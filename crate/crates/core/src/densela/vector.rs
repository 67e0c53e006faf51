use std::ops::{Index, IndexMut};

use super::{LinalgError, Scalar};

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    data: Vec<Scalar>,
}

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Scalar::new(0.0, 0.0); dim],
        }
    }

    /// Wraps `data`, rejecting empty input and non-finite components.
    pub fn new(data: Vec<Scalar>) -> Result<Self, LinalgError> {
        if data.is_empty() {
            return Err(LinalgError::Empty);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { data })
    }

    /// Promotes a real vector to complex storage.
    pub fn from_real(values: &[f64]) -> Self {
        Self {
            data: values.iter().map(|&v| Scalar::new(v, 0.0)).collect(),
        }
    }

    pub fn from_vec_unchecked(data: Vec<Scalar>) -> Self {
        Self { data }
    }

    /// The `i`-th coordinate axis in dimension `dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = Scalar::new(1.0, 0.0);
        v
    }

    pub fn ones(dim: usize) -> Self {
        Self {
            data: vec![Scalar::new(1.0, 0.0); dim],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Scalar] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Scalar> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.data.iter()
    }

    /// Inner product `<self, other> = sum conj(self_i) * other_i`.
    pub fn dot(&self, other: &DenseVector) -> Scalar {
        debug_assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(&other.data)
            .fold(Scalar::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Euclidean norm, computed with scaling to avoid overflow.
    pub fn norm(&self) -> f64 {
        let scale = self.data.iter().fold(0.0_f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .data
            .iter()
            .map(|z| {
                let (re, im) = (z.re / scale, z.im / scale);
                re * re + im * im
            })
            .sum();
        scale * sum.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: Scalar, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, xi) in self.data.iter_mut().zip(&x.data) {
            *s += alpha * xi;
        }
    }

    pub fn scale(&mut self, alpha: Scalar) {
        for s in &mut self.data {
            *s *= alpha;
        }
    }

    pub fn scaled(&self, alpha: Scalar) -> DenseVector {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

impl Index<usize> for DenseVector {
    type Output = Scalar;
    #[inline]
    fn index(&self, i: usize) -> &Scalar {
        &self.data[i]
    }
}

impl IndexMut<usize> for DenseVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.data[i]
    }
}

impl From<Vec<Scalar>> for DenseVector {
    fn from(data: Vec<Scalar>) -> Self {
        Self { data }
    }
}
