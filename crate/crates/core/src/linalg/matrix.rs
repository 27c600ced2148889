use std::ops::{Index, IndexMut};

use faer::Mat;

use crate::error::{invalid, Result};

pub type C64 = num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |j, k| if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for k in 0..cols {
                data.push(f(j, k));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major entries, checking the length and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |j, k| if j == k { values[j] } else { C64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[C64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.rows).map(|j| self[(j, k)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)])
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_faer(&(self.to_faer() * rhs.to_faer())))
    }

    /// `self* · rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(invalid(format!(
                "cannot form A*B for A {}x{}, B {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let a = self.to_faer();
        Ok(Self::from_faer(&(a.adjoint() * rhs.to_faer())))
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(super::singular_values(self)?.first().copied().unwrap_or(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |j, k| self.data[j * self.cols + k])
    }

    pub fn from_faer(m: &Mat<C64>) -> Self {
        Self::from_faer_ref(m.as_ref())
    }

    pub(crate) fn from_faer_ref(m: faer::MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |j, k| m[(j, k)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        debug_assert!(j < self.rows && k < self.cols);
        &self.data[j * self.cols + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        debug_assert!(j < self.rows && k < self.cols);
        &mut self.data[j * self.cols + k]
    }
}
