use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{invalid, Result};
use crate::params::SpectralParams;
use crate::torus::FrequencySet;

/// `n × n` Toeplitz matrix `T_{j,k} = t_{j-k}` stored by its generating sequence
/// `t_{-n+1}, …, t_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzMatrix {
    n: usize,
    gen: Vec<C64>,
}

impl ToeplitzMatrix {
    pub fn new(n: usize, gen: Vec<C64>) -> Result<Self> {
        if n == 0 || gen.len() != 2 * n - 1 {
            return Err(invalid(format!(
                "Toeplitz generator for n = {n} needs {} entries, got {}",
                (2 * n).saturating_sub(1),
                gen.len()
            )));
        }
        Ok(Self { n, gen })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, gen: vec![C64::new(0.0, 0.0); 2 * n - 1] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The generating sequence, `t_{-n+1}` first.
    pub fn generator(&self) -> &[C64] {
        &self.gen
    }

    /// `t_d` for `-n < d < n`.
    #[inline]
    pub fn coeff(&self, d: isize) -> C64 {
        self.gen[(d + self.n as isize - 1) as usize]
    }

    #[inline]
    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.gen[j + self.n - 1 - k]
    }

    pub fn dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |j, k| self.entry(j, k))
    }

    /// Frobenius norm straight from the generator: `Σ_d (n - |d|) |t_d|²`.
    pub fn fro_norm(&self) -> f64 {
        let n = self.n as isize;
        (-(n - 1)..n)
            .map(|d| (n - d.abs()) as f64 * self.coeff(d).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, rhs: &ToeplitzMatrix) -> Result<ToeplitzMatrix> {
        if self.n != rhs.n {
            return Err(invalid(format!("Toeplitz sizes differ: {} vs {}", self.n, rhs.n)));
        }
        let gen = self.gen.iter().zip(&rhs.gen).map(|(a, b)| a - b).collect();
        Ok(Self { n: self.n, gen })
    }

    pub fn add(&self, rhs: &ToeplitzMatrix) -> Result<ToeplitzMatrix> {
        if self.n != rhs.n {
            return Err(invalid(format!("Toeplitz sizes differ: {} vs {}", self.n, rhs.n)));
        }
        let gen = self.gen.iter().zip(&rhs.gen).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, gen })
    }
}

/// `n × n` Hankel matrix `H_{j,k} = h_{j+k}` stored by `h_0, …, h_{2n-2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelMatrix {
    n: usize,
    gen: Vec<C64>,
}

impl HankelMatrix {
    pub fn new(n: usize, gen: Vec<C64>) -> Result<Self> {
        if n == 0 || gen.len() != 2 * n - 1 {
            return Err(invalid(format!(
                "Hankel generator for n = {n} needs {} entries, got {}",
                (2 * n).saturating_sub(1),
                gen.len()
            )));
        }
        Ok(Self { n, gen })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &[C64] {
        &self.gen
    }

    #[inline]
    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.gen[j + k]
    }

    pub fn dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |j, k| self.entry(j, k))
    }

    /// `Σ_s min(s+1, 2n-1-s) |h_s|²`, square-rooted.
    pub fn fro_norm(&self) -> f64 {
        let len = self.gen.len();
        self.gen
            .iter()
            .enumerate()
            .map(|(s, h)| (s + 1).min(len - s) as f64 * h.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `Φ(n, x)` with `Φ_{j,k} = e^{i j x_k}`, rows `j = 0..n`, columns in the order of `x`.
pub fn fourier_matrix(n: usize, x: &FrequencySet) -> ComplexMatrix {
    fourier_matrix_from(n, &x.values())
}

pub(crate) fn fourier_matrix_from(n: usize, x: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, x.len(), |j, k| C64::from_polar(1.0, j as f64 * x[k]))
}

/// Sum of exponentials `Σ_k a_k e^{i d x_k}` for each `d` in `range`.
pub(crate) fn exponential_sum(
    x: &[f64],
    a: &[C64],
    range: impl Iterator<Item = isize>,
) -> Vec<C64> {
    range
        .map(|d| {
            x.iter()
                .zip(a)
                .map(|(&xk, &ak)| ak * C64::from_polar(1.0, d as f64 * xk))
                .sum()
        })
        .collect()
}

/// `Φ(n,x) diag(a) Φ(n,x)*` as a generating sequence, `t_d = Σ_k a_k e^{i d x_k}`.
pub fn toeplitz_from_params(n: usize, p: &SpectralParams) -> ToeplitzMatrix {
    let ni = n as isize;
    let gen = exponential_sum(&p.x.values(), &p.a, -(ni - 1)..ni);
    ToeplitzMatrix { n, gen }
}

/// `Φ(n,x) diag(a) Φ(n,x)^T` as a generating sequence, `h_s = Σ_k a_k e^{i s x_k}`.
pub fn hankel_from_params(n: usize, p: &SpectralParams) -> Result<HankelMatrix> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    HankelMatrix::new(n, exponential_sum(&p.x.values(), &p.a, 0..(2 * n as isize - 1)))
}

/// `T(y)_{j,k} = y_{j-k}` for a sequence `y_{-n+1}, …, y_{n-1}` of odd length `2n - 1`.
pub fn toeplitz_lift(y: &[C64]) -> Result<ToeplitzMatrix> {
    if y.is_empty() || y.len().is_multiple_of(2) {
        return Err(invalid(format!(
            "Toeplitz lift needs an odd-length sequence, got length {}",
            y.len()
        )));
    }
    ToeplitzMatrix::new(y.len().div_ceil(2), y.to_vec())
}

/// `m × (n - m + 1)` Hankel matrix `H(u)_{j,k} = u_{j+k}` with `m = ⌈n/2⌉`.
pub fn hankel_lift(u: &[C64]) -> Result<ComplexMatrix> {
    let n = u.len();
    if n < 2 {
        return Err(invalid(format!("Hankel lift needs length >= 2, got {n}")));
    }
    let m = n.div_ceil(2);
    Ok(ComplexMatrix::from_fn(m, n - m + 1, |j, k| u[j + k]))
}

/// `M · J`, where `J` reverses the order of the columns.
pub fn reverse_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let c = m.cols();
    ComplexMatrix::from_fn(m.rows(), c, |j, k| m[(j, c - 1 - k)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fourier_examples() {
        let f = fourier_matrix(2, &FrequencySet::new([0.0]).unwrap());
        assert_eq!(f.column(0), vec![c(1.0), c(1.0)]);
        let f = fourier_matrix(4, &FrequencySet::new([0.0, PI]).unwrap());
        assert_eq!(f.column(0), vec![c(1.0); 4]);
        let alt = f.column(1);
        for (j, z) in alt.iter().enumerate() {
            let want = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((z - c(want)).norm() < 1e-15);
        }
    }

    #[test]
    fn toeplitz_from_params_examples() {
        let p = SpectralParams::from_pairs([(0.0, c(1.0))]).unwrap();
        let t = toeplitz_from_params(3, &p).dense();
        assert!(t.sub(&ComplexMatrix::from_fn(3, 3, |_, _| c(1.0))).unwrap().fro_norm() < 1e-15);
        let p = SpectralParams::from_pairs([(PI, c(1.0))]).unwrap();
        let t = toeplitz_from_params(2, &p).dense();
        let want = ComplexMatrix::from_fn(2, 2, |j, k| if j == k { c(1.0) } else { c(-1.0) });
        assert!(t.sub(&want).unwrap().fro_norm() < 1e-15);
    }

    #[test]
    fn toeplitz_lift_examples() {
        let t = toeplitz_lift(&[c(0.0), c(1.0), c(0.0)]).unwrap();
        assert_eq!(t.dense(), ComplexMatrix::identity(2));
        assert!(toeplitz_lift(&[c(1.0), c(2.0)]).is_err());
        assert!(toeplitz_lift(&[]).is_err());
        let y: Vec<C64> = (0..5).map(|d| C64::new(d as f64, -(d as f64))).collect();
        let t = toeplitz_lift(&y).unwrap();
        // y is indexed y_{-2}..y_{2}; entry (2,0) is y_2, the last element
        assert_eq!(t.entry(2, 0), y[4]);
        assert_eq!(t.entry(0, 2), y[0]);
    }

    #[test]
    fn hankel_lift_examples() {
        let u: Vec<C64> = (0..5).map(|k| c(k as f64)).collect();
        let h = hankel_lift(&u).unwrap();
        assert_eq!((h.rows(), h.cols()), (3, 3));
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(h[(j, k)], u[j + k]);
            }
        }
        let h = hankel_lift(&[c(1.0); 5]).unwrap();
        assert!(h.as_slice().iter().all(|&z| z == c(1.0)));
        let h = hankel_lift(&[c(1.0); 6]).unwrap();
        assert_eq!((h.rows(), h.cols()), (3, 4));
        assert!(hankel_lift(&[c(1.0)]).is_err());
    }

    #[test]
    fn reverse_columns_examples() {
        let j = reverse_columns(&ComplexMatrix::identity(2));
        assert_eq!(j[(0, 1)], c(1.0));
        assert_eq!(j[(0, 0)], c(0.0));
        let m = ComplexMatrix::from_fn(3, 4, |j, k| C64::new(j as f64, k as f64));
        assert_eq!(reverse_columns(&reverse_columns(&m)), m);
    }

    #[test]
    fn generator_norms_match_dense() {
        let gen: Vec<C64> = (0..9).map(|d| C64::new(d as f64 - 3.0, 0.5 * d as f64)).collect();
        let t = ToeplitzMatrix::new(5, gen.clone()).unwrap();
        assert!((t.fro_norm() - t.dense().fro_norm()).abs() < 1e-12);
        let h = HankelMatrix::new(5, gen).unwrap();
        assert!((h.fro_norm() - h.dense().fro_norm()).abs() < 1e-12);
        assert!(ToeplitzMatrix::new(5, vec![c(0.0); 8]).is_err());
    }
}
