use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::torus::FrequencySet;

/// Frequencies paired with their amplitudes, `y_j = Σ_k a_k e^{i j x_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub x: FrequencySet,
    pub a: Vec<C64>,
}

impl SpectralParams {
    /// `a[k]` pairs with the k-th point of `x` in increasing order.
    pub fn new(x: FrequencySet, a: Vec<C64>) -> Result<Self> {
        if x.len() != a.len() {
            return Err(invalid(format!(
                "{} frequencies but {} amplitudes",
                x.len(),
                a.len()
            )));
        }
        Ok(Self { x, a })
    }

    /// Builds from unsorted `(frequency, amplitude)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, C64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, C64)> = pairs
            .into_iter()
            .map(|(f, a)| (crate::torus::canonicalize(f), a))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let x = FrequencySet::new(pairs.iter().map(|p| p.0))?;
        Self::new(x, pairs.into_iter().map(|p| p.1).collect())
    }

    pub fn rank(&self) -> usize {
        self.x.len()
    }

    /// Membership in `P(h, r)`: separation at least `h`, exactly `r` terms,
    /// and every amplitude modulus within `[1, 10]`.
    pub fn in_class(&self, h: f64, r: usize) -> bool {
        self.rank() == r
            && self.x.min_separation() >= h
            && self.a.iter().all(|a| (1.0..=10.0).contains(&a.norm()))
    }
}
