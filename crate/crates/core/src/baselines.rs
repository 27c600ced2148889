//! Alternating projection between rank-`r` matrices and Toeplitz matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{truncated_svd, ComplexMatrix, ToeplitzMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltProjConfig {
    pub max_iters: usize,
    /// Stop when consecutive iterates differ by less than this fraction of `‖M‖_F`.
    pub stall_rel_tol: f64,
}

impl Default for AltProjConfig {
    fn default() -> Self {
        Self { max_iters: 50, stall_rel_tol: 1e-4 }
    }
}

impl AltProjConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if !(self.stall_rel_tol > 0.0) {
            return Err(invalid("stall_rel_tol must be positive"));
        }
        Ok(())
    }
}

/// Frobenius-nearest Toeplitz matrix: each diagonal replaced by its mean.
pub fn project_toeplitz(m: &ComplexMatrix) -> Result<ToeplitzMatrix> {
    if !m.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    let mut sums = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for j in 0..n {
        for (k, z) in m.row(j).iter().enumerate() {
            sums[j + n - 1 - k] += z;
        }
    }
    for (idx, s) in sums.iter_mut().enumerate() {
        let d = idx as isize - (n as isize - 1);
        *s /= (n as isize - d.abs()) as f64;
    }
    ToeplitzMatrix::new(n, sums)
}

/// Best rank-`r` Frobenius approximant.
pub fn project_rank(m: &ComplexMatrix, r: usize) -> Result<ComplexMatrix> {
    Ok(truncated_svd(m, r)?.reconstruct())
}

/// Per-run diagnostics of [`alternating_projection_traced`].
#[derive(Debug, Clone)]
pub struct AltProjTrace {
    pub result: ToeplitzMatrix,
    pub iterations: usize,
    pub stalled: bool,
    /// `‖T_k − P_r(T_k)‖_F` for each iterate the rank projection was applied to.
    pub rank_residuals: Vec<f64>,
}

/// Cadzow-style iteration `T_{k+1} = P_Toep(P_r(T_k))` from `T_0 = P_Toep(M)`.
/// The returned matrix is exactly Toeplitz but in general not of rank `r`.
pub fn alternating_projection(m: &ComplexMatrix, r: usize, cfg: &AltProjConfig) -> Result<ToeplitzMatrix> {
    Ok(alternating_projection_traced(m, r, cfg)?.result)
}

pub fn alternating_projection_traced(
    m: &ComplexMatrix,
    r: usize,
    cfg: &AltProjConfig,
) -> Result<AltProjTrace> {
    cfg.validate()?;
    let threshold = cfg.stall_rel_tol * m.fro_norm();
    let mut current = project_toeplitz(m)?;
    let mut rank_residuals = Vec::with_capacity(cfg.max_iters);
    let mut iterations = 0;
    let mut stalled = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        let dense = current.dense();
        let low_rank = project_rank(&dense, r)?;
        rank_residuals.push(dense.sub(&low_rank)?.fro_norm());
        let next = project_toeplitz(&low_rank)?;
        let moved = next.sub(&current)?.fro_norm();
        current = next;
        if moved < threshold {
            stalled = true;
            break;
        }
    }
    Ok(AltProjTrace { result: current, iterations, stalled, rank_residuals })
}
