//! The Gradient-MUSIC Toeplitz/Hankel estimator and Fourier subspace estimator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    fourier_matrix, hankel_lift, left_svd, least_squares_inverse_apply, orthonormal_range,
    reverse_columns, structured::exponential_sum, toeplitz_from_params, ComplexMatrix,
    HankelMatrix, OrthonormalBasis, ToeplitzMatrix, C64,
};
use crate::music::{detect_rank, estimate_frequencies, GradientMusicConfig, DEFAULT_RANK_THETA};
use crate::params::SpectralParams;
use crate::torus::FrequencySet;

/// How the model order `r` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RankChoice {
    Fixed(usize),
    /// Count singular values at least `theta · scale`, where the scale is `n`
    /// for a Toeplitz input and `n/2` for the Hankel lift of a signal.
    Auto { theta: f64 },
}

impl RankChoice {
    pub fn auto() -> Self {
        RankChoice::Auto { theta: DEFAULT_RANK_THETA }
    }

    fn resolve(self, sigma: &[f64], scale: f64) -> Result<usize> {
        match self {
            RankChoice::Fixed(0) => Err(invalid("rank must be >= 1")),
            RankChoice::Fixed(r) => Ok(r),
            RankChoice::Auto { theta } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(invalid(format!("rank threshold must lie in (0, 1), got {theta}")));
                }
                match detect_rank(sigma, scale, theta) {
                    0 => Err(Error::NoSignal),
                    r => Ok(r),
                }
            }
        }
    }
}

/// Output of [`toeplitz_estimate`]: `T̂ = Φ(n,x̂) diag(â) Φ(n,x̂)*`.
#[derive(Debug, Clone)]
pub struct ToeplitzEstimate {
    pub x_hat: FrequencySet,
    pub a_hat: Vec<C64>,
    pub t_hat: ToeplitzMatrix,
    pub rank: usize,
    /// Singular values of the observed matrix.
    pub input_singular_values: Vec<f64>,
    /// Notes about inputs outside the regime where the error bounds are proven.
    pub warnings: Vec<String>,
}

/// Output of [`hankel_estimate`]: `Ĥ = Φ(n,x̂) diag(â) Φ(n,x̂)^T`.
#[derive(Debug, Clone)]
pub struct HankelEstimate {
    pub x_hat: FrequencySet,
    pub a_hat: Vec<C64>,
    pub h_hat: HankelMatrix,
    pub rank: usize,
    pub input_singular_values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Output of [`fourier_subspace_estimate`]: `Û = range(Φ(n, x̂))`.
#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    pub x_hat: FrequencySet,
    pub u_hat: OrthonormalBasis,
    pub rank: usize,
    pub warnings: Vec<String>,
}

/// `â = diag(Φ̂⁺ M (Φ̂⁺)*)` with `Φ̂ = Φ(n, x̂)`.
pub fn recover_amplitudes(m: &ComplexMatrix, x_hat: &FrequencySet) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let phi = fourier_matrix(n, x_hat);
    let pinv = least_squares_inverse_apply(&phi, &ComplexMatrix::identity(n))?;
    let left = pinv.matmul(m)?;
    Ok((0..x_hat.len())
        .map(|k| {
            left.row(k)
                .iter()
                .zip(pinv.row(k))
                .map(|(l, p)| l * p.conj())
                .sum()
        })
        .collect())
}

struct Pipeline {
    x_hat: FrequencySet,
    a_hat: Vec<C64>,
    rank: usize,
    sigma: Vec<f64>,
    warnings: Vec<String>,
}

fn toeplitz_pipeline(m: &ComplexMatrix, rank: RankChoice, cfg: &GradientMusicConfig) -> Result<Pipeline> {
    if !m.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let (u, sigma) = left_svd(m)?;
    let r = rank.resolve(&sigma, n as f64)?;
    if r >= n {
        return Err(invalid(format!("rank {r} must be below the dimension {n}")));
    }
    let mut warnings = Vec::new();
    if n < 100 {
        warnings.push(format!("n = {n} < 100: error bounds are not guaranteed"));
    }
    let x_hat = frequencies_from(&u, r, cfg)?;
    let sep = x_hat.min_separation();
    if r > 1 && sep < 8.0 * PI / n as f64 {
        warnings.push(format!(
            "estimated separation {sep:.3e} < 8π/n: outside the well-separated regime"
        ));
    }
    let a_hat = recover_amplitudes(m, &x_hat)?;
    Ok(Pipeline { x_hat, a_hat, rank: r, sigma, warnings })
}

/// MUSIC on the span of the first `r` columns of `u`.
fn frequencies_from(u: &ComplexMatrix, r: usize, cfg: &GradientMusicConfig) -> Result<FrequencySet> {
    let w = ComplexMatrix::from_fn(u.rows(), r, |j, k| u[(j, k)]);
    estimate_frequencies(&OrthonormalBasis::from_trusted(w), cfg)
}

/// Rank-`r` Toeplitz approximation of `M ≈ T + E`.
pub fn toeplitz_estimate(
    m: &ComplexMatrix,
    rank: RankChoice,
    cfg: &GradientMusicConfig,
) -> Result<ToeplitzEstimate> {
    let p = toeplitz_pipeline(m, rank, cfg)?;
    let params = SpectralParams::new(p.x_hat, p.a_hat)?;
    let t_hat = toeplitz_from_params(m.rows(), &params);
    Ok(ToeplitzEstimate {
        x_hat: params.x,
        a_hat: params.a,
        t_hat,
        rank: p.rank,
        input_singular_values: p.sigma,
        warnings: p.warnings,
    })
}

/// Rank-`r` Hankel approximation: the Toeplitz pipeline applied to `M·J`.
pub fn hankel_estimate(
    m: &ComplexMatrix,
    rank: RankChoice,
    cfg: &GradientMusicConfig,
) -> Result<HankelEstimate> {
    let n = m.rows();
    let p = toeplitz_pipeline(&reverse_columns(m), rank, cfg)?;
    // T̂ J = Φ diag(â) Φ* J = Φ diag(â e^{-i(n-1)x̂}) Φ^T
    let x = p.x_hat.values();
    let a_hat: Vec<C64> = p
        .a_hat
        .iter()
        .zip(&x)
        .map(|(a, &xk)| a * C64::from_polar(1.0, -((n - 1) as f64) * xk))
        .collect();
    let gen = exponential_sum(&x, &a_hat, 0..(2 * n as isize - 1));
    Ok(HankelEstimate {
        x_hat: p.x_hat,
        a_hat,
        h_hat: HankelMatrix::new(n, gen)?,
        rank: p.rank,
        input_singular_values: p.sigma,
        warnings: p.warnings,
    })
}

/// Fourier subspace estimate from one noisy signal `y = Φ(n,x) a + z`.
pub fn fourier_subspace_estimate(
    y: &[C64],
    rank: RankChoice,
    cfg: &GradientMusicConfig,
) -> Result<SubspaceEstimate> {
    let n = y.len();
    let lifted = hankel_lift(y)?;
    let m = lifted.rows();
    let (u, sigma) = left_svd(&lifted)?;
    let r = rank.resolve(&sigma, n as f64 / 2.0)?;
    if n < 2 * r {
        return Err(Error::Identifiability { n, r });
    }
    if r >= m {
        return Err(Error::EstimationFailure(format!(
            "rank {r} fills the whole {m}-dimensional lifted column space"
        )));
    }
    let mut warnings = Vec::new();
    if n < 200 {
        warnings.push(format!("n = {n} < 200: error bounds are not guaranteed"));
    }
    let x_hat = frequencies_from(&u, r, cfg)?;
    let sep = x_hat.min_separation();
    if r > 1 && sep < 16.0 * PI / n as f64 {
        warnings.push(format!(
            "estimated separation {sep:.3e} < 16π/n: outside the well-separated regime"
        ));
    }
    let u_hat = orthonormal_range(&fourier_matrix(n, &x_hat))?;
    Ok(SubspaceEstimate { x_hat, u_hat, rank: r, warnings })
}
