//! Low-rank Toeplitz/Hankel approximation and Fourier subspace estimation
//! driven by Gradient-MUSIC.
//!
//! The pipeline for a corrupted Toeplitz matrix `M = T + E` is: leading left
//! singular subspace of `M` → frequencies by minimizing the MUSIC noise-space
//! objective → amplitudes by least squares → `T̂ = Φ(n,x̂) diag(â) Φ(n,x̂)*`,
//! which is Toeplitz and has rank exactly `r` by construction. The same
//! frequency engine, fed the left singular subspace of a Hankel lift of a
//! single noisy signal, yields a Fourier subspace estimate.
//!
//! [`baselines`] holds the alternating-projection comparison method and
//! [`harness`] the instance generators, trial runner and report writers.

// `!(x > y)` checks are written that way so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cmat;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod music;
pub mod par;
pub mod params;
pub mod torus;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, OrthonormalBasis, ToeplitzMatrix, C64};
pub use par::Parallelism;
pub use params::SpectralParams;
pub use torus::{FrequencySet, TorusPoint};
