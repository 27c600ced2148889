//! Dense complex matrices and the structured constructions built on them:
//! Fourier, Toeplitz and Hankel matrices, lifting operators, truncated SVD,
//! least squares, principal angles and ε-rank.

mod matrix;
pub(crate) mod structured;
mod subspace;

pub use matrix::{ComplexMatrix, C64};
pub use structured::{
    fourier_matrix, hankel_from_params, hankel_lift, reverse_columns, toeplitz_from_params, toeplitz_lift,
    HankelMatrix, ToeplitzMatrix,
};
pub use subspace::{
    eps_rank, full_svd, least_squares_inverse_apply, left_svd, orthonormal_range, sin_theta,
    singular_values, truncated_svd, FullSvd, OrthonormalBasis, SinTheta, TruncatedSvd,
};
