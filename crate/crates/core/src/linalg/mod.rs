//! Dense complex linear algebra: arithmetic, inversion, general
//! eigendecomposition and matrix exponentials.

mod eig;
mod expm;
mod hermitian;
mod lu;
mod matrix;

pub use eig::{eig, spectral_exp, spectral_order, EigOptions, SpectralDecomposition};
pub use expm::expm;
pub use hermitian::{hermitian_eigenvalues, spectral_norm};
pub use lu::{inverse, Lu};
pub use matrix::{dot, vec_norm, ComplexMatrix};
