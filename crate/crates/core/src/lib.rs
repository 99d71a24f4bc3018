//! Proper inner products for non-hermitian diagonalizable Hamiltonians.
//!
//! Given `H = P·D·P⁻¹`, the metric `Q = (P†)⁻¹·P⁻¹` makes the eigenstates of
//! `H` orthonormal, makes `H` normal with respect to `⟨·|Q|·⟩`, and splits
//! `H` into Q-hermitian and anti-Q-hermitian parts. Under normalized time
//! evolution the anti-Q-hermitian part is suppressed and the state follows
//! an effective Q-hermitian Hamiltonian built from the modes with the
//! largest imaginary eigenvalue.
//!
//! Modules, bottom-up:
//! - [`linalg`]: dense complex matrices, LU, eigensolver, `expm`.
//! - [`qmetric`]: the metric, Q-adjoints, the `H_Qh + H_Qa` split.
//! - [`dynamics`]: exact and integrated normalized evolution.
//! - [`suppression`]: dominant subset, `H_eff`, convergence and the
//!   back-extrapolation experiment.
//! - [`lattice`]: 1D local Hamiltonians, density, current, continuity.
//! - [`random`]: seeded planted-spectrum instances.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod qmetric;
pub mod random;
pub mod state;
pub mod suppression;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigOptions, SpectralDecomposition};
pub use num_complex::Complex64;
pub use qmetric::{QMetric, QSplit};
pub use state::{NormalizedState, StateVector};
