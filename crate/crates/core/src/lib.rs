//! Numerical laboratory for two-dimensional attractive Bose gases.
//!
//! The crate is split into four layers:
//!
//! * [`field`]: periodic grids, complex fields, spectral derivatives, trap and
//!   interaction potentials, and the standing-assumption checks.
//! * [`nls`]: the nonlinear Schrödinger energy, its minimization, the
//!   Gagliardo–Nirenberg constant `a*`, the Hartree functional and real-time
//!   propagation.
//! * [`manybody`]: second-quantized exact diagonalization of the scaled
//!   `N`-boson Hamiltonian in a truncated one-body eigenbasis, reduced density
//!   matrices and Krylov time evolution.
//! * [`lemmas`]: quantitative diagnostics of the stability mechanism
//!   (localization defect, moment bounds, plane-wave norms, de Finetti
//!   fitting, the bootstrap exponent recursion).

pub mod error;
pub mod field;
pub mod lemmas;
pub mod linalg;
pub mod manybody;
pub mod nls;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
