//! Dense helpers and iterative eigen/exponential solvers.

mod dense;
mod krylov;
mod lanczos;
mod lobpcg;
mod ode;

pub use dense::{
    axpy, dot, hermitian_eigen, hermitian_eigenvalues, hermitian_norm, is_hermitian, norm, scale,
    symmetric_eigen, trace_norm,
};
pub use krylov::{expm_apply, KrylovStats};
pub use lanczos::{lanczos_lowest, random_unit_vector, LanczosOptions, LanczosResult, LinearOperator};
pub use lobpcg::{lobpcg, orthonormalize, BlockEigenOptions, BlockEigenResult};
pub use ode::{dopri45, OdeStats};
