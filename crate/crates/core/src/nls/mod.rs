//! Nonlinear Schrödinger functional: ground states, the Gagliardo–Nirenberg
//! constant, real-time dynamics and the Hartree functional.

mod gn;
mod hartree;
mod minimize;
mod problem;
mod propagate;

pub use gn::{
    a_star_grid, a_star_shooting, compute_a_star, gn_quotient, profile_residual, GnComparison, GnMethod, GnResult,
};
pub use hartree::{hartree_bound_report, hartree_energy, HartreeBoundReport, OneBodyMixedState};
pub use minimize::{minimize_nls, NlsReport, NlsResult, NlsStatus};
pub use problem::{nls_energy, CollapseCriteria, Coupling, NlsProblem};
pub use propagate::{propagate_nls, NlsTrajectory, PropagateOptions, PropagationStatus};
