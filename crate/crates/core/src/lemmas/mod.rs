//! Quantitative checks of the stability argument: plane-wave norms in a
//! spectral subspace, the plane-wave decomposition of the interaction, the
//! localization defect, moment bounds, de Finetti fitting of two-body
//! density matrices, the bootstrap recursion on the energy exponent, and
//! the interaction tail integral.
//!
//! Existential constants are reported as the smallest value making the
//! corresponding inequality hold on the given instance.

mod bootstrap;
mod definetti;
mod fourier;
mod localization;
mod planewave;
mod tail;

pub use bootstrap::{
    bootstrap_step, bootstrap_step_with, run_bootstrap, step_exponents, BootstrapRun, BootstrapSearch,
    BootstrapState,
};
pub use definetti::{definetti_distance, fit_definetti, DeFinettiFit, DeFinettiOptions, DeFinettiSummary};
pub use fourier::{fourier_decomposition_check, reconstruct_pair, PointPair};
pub use localization::{first_moment, localization_defect, moment_report, second_moment, LocalizationReport, MomentReport};
pub use planewave::{
    plane_wave_matrix, plane_wave_norm, plane_wave_sweep, Parity, PlaneWaveOp, PlaneWaveSample, PlaneWaveSweep,
};
pub use tail::{interaction_tail_bound, TailBound};
