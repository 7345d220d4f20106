//! Second-quantized scaled Hamiltonian in a truncated one-body eigenbasis:
//! mode bases, Fock spaces, two-body tensors, ground states, reduced density
//! matrices and dynamics.

mod basis;
mod condensate;
mod dynamics;
mod fock;
mod ground;
mod hamiltonian;
pub mod io;
mod rdm;
mod tensor;
mod identity;

pub use basis::{Gauge, ModeBasis, ModeBasisOptions, ModeSelection};
pub(crate) use basis::hermite_functions;
pub use condensate::{
    best_product_state, condensate_overlap, mean_field_gradient, overlap_from_coefficients, product_energy,
    product_state, BestProduct, CondensateOverlap, DEFECT_WARNING,
};
pub use dynamics::{
    distance_to_pure, evolve, evolve_mean_field, EvolveOptions, ManyBodyTrajectory, MeanFieldTrajectory,
};
pub use fock::{binomial, FockBasis};
pub use ground::{ground_state, ManyBodyResult, ManyBodySummary, DEGENERACY_GAP};
pub use hamiltonian::{assemble_from_energies, assemble_hamiltonian, SparseHamiltonian};
pub use identity::{energy_identity_check, pair_energy, pair_hamiltonian};
pub use rdm::{embedding, rdm, rdm1, rdm2, symmetric_pairs, Rdm};
pub use tensor::{two_body_elements, TwoBodyTensor};
