//! Grids, complex fields, potentials and spectral operators.

mod grid;
mod operators;
mod potentials;
mod validate;
mod values;

pub use grid::Grid2D;
pub use operators::{
    apply_one_body, convolve, convolve_real, fourier_weights, scaled_interaction, OneBodyOperator,
    ScaledInteraction,
};
pub use potentials::{
    bessel_j, InteractionForm, InteractionSpec, PotentialKind, PotentialSpec, RepulsivePart,
    VectorPotentialSpec,
};
pub use validate::{validate_config, Check, ValidationReport};
pub use validate::{A_BOUNDED, RESOLUTION, TRAPPING, W_INTEGRABLE, W_SYMMETRIC};
pub use values::Field;
