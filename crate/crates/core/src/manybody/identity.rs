use nalgebra::DMatrix;

use super::ground::ManyBodyResult;
use super::rdm::Rdm;
use super::tensor::TwoBodyTensor;
use crate::error::{Error, Result};
use crate::C64;

/// `H₂ = h₁ + h₂ + w_N(x₁ - x₂)` on the full pair space, rows `i·d + j`.
pub fn pair_hamiltonian(energies: &[f64], w: &TwoBodyTensor) -> DMatrix<C64> {
    let d = energies.len();
    DMatrix::from_fn(d * d, d * d, |a, b| {
        let (i, j, k, l) = (a / d, a % d, b / d, b % d);
        let mut v = w.get(i, j, k, l);
        if a == b {
            v += energies[i] + energies[j];
        }
        v
    })
}

/// `½ tr(H₂ γ⁽²⁾)`.
pub fn pair_energy(rdm2: &Rdm, energies: &[f64], w: &TwoBodyTensor) -> Result<f64> {
    if rdm2.k() != 2 || rdm2.modes() != energies.len() || w.dim() != energies.len() {
        return Err(Error::InvalidParameter("expected a two-body RDM matching the basis".into()));
    }
    let h = pair_hamiltonian(energies, w);
    Ok(0.5 * (h * rdm2.full()).trace().re)
}

/// `|e_N - ½ tr(H₂ γ⁽²⁾)|` for an unperturbed ground state.
pub fn energy_identity_check(result: &ManyBodyResult, rdm2: &Rdm, energies: &[f64], w: &TwoBodyTensor) -> Result<f64> {
    if result.eps != 0.0 {
        return Err(Error::Precondition("the pair-energy identity needs an unperturbed assembly".into()));
    }
    Ok((result.per_particle - pair_energy(rdm2, energies, w)?).abs())
}
