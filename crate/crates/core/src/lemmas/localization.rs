use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manybody::{pair_hamiltonian, ManyBodyResult, Rdm, TwoBodyTensor};
use crate::C64;

/// `tr(h γ⁽¹⁾)`.
pub fn first_moment(rdm1: &Rdm, energies: &[f64]) -> f64 {
    energies.iter().enumerate().map(|(i, e)| e * rdm1.matrix()[(i, i)].re).sum()
}

/// `tr(h⊗h γ⁽²⁾)`.
pub fn second_moment(rdm2: &Rdm, energies: &[f64]) -> f64 {
    let d = energies.len();
    let f = rdm2.full();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let p = i * d + j;
            s += energies[i] * energies[j] * f[(p, p)].re;
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    /// `tr((H₂ - P⊗P H₂ P⊗P) γ⁽²⁾)`.
    pub lhs: f64,
    pub delta: f64,
    /// `Λ`, the highest kept one-body energy.
    pub cutoff: f64,
    pub small_modes: usize,
    pub big_modes: usize,
    pub first_moment: f64,
    pub second_moment: f64,
    /// `Λ^{(δ-1)/2} (first)^{(1-δ)/2} (second)^δ`.
    pub shape: f64,
    /// Smallest `C_δ` with `lhs ≥ -C_δ · shape`.
    pub fitted_c: f64,
    pub pass: bool,
}

/// Localization defect of a two-body RDM given in `energies.len()` modes
/// when the pair Hamiltonian is compressed to the first `small` modes.
pub fn localization_defect(
    rdm2: &Rdm,
    energies: &[f64],
    w: &TwoBodyTensor,
    small: usize,
    delta: f64,
) -> Result<LocalizationReport> {
    let big = energies.len();
    if rdm2.k() != 2 || rdm2.modes() != big || w.dim() != big {
        return Err(Error::InvalidParameter("two-body RDM, energies and tensor disagree in size".into()));
    }
    if small == 0 || small >= big {
        return Err(Error::InvalidParameter(format!(
            "sub-basis of {small} modes must be nonempty and smaller than {big}"
        )));
    }
    if !(delta > 0.5 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("δ = {delta} outside (1/2, 1]")));
    }
    let h2 = pair_hamiltonian(energies, w);
    let f = rdm2.full();
    let keep = |p: usize| p / big < small && p % big < small;
    let compressed = DMatrix::from_fn(big * big, big * big, |a, b| {
        if keep(a) && keep(b) {
            h2[(a, b)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let lhs = ((&h2 - compressed) * &f).trace().re;
    let cutoff = energies[small - 1];
    let reduced = rdm2.partial_trace();
    let first: f64 = energies.iter().enumerate().map(|(i, e)| e * reduced[(i, i)].re).sum();
    let second = second_moment(rdm2, energies);
    let shape = cutoff.powf((delta - 1.0) / 2.0) * first.max(0.0).powf((1.0 - delta) / 2.0) * second.max(0.0).powf(delta);
    let fitted_c = if lhs >= 0.0 || shape == 0.0 { 0.0 } else { -lhs / shape };
    Ok(LocalizationReport {
        lhs,
        delta,
        cutoff,
        small_modes: small,
        big_modes: big,
        first_moment: first,
        second_moment: second,
        shape,
        fitted_c,
        pass: lhs >= -fitted_c * shape - 1e-12,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub first_moment: f64,
    pub second_moment: f64,
    pub eps: f64,
    /// Ground energy per particle of the perturbed assembly.
    pub perturbed_energy: f64,
    /// `(1 + |e_{N,ε}|)/ε`.
    pub first_bound: f64,
    /// `((1 + |e_{N,ε}|)/ε)²`.
    pub second_bound: f64,
    /// Smallest `C` making both moment bounds hold.
    pub fitted_c: f64,
}

/// Moments of the unperturbed `h` in the ground state of the perturbed
/// assembly, against the `(1 + |e_{N,ε}|)/ε` bound shape.
pub fn moment_report(result: &ManyBodyResult, rdm1: &Rdm, rdm2: &Rdm, energies: &[f64]) -> Result<MomentReport> {
    let eps = result.eps;
    if !(eps > 0.0) {
        return Err(Error::Precondition("moment bounds need a perturbation ε > 0".into()));
    }
    if rdm1.k() != 1 || rdm2.k() != 2 || rdm1.modes() != energies.len() || rdm2.modes() != energies.len() {
        return Err(Error::InvalidParameter("RDMs and energies disagree in size".into()));
    }
    let first = first_moment(rdm1, energies);
    let second = second_moment(rdm2, energies);
    let first_bound = (1.0 + result.per_particle.abs()) / eps;
    let second_bound = first_bound * first_bound;
    Ok(MomentReport {
        first_moment: first,
        second_moment: second,
        eps,
        perturbed_energy: result.per_particle,
        first_bound,
        second_bound,
        fitted_c: (first / first_bound).max(second / second_bound),
    })
}
