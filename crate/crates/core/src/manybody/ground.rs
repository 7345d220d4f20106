use serde::Serialize;

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{lanczos_lowest, LanczosOptions, LinearOperator};
use crate::C64;

/// Gap below which the ground state is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ManyBodyResult {
    pub energy: f64,
    /// `E/N`: `e_N` for unperturbed assemblies, `e_{N,ε}` otherwise.
    pub per_particle: f64,
    pub particles: usize,
    pub eps: f64,
    pub psi: Vec<C64>,
    pub residual: f64,
    pub seed: u64,
    pub converged: bool,
    /// Distance to the next Ritz value, when one was available.
    pub gap: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManyBodySummary {
    pub energy: f64,
    pub per_particle: f64,
    pub particles: usize,
    pub eps: f64,
    pub residual: f64,
    pub seed: u64,
    pub converged: bool,
    pub degenerate: bool,
}

impl ManyBodyResult {
    pub fn summary(&self) -> ManyBodySummary {
        ManyBodySummary {
            energy: self.energy,
            per_particle: self.per_particle,
            particles: self.particles,
            eps: self.eps,
            residual: self.residual,
            seed: self.seed,
            converged: self.converged,
            degenerate: self.degenerate,
        }
    }
}

/// Lowest eigenpair by Lanczos with full reorthogonalization. The returned
/// vector has its largest component real and positive.
pub fn ground_state(op: &SparseHamiltonian, tol: f64, seed: u64) -> Result<ManyBodyResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let r = lanczos_lowest(op, &LanczosOptions { tol, seed, ..Default::default() });
    let mut psi = r.vector;
    let pivot = psi
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 * (1.0 + 1e-12) { (i, z.norm()) } else { best })
        .0;
    let phase = psi[pivot].conj() / psi[pivot].norm();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut psi {
        *z *= phase / norm;
    }
    let mut hpsi = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply(&psi, &mut hpsi);
    let energy: f64 = psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
    let residual = hpsi.iter().zip(&psi).map(|(h, p)| (h - p * energy).norm_sqr()).sum::<f64>().sqrt();
    let gap = r.next_value.map(|v| v - energy);
    Ok(ManyBodyResult {
        energy,
        per_particle: energy / op.particles() as f64,
        particles: op.particles(),
        eps: op.eps(),
        psi,
        residual,
        seed,
        converged: residual <= tol,
        gap,
        degenerate: gap.is_some_and(|g| g < DEGENERACY_GAP),
    })
}
