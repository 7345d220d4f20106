use serde::Serialize;

use super::condensate::{mean_field_gradient, product_energy};
use super::fock::FockBasis;
use super::hamiltonian::SparseHamiltonian;
use super::rdm::{rdm1, Rdm};
use super::tensor::TwoBodyTensor;
use crate::error::{Error, Result};
use crate::linalg::{dopri45, expm_apply, trace_norm, LinearOperator, OdeStats};
use crate::C64;

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub krylov_dim: usize,
    /// Per-substep Krylov error target.
    pub tol: f64,
    /// Largest Fock dimension accepted.
    pub cap: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { krylov_dim: 30, tol: 1e-12, cap: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct ManyBodyTrajectory {
    pub times: Vec<f64>,
    pub rdm1: Vec<Rdm>,
    /// `Tr|γ⁽¹⁾(t) - |u(t)⟩⟨u(t)||` against the supplied reference.
    pub distances: Option<Vec<f64>>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub final_state: Vec<C64>,
    pub substeps: usize,
    pub rejected: usize,
}

/// Trace-norm distance between a one-body RDM and `|c⟩⟨c|`.
pub fn distance_to_pure(rdm1: &Rdm, c: &[C64]) -> f64 {
    let g = rdm1.matrix();
    let d = c.len();
    let diff = nalgebra::DMatrix::from_fn(d, d, |i, j| g[(i, j)] - c[i] * c[j].conj());
    trace_norm(&diff)
}

/// `Ψ(t) = e^{-iHt}Ψ₀` on the grid `t = 0, dt, …, T` by Krylov stepping,
/// recording `γ⁽¹⁾(t)` and, if `reference` holds mode coefficients of `u(t)`
/// at the same times, the trace distance to `|u(t)⟩⟨u(t)|`.
pub fn evolve(
    psi0: &[C64],
    op: &SparseHamiltonian,
    fock: &FockBasis,
    t_final: f64,
    dt: f64,
    reference: Option<&[Vec<C64>]>,
    opts: &EvolveOptions,
) -> Result<ManyBodyTrajectory> {
    if op.dim() > opts.cap {
        return Err(Error::Capacity(format!("dimension {} exceeds the dynamics cap {}", op.dim(), opts.cap)));
    }
    if psi0.len() != op.dim() || fock.len() != op.dim() {
        return Err(Error::InvalidParameter("state, operator and Fock basis disagree in size".into()));
    }
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}, T = {t_final}")));
    }
    let steps = (t_final / dt).round() as usize;
    let dt = if steps > 0 { t_final / steps as f64 } else { dt };
    if let Some(r) = reference {
        if r.len() != steps + 1 {
            return Err(Error::InvalidParameter(format!("reference has {} states, expected {}", r.len(), steps + 1)));
        }
    }
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    let e0 = op.expectation(psi0) / norm0;
    let mut psi = psi0.to_vec();
    let mut times = vec![0.0];
    let mut rdms = vec![rdm1(&psi, fock)?];
    let mut max_norm_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    let (mut substeps, mut rejected) = (0, 0);
    for step in 1..=steps {
        let (next, stats) = expm_apply(op, &psi, dt, opts.krylov_dim, opts.tol);
        substeps += stats.substeps;
        rejected += stats.rejected;
        psi = next;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        max_norm_drift = max_norm_drift.max((norm - norm0).abs());
        max_energy_drift = max_energy_drift.max((op.expectation(&psi) / norm - e0).abs());
        times.push(step as f64 * dt);
        rdms.push(rdm1(&psi, fock)?);
    }
    let distances = reference.map(|r| rdms.iter().zip(r).map(|(g, c)| distance_to_pure(g, c)).collect());
    Ok(ManyBodyTrajectory {
        times,
        rdm1: rdms,
        distances,
        max_norm_drift,
        max_energy_drift,
        final_state: psi,
        substeps,
        rejected,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
}

/// `i ċ_i = ε_i c_i + Σ W_{ijkl} c_j* c_k c_l`: the mean-field equation of the
/// truncated Hamiltonian, integrated adaptively and sampled every `dt`.
pub fn evolve_mean_field(
    c0: &[C64],
    energies: &[f64],
    w: &TwoBodyTensor,
    t_final: f64,
    dt: f64,
) -> Result<MeanFieldTrajectory> {
    if c0.len() != energies.len() || w.dim() != energies.len() {
        return Err(Error::InvalidParameter("coefficients, energies and tensor disagree in size".into()));
    }
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}, T = {t_final}")));
    }
    let steps = (t_final / dt).round() as usize;
    let dt = if steps > 0 { t_final / steps as f64 } else { dt };
    let rhs = |_: f64, c: &[C64], out: &mut [C64]| {
        let g = mean_field_gradient(energies, w, 0.0, c);
        for (o, x) in out.iter_mut().zip(g) {
            *o = C64::new(0.0, -1.0) * x;
        }
    };
    let norm0: f64 = c0.iter().map(|z| z.norm_sqr()).sum();
    let e0 = product_energy(energies, w, 0.0, c0);
    let mut c = c0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![c.clone()];
    let mut max_norm_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    let mut stats = OdeStats::default();
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        c = dopri45(&rhs, &c, t, t + dt, 1e-13, 1e-15, &mut stats);
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        max_norm_drift = max_norm_drift.max((norm - norm0).abs());
        max_energy_drift = max_energy_drift.max((product_energy(energies, w, 0.0, &c) - e0).abs());
        times.push(step as f64 * dt);
        states.push(c.clone());
    }
    Ok(MeanFieldTrajectory { times, states, max_norm_drift, max_energy_drift })
}
