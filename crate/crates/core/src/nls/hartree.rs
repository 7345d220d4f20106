use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    convolve_real, Field, InteractionSpec, OneBodyOperator, PotentialSpec, ScaledInteraction,
    VectorPotentialSpec,
};

/// Positive trace-one one-body operator `Σ λ_j |φ_j⟩⟨φ_j|`.
#[derive(Clone, Debug)]
pub struct OneBodyMixedState {
    modes: Vec<Field>,
    weights: Vec<f64>,
}

impl OneBodyMixedState {
    pub fn new(modes: Vec<Field>, weights: Vec<f64>) -> Result<Self> {
        if modes.is_empty() || modes.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} modes with {} weights",
                modes.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        for (i, a) in modes.iter().enumerate() {
            a.same_grid(&modes[0])?;
            for (j, b) in modes.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = a.inner(b);
                if (g - target).norm() > 1e-8 {
                    return Err(Error::InvalidParameter(format!(
                        "modes not orthonormal: ⟨φ{i}|φ{j}⟩ = {g}"
                    )));
                }
            }
        }
        Ok(Self { modes, weights })
    }

    pub fn pure(u: &Field) -> Result<Self> {
        Self::new(vec![u.clone()], vec![1.0])
    }

    pub fn modes(&self) -> &[Field] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> Vec<f64> {
        let mut rho = vec![0.0; self.modes[0].grid().len()];
        for (m, &w) in self.modes.iter().zip(&self.weights) {
            for (r, v) in rho.iter_mut().zip(m.values()) {
                *r += w * v.norm_sqr();
            }
        }
        rho
    }
}

fn one_body_trace(gamma: &OneBodyMixedState, op: &OneBodyOperator) -> Result<f64> {
    let mut total = 0.0;
    for (m, &w) in gamma.modes.iter().zip(&gamma.weights) {
        total += w * op.expectation(m)?;
    }
    Ok(total)
}

fn interaction_energy(rho: &[f64], w: &InteractionSpec, particles: usize, beta: f64, op: &OneBodyOperator) -> Result<f64> {
    if w.is_zero() {
        return Ok(0.0);
    }
    let grid = op.grid();
    let s = ScaledInteraction::new(w, particles, beta)?;
    s.check_resolved(grid)?;
    let conv = convolve_real(grid, &s.weights(grid), rho);
    Ok(0.5 * grid.integrate(&rho.iter().zip(&conv).map(|(a, b)| a * b).collect::<Vec<_>>()))
}

/// `tr(hγ) + ½∬ρ_γ(x) N^{2β}w(N^β(x-y)) ρ_γ(y)`.
pub fn hartree_energy(
    gamma: &OneBodyMixedState,
    w: &InteractionSpec,
    particles: usize,
    beta: f64,
    v: &PotentialSpec,
    a: &VectorPotentialSpec,
) -> Result<f64> {
    let op = OneBodyOperator::new(gamma.modes[0].grid(), v, a)?;
    let rho = gamma.density();
    Ok(one_body_trace(gamma, &op)? + interaction_energy(&rho, w, particles, beta, &op)?)
}

/// The Hartree lower-bound chain
/// `E^H ≥ ∫|∇√ρ|² - ½m⁻∫ρ² ≥ (1 - m⁻/a*)∫|∇√ρ|² ≥ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct HartreeBoundReport {
    pub hartree_energy: f64,
    pub middle: f64,
    pub lower: f64,
    pub sqrt_density_kinetic: f64,
    /// `tr(hγ) - ∫|∇√ρ|²`.
    pub kinetic_margin: f64,
    pub negative_mass: f64,
    pub a_star: f64,
    /// `None` when the attraction is too strong for the chain to apply.
    pub chain_holds: Option<bool>,
    pub flag: Option<String>,
}

const CHAIN_SLACK: f64 = -1e-8;

pub fn hartree_bound_report(
    gamma: &OneBodyMixedState,
    w: &InteractionSpec,
    particles: usize,
    beta: f64,
    v: &PotentialSpec,
    a: &VectorPotentialSpec,
    a_star: f64,
) -> Result<HartreeBoundReport> {
    if !a.is_zero() {
        return Err(Error::Precondition("the Hartree bound chain requires a vanishing vector potential".into()));
    }
    let grid = gamma.modes[0].grid().clone();
    let op = OneBodyOperator::new(&grid, v, a)?;
    let rho = gamma.density();
    let trace = one_body_trace(gamma, &op)?;
    let energy = trace + interaction_energy(&rho, w, particles, beta, &op)?;
    let sqrt_rho = Field::from_values(&grid, rho.iter().map(|r| r.max(0.0).sqrt().into()).collect())?;
    let kin = sqrt_rho.kinetic();
    let trap = grid.integrate(&rho.iter().zip(op.potential()).map(|(r, v)| r * v).collect::<Vec<_>>());
    let m = w.negative_mass();
    let rho_sq = grid.integrate(&rho.iter().map(|r| r * r).collect::<Vec<_>>());
    let middle = kin - 0.5 * m * rho_sq;
    let lower = (1.0 - m / a_star) * kin;
    let (chain_holds, flag) = if m >= a_star {
        (None, Some("stability condition violated".to_string()))
    } else {
        let ok = energy - middle >= CHAIN_SLACK && middle - lower >= CHAIN_SLACK && lower >= CHAIN_SLACK;
        (Some(ok), None)
    };
    Ok(HartreeBoundReport {
        hartree_energy: energy,
        middle,
        lower,
        sqrt_density_kinetic: kin,
        kinetic_margin: trace - trap - kin,
        negative_mass: m,
        a_star,
        chain_holds,
        flag,
    })
}
