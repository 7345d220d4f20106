use crate::error::{Error, Result};
use crate::field::{
    convolve_real, Field, Grid2D, InteractionSpec, OneBodyOperator, PotentialSpec, ScaledInteraction,
    VectorPotentialSpec,
};
use crate::C64;

/// Nonlinearity of the NLS functional.
#[derive(Clone, Debug)]
pub enum Coupling {
    /// Local term `(b/2)∫|u|⁴`.
    Delta { b: f64 },
    /// `(1/2)∬ρ(x) N^{2β}w(N^β(x-y)) ρ(y)`.
    Hartree { w: InteractionSpec, particles: usize, beta: f64 },
}

/// Thresholds for declaring collapse during energy descent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseCriteria {
    /// Any iterate below this energy counts as concentrating.
    pub energy_floor: f64,
    /// Collapse width threshold in units of the grid spacing.
    pub width_spacings: f64,
}

impl Default for CollapseCriteria {
    fn default() -> Self {
        Self { energy_floor: -1e3, width_spacings: 4.0 }
    }
}

/// An NLS energy functional on a grid, with solver settings.
#[derive(Clone, Debug)]
pub struct NlsProblem {
    pub(crate) op: OneBodyOperator,
    pub potential: PotentialSpec,
    pub vector_potential: VectorPotentialSpec,
    pub coupling: Coupling,
    pub tol: f64,
    pub max_iter: usize,
    /// Initial descent step.
    pub step: f64,
    pub collapse: CollapseCriteria,
    weights: Option<Vec<f64>>,
}

impl NlsProblem {
    pub fn new(grid: &Grid2D, v: &PotentialSpec, a: &VectorPotentialSpec, coupling: Coupling) -> Result<Self> {
        let op = OneBodyOperator::new(grid, v, a)?;
        let weights = match &coupling {
            Coupling::Delta { b } if !b.is_finite() => {
                return Err(Error::InvalidParameter(format!("coupling b = {b}")))
            }
            Coupling::Delta { .. } => None,
            Coupling::Hartree { w, particles, beta } => {
                let s = ScaledInteraction::new(w, *particles, *beta)?;
                s.check_resolved(grid)?;
                Some(s.weights(grid))
            }
        };
        Ok(Self {
            op,
            potential: v.clone(),
            vector_potential: a.clone(),
            coupling,
            tol: 1e-7,
            max_iter: 20_000,
            step: 0.5,
            collapse: CollapseCriteria::default(),
            weights,
        })
    }

    pub fn delta(grid: &Grid2D, v: &PotentialSpec, b: f64) -> Result<Self> {
        Self::new(grid, v, &VectorPotentialSpec::Zero, Coupling::Delta { b })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn grid(&self) -> &Grid2D {
        self.op.grid()
    }

    pub fn operator(&self) -> &OneBodyOperator {
        &self.op
    }

    /// Mean-field potential `U` such that the nonlinear gradient is `U·u`.
    pub(crate) fn mean_field(&self, density: &[f64]) -> Vec<f64> {
        match (&self.coupling, &self.weights) {
            (Coupling::Delta { b }, _) => density.iter().map(|r| b * r).collect(),
            (Coupling::Hartree { .. }, Some(wts)) => convolve_real(self.grid(), wts, density),
            _ => unreachable!("Hartree coupling always carries weights"),
        }
    }

    /// `(⟨u|h|u⟩, interaction energy)` together with `h·u` and the mean field.
    pub(crate) fn energy_parts(&self, u: &Field) -> (f64, f64, Vec<C64>, Vec<f64>) {
        let mut hu = vec![C64::new(0.0, 0.0); u.values().len()];
        self.op.apply_slice(u.values(), &mut hu);
        let one_body: f64 =
            u.values().iter().zip(&hu).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * self.grid().cell_area();
        let rho = u.density();
        let mf = self.mean_field(&rho);
        let inter = 0.5 * self.grid().integrate(&rho.iter().zip(&mf).map(|(r, m)| r * m).collect::<Vec<_>>());
        (one_body, inter, hu, mf)
    }

    /// The functional without the normalization precondition.
    pub fn energy_unchecked(&self, u: &Field) -> f64 {
        let (a, b, _, _) = self.energy_parts(u);
        a + b
    }

    /// Energy minus the trap contribution: the part that scales as `λ²`
    /// under `u ↦ λu(λ·)`. A negative value certifies that the functional
    /// is unbounded below.
    pub fn scale_invariant_energy(&self, u: &Field) -> f64 {
        let rho = u.density();
        let trap = self.grid().integrate(&rho.iter().zip(self.op.potential()).map(|(r, v)| r * v).collect::<Vec<_>>());
        self.energy_unchecked(u) - trap
    }
}

/// `⟨u|h|u⟩ + (b/2)∫|u|⁴` (or the Hartree variant) for a normalized `u`.
pub fn nls_energy(u: &Field, problem: &NlsProblem) -> Result<f64> {
    u.same_grid(&Field::zeros(problem.grid()))?;
    let n = u.norm_sq();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n));
    }
    Ok(problem.energy_unchecked(u))
}
