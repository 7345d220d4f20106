use serde::Serialize;

use super::problem::NlsProblem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationStatus {
    Ok,
    /// Energy drift exceeded the configured threshold; `dt` is likely too large.
    EnergyDriftWarning,
}

#[derive(Clone, Copy, Debug)]
pub struct PropagateOptions {
    /// Keep every `save_every`-th state (the initial and final states are always kept).
    pub save_every: usize,
    pub drift_warning: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self { save_every: 1, drift_warning: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct NlsTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    /// Energy after every step, starting at `t = 0`.
    pub energies: Vec<f64>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub status: PropagationStatus,
}

impl NlsTrajectory {
    pub fn final_state(&self) -> &Field {
        self.states.last().expect("trajectory keeps the final state")
    }
}

/// Strang splitting for `i∂_t u = hu + (mean field)·u` with `A = 0`: half a
/// step of the local potential, a full kinetic step in Fourier space, and
/// another half step. Both local factors are exact because the mean field
/// depends only on `|u|`, which they leave unchanged.
pub fn propagate_nls(
    u0: &Field,
    problem: &NlsProblem,
    t_final: f64,
    dt: f64,
    opts: &PropagateOptions,
) -> Result<NlsTrajectory> {
    if !problem.vector_potential.is_zero() {
        return Err(Error::Precondition("NLS propagation requires a vanishing vector potential".into()));
    }
    if !(dt > 0.0) || !(t_final >= 0.0) || opts.save_every == 0 {
        return Err(Error::InvalidParameter(format!("dt = {dt}, T = {t_final}, save_every = {}", opts.save_every)));
    }
    u0.same_grid(&Field::zeros(problem.grid()))?;
    let n0 = u0.norm_sq();
    if (n0 - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n0));
    }
    let grid = problem.grid().clone();
    let steps = (t_final / dt).round() as usize;
    let dt = if steps > 0 { t_final / steps as f64 } else { dt };
    let v = problem.operator().potential().to_vec();
    let kinetic: Vec<C64> =
        (0..grid.len()).map(|idx| C64::from_polar(1.0, -dt * grid.k_squared(idx))).collect();

    let half_potential = |u: &mut Field| {
        let mf = problem.mean_field(&u.density());
        for ((z, vv), m) in u.values_mut().iter_mut().zip(&v).zip(&mf) {
            *z *= C64::from_polar(1.0, -0.5 * dt * (vv + m));
        }
    };

    let mut u = u0.clone();
    let e0 = problem.energy_unchecked(&u);
    let mut energies = vec![e0];
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    let mut max_norm_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    for step in 1..=steps {
        half_potential(&mut u);
        let data = u.values_mut();
        grid.fft(data);
        for (z, k) in data.iter_mut().zip(&kinetic) {
            *z *= k;
        }
        grid.ifft(data);
        half_potential(&mut u);
        let e = problem.energy_unchecked(&u);
        energies.push(e);
        max_energy_drift = max_energy_drift.max((e - e0).abs());
        max_norm_drift = max_norm_drift.max((u.norm_sq() - n0).abs());
        if step % opts.save_every == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(u.clone());
        }
    }
    let status = if max_energy_drift > opts.drift_warning {
        PropagationStatus::EnergyDriftWarning
    } else {
        PropagationStatus::Ok
    };
    Ok(NlsTrajectory { times, states, energies, max_norm_drift, max_energy_drift, status })
}
