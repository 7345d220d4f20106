use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::basis::ModeBasis;
use super::fock::FockBasis;
use super::rdm::Rdm;
use super::tensor::TwoBodyTensor;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::C64;

/// Expansion defects above this are flagged.
pub const DEFECT_WARNING: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct CondensateOverlap {
    /// `⟨u|γ⁽¹⁾|u⟩` for the projection of `u` onto the modes.
    pub value: f64,
    /// `1 - Σ|⟨φ_i|u⟩|²`.
    pub defect: f64,
    pub warning: bool,
}

pub fn condensate_overlap(rdm1: &Rdm, u: &Field, basis: &ModeBasis) -> Result<CondensateOverlap> {
    if rdm1.k() != 1 || rdm1.modes() != basis.dim() {
        return Err(Error::InvalidParameter("expected a one-body RDM on this mode basis".into()));
    }
    let n = u.norm_sq();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n));
    }
    let (c, defect) = basis.expand(u)?;
    Ok(overlap_from_coefficients(rdm1, &c, defect))
}

pub fn overlap_from_coefficients(rdm1: &Rdm, c: &[C64], defect: f64) -> CondensateOverlap {
    let g = rdm1.matrix();
    let d = c.len();
    let mut value = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            value += c[i].conj() * g[(i, j)] * c[j];
        }
    }
    CondensateOverlap { value: value.re, defect, warning: defect > DEFECT_WARNING }
}

/// Coefficients of `u^{⊗N}` for `u = Σ c_i φ_i`:
/// `√(N!/∏n_i!) ∏ c_i^{n_i}`.
pub fn product_state(fock: &FockBasis, c: &[C64]) -> Vec<C64> {
    let log_fact = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let total = log_fact(fock.particles());
    fock.states()
        .iter()
        .map(|s| {
            let mut amp = C64::new(1.0, 0.0);
            let mut log_norm = total;
            for (&n, ci) in s.iter().zip(c) {
                amp *= ci.powu(n as u32);
                log_norm -= log_fact(n as usize);
            }
            amp * (0.5 * log_norm).exp()
        })
        .collect()
}

/// `⟨u^{⊗N}|H|u^{⊗N}⟩/N = (1-ε)Σε_i|c_i|² + ½ Σ W_{ijkl} c_i* c_j* c_k c_l` for unit `c`.
pub fn product_energy(energies: &[f64], w: &TwoBodyTensor, eps: f64, c: &[C64]) -> f64 {
    let d = c.len();
    let mut one = 0.0;
    for i in 0..d {
        one += energies[i] * c[i].norm_sqr();
    }
    let mut two = C64::new(0.0, 0.0);
    if !w.is_zero() {
        for i in 0..d {
            for j in 0..d {
                let left = (c[i] * c[j]).conj();
                for k in 0..d {
                    for l in 0..d {
                        two += left * w.get(i, j, k, l) * c[k] * c[l];
                    }
                }
            }
        }
    }
    (1.0 - eps) * one + 0.5 * two.re
}

/// `∂E/∂c_i*`: `(1-ε)ε_i c_i + Σ_{jkl} W_{ijkl} c_j* c_k c_l`.
pub fn mean_field_gradient(energies: &[f64], w: &TwoBodyTensor, eps: f64, c: &[C64]) -> Vec<C64> {
    let d = c.len();
    let mut g: Vec<C64> = (0..d).map(|i| c[i] * ((1.0 - eps) * energies[i])).collect();
    if !w.is_zero() {
        for (i, gi) in g.iter_mut().enumerate() {
            for j in 0..d {
                let cj = c[j].conj();
                for k in 0..d {
                    for l in 0..d {
                        *gi += w.get(i, j, k, l) * cj * c[k] * c[l];
                    }
                }
            }
        }
    }
    g
}

#[derive(Clone, Debug)]
pub struct BestProduct {
    pub energy: f64,
    pub coefficients: Vec<C64>,
}

/// Lowest product-state energy per particle over unit `c ∈ ℂ^d`, by projected
/// gradient descent from the lowest mode and `restarts` seeded random starts.
pub fn best_product_state(energies: &[f64], w: &TwoBodyTensor, eps: f64, restarts: usize, seed: u64) -> BestProduct {
    let d = energies.len();
    let mut starts: Vec<Vec<C64>> = Vec::with_capacity(restarts + 1);
    let mut first = vec![C64::new(0.0, 0.0); d];
    first[0] = C64::new(1.0, 0.0);
    starts.push(first);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        starts.push((0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
    }
    let mut best: Option<BestProduct> = None;
    for mut c in starts {
        normalize(&mut c);
        let mut e = product_energy(energies, w, eps, &c);
        let mut tau: f64 = 0.1;
        for _ in 0..20_000 {
            let g = mean_field_gradient(energies, w, eps, &c);
            let mu: C64 = c.iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
            let r: Vec<C64> = g.iter().zip(&c).map(|(a, b)| a - b * mu).collect();
            let res = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if res < 1e-12 {
                break;
            }
            let mut moved = false;
            while tau > 1e-14 {
                let mut t: Vec<C64> = c.iter().zip(&r).map(|(a, b)| a - b * tau).collect();
                normalize(&mut t);
                let et = product_energy(energies, w, eps, &t);
                if et <= e {
                    c = t;
                    e = et;
                    tau *= 1.5;
                    moved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| e < b.energy) {
            best = Some(BestProduct { energy: e, coefficients: c });
        }
    }
    best.expect("at least one start")
}

fn normalize(c: &mut [C64]) {
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= n);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::{assemble_from_energies, rdm1};

    #[test]
    fn product_state_is_normalized_and_matches_energy() {
        let fock = FockBasis::new(3, 3, 100).unwrap();
        let mut c = vec![C64::new(0.6, 0.1), C64::new(-0.3, 0.5), C64::new(0.2, 0.0)];
        normalize(&mut c);
        let psi = product_state(&fock, &c);
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
        let e = [1.0, 2.0, 3.0];
        let w = TwoBodyTensor::from_fn(3, |i, j, k, l| {
            if (i + j) % 3 == (k + l) % 3 { C64::new(-0.3 + 0.05 * (i * k) as f64, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let w = TwoBodyTensor::from_fn(3, |i, j, k, l| 0.5 * (w.get(i, j, k, l) + w.get(k, l, i, j).conj()));
        let w = TwoBodyTensor::from_fn(3, |i, j, k, l| 0.5 * (w.get(i, j, k, l) + w.get(j, i, l, k)));
        let h = assemble_from_energies(&e, &w, &fock, 0.0).unwrap();
        assert!((h.expectation(&psi) / 3.0 - product_energy(&e, &w, 0.0, &c)).abs() < 1e-12);
        let g = rdm1(&psi, &fock).unwrap();
        let o = overlap_from_coefficients(&g, &c, 0.0);
        assert!((o.value - 1.0).abs() < 1e-12);
    }
}
