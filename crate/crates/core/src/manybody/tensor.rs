use rayon::prelude::*;

use super::basis::ModeBasis;
use crate::error::Result;
use crate::field::{convolve, InteractionSpec, ScaledInteraction};
use crate::C64;

/// `W_{ijkl} = ∬ φ_i*(x) φ_j*(y) N^{2β}w(N^β(x-y)) φ_k(x) φ_l(y) dx dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyTensor {
    d: usize,
    data: Vec<C64>,
}

impl TwoBodyTensor {
    pub fn zeros(d: usize) -> Self {
        Self { d, data: vec![C64::new(0.0, 0.0); d * d * d * d] }
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        t.data[((i * d + j) * d + k) * d + l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let d = self.d;
        self.data[((i * d + j) * d + k) * d + l]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Largest violation of `W_{ijkl} = W_{jilk}` and `W_{ijkl} = conj(W_{lkji})`.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let w = self.get(i, j, k, l);
                        worst = worst.max((w - self.get(j, i, l, k)).norm());
                        worst = worst.max((w - self.get(l, k, j, i).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Restriction to the first `d` modes.
    pub fn truncated(&self, d: usize) -> Self {
        Self::from_fn(d.min(self.d), |i, j, k, l| self.get(i, j, k, l))
    }

    /// Averages each entry over the exchange and adjoint symmetries of the kernel.
    fn symmetrize(&mut self, real: bool) {
        let src = self.clone();
        let d = self.d;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let avg = 0.25
                            * (src.get(i, j, k, l)
                                + src.get(j, i, l, k)
                                + src.get(k, l, i, j).conj()
                                + src.get(l, k, j, i).conj());
                        self.data[((i * d + j) * d + k) * d + l] =
                            if real { C64::new(avg.re, 0.0) } else { avg };
                    }
                }
            }
        }
    }
}

/// Matrix elements of the scaled pair interaction, with one spectral
/// convolution per pair density `φ_j* φ_l`.
pub fn two_body_elements(basis: &ModeBasis, w: &InteractionSpec, particles: usize, beta: f64) -> Result<TwoBodyTensor> {
    let d = basis.dim();
    if w.is_zero() {
        return Ok(TwoBodyTensor::zeros(d));
    }
    let grid = basis.grid();
    let scaled = ScaledInteraction::new(w, particles, beta)?;
    scaled.check_resolved(grid)?;
    let weights = scaled.weights(grid);
    let modes = basis.modes();
    let pair = |a: usize, b: usize| -> Vec<C64> {
        modes[a].values().iter().zip(modes[b].values()).map(|(x, y)| x.conj() * y).collect()
    };
    let potentials: Vec<Vec<C64>> =
        (0..d * d).into_par_iter().map(|jl| convolve(grid, &weights, &pair(jl / d, jl % d))).collect();
    let da = grid.cell_area();
    let blocks: Vec<Vec<C64>> = (0..d * d)
        .into_par_iter()
        .map(|ik| {
            let q = pair(ik / d, ik % d);
            potentials.iter().map(|p| q.iter().zip(p).map(|(a, b)| a * b).sum::<C64>() * da).collect()
        })
        .collect();
    let mut t = TwoBodyTensor::from_fn(d, |i, j, k, l| blocks[i * d + k][j * d + l]);
    t.symmetrize(basis.is_real());
    Ok(t)
}
