use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::ModeBasis;
use super::fock::FockBasis;
use super::tensor::TwoBodyTensor;
use crate::error::{Error, Result};
use crate::linalg::LinearOperator;
use crate::C64;

/// Second-quantized `(1-ε)Σ ε_i a_i†a_i + (1/(2(N-1))) Σ W_{ijkl} a_i†a_j†a_l a_k`
/// on a Fock basis, stored by rows.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    dim: usize,
    particles: usize,
    eps: f64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHamiltonian {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `⟨x|H|x⟩` for a unit vector.
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

impl LinearOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        // each row sums in stored order, so the result does not depend on threads
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *out = acc;
        });
    }
}

/// Entries of `W` below this fraction of the largest are treated as zero.
const DROP: f64 = 1e-14;

pub fn assemble_hamiltonian(
    basis: &ModeBasis,
    w: &TwoBodyTensor,
    fock: &FockBasis,
    eps: f64,
) -> Result<SparseHamiltonian> {
    assemble_from_energies(basis.energies(), w, fock, eps)
}

/// Assembly from the one-body energies alone.
pub fn assemble_from_energies(
    energies: &[f64],
    w: &TwoBodyTensor,
    fock: &FockBasis,
    eps: f64,
) -> Result<SparseHamiltonian> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("perturbation ε = {eps} outside [0, 1)")));
    }
    let d = fock.modes();
    if energies.len() != d || w.dim() != d {
        return Err(Error::InvalidParameter(format!(
            "{} energies and a rank-{} tensor for {d} Fock modes",
            energies.len(),
            w.dim()
        )));
    }
    let n = fock.particles();
    let interacting = !w.is_zero();
    if interacting && n < 2 {
        return Err(Error::InvalidParameter("the pair prefactor 1/(N-1) needs N ≥ 2".into()));
    }
    let prefactor = if interacting { 0.5 / (n as f64 - 1.0) } else { 0.0 };
    let cutoff = DROP * w.max_abs();
    // pairs (i, j) with a nonzero W_{ijkl}, per annihilated pair (k, l)
    let creations: Vec<Vec<(usize, usize, C64)>> = (0..d * d)
        .map(|kl| {
            let (k, l) = (kl / d, kl % d);
            let mut v = Vec::new();
            if interacting {
                for i in 0..d {
                    for j in 0..d {
                        let x = w.get(i, j, k, l);
                        if x.norm() > cutoff {
                            v.push((i, j, x));
                        }
                    }
                }
            }
            v
        })
        .collect();

    let rows: Vec<Vec<(usize, C64)>> = (0..fock.len())
        .into_par_iter()
        .map(|c| {
            let state = fock.state(c);
            let mut entries: Vec<(usize, C64)> = Vec::new();
            let diag: f64 = state.iter().zip(energies).map(|(&o, e)| o as f64 * e).sum::<f64>() * (1.0 - eps);
            entries.push((c, C64::new(diag, 0.0)));
            let mut m = state.to_vec();
            for k in 0..d {
                if m[k] == 0 {
                    continue;
                }
                let ak = (m[k] as f64).sqrt();
                m[k] -= 1;
                for l in 0..d {
                    if m[l] == 0 {
                        continue;
                    }
                    let al = (m[l] as f64).sqrt();
                    m[l] -= 1;
                    for &(i, j, x) in &creations[k * d + l] {
                        m[j] += 1;
                        let cj = (m[j] as f64).sqrt();
                        m[i] += 1;
                        let ci = (m[i] as f64).sqrt();
                        let r = fock.rank(&m);
                        // row c of H is the adjoint of column c
                        entries.push((r, (x * (prefactor * ak * al * cj * ci)).conj()));
                        m[i] -= 1;
                        m[j] -= 1;
                    }
                    m[l] += 1;
                }
                m[k] += 1;
            }
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
            for (r, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => merged.push((r, v)),
                }
            }
            merged
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(fock.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian { dim: fock.len(), particles: n, eps, row_ptr, cols, vals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, is_hermitian};

    fn random_tensor(d: usize, seed: u64) -> TwoBodyTensor {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw = TwoBodyTensor::from_fn(d, |_, _, _, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        TwoBodyTensor::from_fn(d, |i, j, k, l| {
            0.25 * (raw.get(i, j, k, l) + raw.get(j, i, l, k) + raw.get(k, l, i, j).conj() + raw.get(l, k, j, i).conj())
        })
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let fock = FockBasis::new(3, 4, 1000).unwrap();
        let e = [1.0, 2.0, 2.5, 4.0];
        let h = assemble_from_energies(&e, &TwoBodyTensor::zeros(4), &fock, 0.0).unwrap();
        let m = h.to_dense();
        for r in 0..fock.len() {
            let expected: f64 = fock.state(r).iter().zip(&e).map(|(&o, x)| o as f64 * x).sum();
            for c in 0..fock.len() {
                let t = if r == c { expected } else { 0.0 };
                assert!((m[(r, c)].re - t).abs() < 1e-14 && m[(r, c)].im == 0.0);
            }
        }
        let half = assemble_from_energies(&e, &TwoBodyTensor::zeros(4), &fock, 0.5).unwrap();
        let a = hermitian_eigenvalues(&m);
        let b = hermitian_eigenvalues(&half.to_dense());
        for (x, y) in a.iter().zip(&b) {
            assert!((0.5 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn interacting_hamiltonian_is_hermitian() {
        let fock = FockBasis::new(4, 4, 1000).unwrap();
        let h = assemble_from_energies(&[1.0, 2.0, 3.0, 4.0], &random_tensor(4, 5), &fock, 0.2).unwrap();
        assert!(is_hermitian(&h.to_dense(), 1e-12));
    }

    #[test]
    fn rejects_single_interacting_particle() {
        let fock = FockBasis::new(1, 3, 100).unwrap();
        assert!(assemble_from_energies(&[1.0, 2.0, 3.0], &random_tensor(3, 1), &fock, 0.0).is_err());
        assert!(assemble_from_energies(&[1.0, 2.0, 3.0], &TwoBodyTensor::zeros(3), &fock, 0.0).is_ok());
        let fock = FockBasis::new(2, 3, 100).unwrap();
        assert!(assemble_from_energies(&[1.0, 2.0, 3.0], &TwoBodyTensor::zeros(3), &fock, 1.0).is_err());
    }
}
