use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{axpy, dot, norm, scale, symmetric_eigen};
use crate::C64;

/// A Hermitian linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_krylov: 160, max_restarts: 40, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<C64>,
    /// `‖Hψ - Eψ‖`
    pub residual: f64,
    /// Second-lowest Ritz value of the final Krylov space, if any.
    pub next_value: Option<f64>,
    pub matvecs: usize,
    pub converged: bool,
}

pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

/// Lowest eigenpair by Lanczos with full reorthogonalization, restarted from
/// the current Ritz vector when the Krylov space reaches `max_krylov`.
pub fn lanczos_lowest<O: LinearOperator + ?Sized>(op: &O, opts: &LanczosOptions) -> LanczosResult {
    let dim = op.dim();
    let mut start = random_unit_vector(dim, opts.seed);
    let mut matvecs = 0;
    let mut best: Option<LanczosResult> = None;
    let mut w = vec![C64::new(0.0, 0.0); dim];

    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let kmax = opts.max_krylov.min(dim);
        let mut ritz: Option<(Vec<f64>, DMatrix<f64>)> = None;

        for j in 0..kmax {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // two passes of classical Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(&mut w, -c, v);
                }
            }
            let b = norm(&w);
            let exhausted = b < 1e-13 * a.abs().max(1.0) || j + 1 == kmax;
            let check = exhausted || j % 4 == 3;
            if check {
                let t = tridiagonal(&alpha, &beta);
                let (vals, vecs) = symmetric_eigen(&t);
                let est = b * vecs[(j, 0)].abs();
                ritz = Some((vals, vecs));
                if est <= 0.1 * opts.tol || exhausted {
                    break;
                }
            }
            beta.push(b);
            let mut next = w.clone();
            scale(&mut next, 1.0 / b);
            basis.push(next);
        }

        let (vals, vecs) = ritz.expect("at least one Ritz solve");
        let m = vals.len();
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        for (i, v) in basis.iter().take(m).enumerate() {
            axpy(&mut psi, C64::new(vecs[(i, 0)], 0.0), v);
        }
        let nrm = norm(&psi);
        scale(&mut psi, 1.0 / nrm);
        op.apply(&psi, &mut w);
        matvecs += 1;
        let e = dot(&psi, &w).re;
        axpy(&mut w, C64::new(-e, 0.0), &psi);
        let residual = norm(&w);
        let result = LanczosResult {
            value: e,
            vector: psi.clone(),
            residual,
            next_value: vals.get(1).copied(),
            matvecs,
            converged: residual <= opts.tol,
        };
        let done = result.converged;
        if best.as_ref().map_or(true, |b| result.value < b.value + 1e-15 || done) {
            best = Some(result);
        }
        if done {
            break;
        }
        start = psi;
    }
    let mut out = best.expect("at least one cycle");
    out.matvecs = matvecs;
    out
}

pub(crate) fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    })
}

/// Dense matrices as operators (used by tests and small problems).
impl LinearOperator for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn matches_dense_diagonalization() {
        for (n, seed) in [(5usize, 1u64), (60, 2), (300, 3)] {
            let m = random_hermitian(n, seed);
            let exact = hermitian_eigen(&m).0[0];
            let r = lanczos_lowest(&m, &LanczosOptions { seed: 9, ..Default::default() });
            assert!(r.converged, "n = {n}: residual {}", r.residual);
            assert!((r.value - exact).abs() < 1e-10, "n = {n}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let m = random_hermitian(80, 4);
        let opts = LanczosOptions { seed: 17, ..Default::default() };
        let a = lanczos_lowest(&m, &opts);
        let b = lanczos_lowest(&m, &opts);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.vector, b.vector);
    }
}
