use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, trace_norm};
use crate::manybody::Rdm;
use crate::C64;

#[derive(Clone, Debug)]
pub struct DeFinettiOptions {
    pub atoms: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DeFinettiOptions {
    fn default() -> Self {
        Self { atoms: 8, restarts: 5, iterations: 400, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct DeFinettiFit {
    /// Unit-trace positive one-body matrices `γ_j`.
    pub atoms: Vec<DMatrix<C64>>,
    /// `λ_j ≥ 0`, `Σλ_j ≤ 1`.
    pub weights: Vec<f64>,
    /// `½‖γ⁽²⁾ - Σ_j λ_j γ_j⊗γ_j‖₁`.
    pub error: f64,
    /// `√(log d / N)`.
    pub reference: f64,
    pub iterations: usize,
    /// Seed of the restart that produced the fit.
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeFinettiSummary {
    pub error: f64,
    pub reference: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl DeFinettiFit {
    pub fn summary(&self) -> DeFinettiSummary {
        DeFinettiSummary {
            error: self.error,
            reference: self.reference,
            weights: self.weights.clone(),
            iterations: self.iterations,
            seed: self.seed,
        }
    }
}

fn mixture(atoms: &[DMatrix<C64>], weights: &[f64]) -> DMatrix<C64> {
    let d = atoms[0].nrows();
    let mut m = DMatrix::zeros(d * d, d * d);
    for (g, &l) in atoms.iter().zip(weights) {
        if l != 0.0 {
            m += g.kronecker(g) * C64::new(l, 0.0);
        }
    }
    m
}

/// `½‖target - Σλ_j γ_j⊗γ_j‖₁` on the full pair space.
pub fn definetti_distance(target: &DMatrix<C64>, atoms: &[DMatrix<C64>], weights: &[f64]) -> f64 {
    0.5 * trace_norm(&(target - mixture(atoms, weights)))
}

fn frobenius_sq(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean projection onto `{x ≥ 0, Σx ≤ 1}`.
fn project_capped_simplex(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    if x.iter().sum::<f64>() <= 1.0 {
        return;
    }
    project_simplex(x);
}

/// Euclidean projection onto `{x ≥ 0, Σx = 1}`.
fn project_simplex(x: &mut [f64]) {
    let mut s: Vec<f64> = x.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, v) in s.iter().enumerate() {
        acc += v;
        let t = (acc - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

/// Nearest density matrix in Frobenius norm.
fn project_density(g: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (g + g.adjoint()) * C64::new(0.5, 0.0);
    let (mut vals, vecs) = hermitian_eigen(&h);
    project_simplex(&mut vals);
    let d = DMatrix::from_fn(vals.len(), vals.len(), |i, j| if i == j { C64::new(vals[i], 0.0) } else { C64::new(0.0, 0.0) });
    &vecs * d * vecs.adjoint()
}

/// `X_{ik} = Σ_{jl} R_{(ij),(kl)} γ_{lj} + Σ_{jl} R_{(ji),(lk)} γ_{lj}`: the
/// derivative of `tr(R γ⊗γ)` with respect to `γ`.
fn contract(r: &DMatrix<C64>, g: &DMatrix<C64>) -> DMatrix<C64> {
    let d = g.nrows();
    DMatrix::from_fn(d, d, |i, k| {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..d {
            for l in 0..d {
                s += (r[(i * d + j, k * d + l)] + r[(j * d + i, l * d + k)]) * g[(l, j)];
            }
        }
        s
    })
}

fn random_atom(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let g = &a * a.adjoint();
    let t = g.trace();
    g / t
}

struct Attempt {
    atoms: Vec<DMatrix<C64>>,
    weights: Vec<f64>,
    error: f64,
    iterations: usize,
    seed: u64,
}

fn initial_guess(target: &DMatrix<C64>, d: usize, n_atoms: usize, restart: usize, rng: &mut ChaCha8Rng) -> (Vec<DMatrix<C64>>, Vec<f64>) {
    if restart == 0 {
        // eigenprojectors of the one-body marginal
        let g1 = DMatrix::from_fn(d, d, |i, k| (0..d).map(|j| target[(i * d + j, k * d + j)]).sum::<C64>());
        let (vals, vecs) = hermitian_eigen(&g1);
        let mut atoms = Vec::with_capacity(n_atoms);
        let mut weights = Vec::with_capacity(n_atoms);
        for a in 0..n_atoms {
            if a < d {
                let v = vecs.column(d - 1 - a).into_owned();
                atoms.push(&v * v.adjoint());
                weights.push(vals[d - 1 - a].max(0.0));
            } else {
                atoms.push(random_atom(d, rng));
                weights.push(0.0);
            }
        }
        project_capped_simplex(&mut weights);
        return (atoms, weights);
    }
    let atoms = (0..n_atoms).map(|_| random_atom(d, rng)).collect();
    (atoms, vec![1.0 / n_atoms as f64; n_atoms])
}

fn descend(target: &DMatrix<C64>, d: usize, opts: &DeFinettiOptions, restart: usize) -> Attempt {
    let seed = opts.seed.wrapping_add(restart as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut atoms, mut weights) = initial_guess(target, d, opts.atoms, restart, &mut rng);
    let loss = |atoms: &[DMatrix<C64>], weights: &[f64]| frobenius_sq(&(target - mixture(atoms, weights)));
    let mut current = loss(&atoms, &weights);
    let mut tau_w = 1.0;
    let mut tau_a = vec![1.0; opts.atoms];
    let mut iterations = 0;
    for _ in 0..opts.iterations {
        iterations += 1;
        let start = current;
        // weights: projected gradient with backtracking
        let products: Vec<DMatrix<C64>> = atoms.iter().map(|g| g.kronecker(g)).collect();
        for _ in 0..5 {
            let r = target - mixture(&atoms, &weights);
            let grad: Vec<f64> = products.iter().map(|p| -2.0 * (&r * p).trace().re).collect();
            loop {
                let mut trial: Vec<f64> = weights.iter().zip(&grad).map(|(w, g)| w - tau_w * g).collect();
                project_capped_simplex(&mut trial);
                let f = loss(&atoms, &trial);
                if f <= current {
                    weights = trial;
                    current = f;
                    tau_w *= 1.5;
                    break;
                }
                tau_w *= 0.5;
                if tau_w < 1e-14 {
                    break;
                }
            }
        }
        // atoms, one at a time
        for j in 0..opts.atoms {
            if weights[j] == 0.0 {
                continue;
            }
            let r = target - mixture(&atoms, &weights);
            let grad = contract(&r, &atoms[j]) * C64::new(-2.0 * weights[j], 0.0);
            loop {
                let trial = project_density(&(&atoms[j] - &grad * C64::new(tau_a[j], 0.0)));
                let saved = std::mem::replace(&mut atoms[j], trial);
                let f = loss(&atoms, &weights);
                if f <= current {
                    current = f;
                    tau_a[j] *= 1.5;
                    break;
                }
                atoms[j] = saved;
                tau_a[j] *= 0.5;
                if tau_a[j] < 1e-14 {
                    break;
                }
            }
        }
        if current < 1e-30 || start - current <= 1e-15 * start.max(1e-30) {
            break;
        }
    }
    let error = definetti_distance(target, &atoms, &weights);
    Attempt { atoms, weights, error, iterations, seed }
}

/// Best approximation of a two-body RDM by a mixture of product states
/// `Σ_j λ_j γ_j⊗γ_j`, from seeded restarts.
pub fn fit_definetti(rdm2: &Rdm, particles: usize, opts: &DeFinettiOptions) -> Result<DeFinettiFit> {
    if rdm2.k() != 2 {
        return Err(Error::InvalidParameter("de Finetti fitting needs a two-body RDM".into()));
    }
    if opts.atoms == 0 || opts.restarts == 0 {
        return Err(Error::InvalidParameter("need at least one atom and one restart".into()));
    }
    if particles < 2 {
        return Err(Error::InvalidParameter(format!("N = {particles} < 2")));
    }
    if rdm2.min_eigenvalue() < -1e-10 || (rdm2.trace() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter("input must be positive with unit trace".into()));
    }
    let d = rdm2.modes();
    let target = rdm2.full();
    let attempts: Vec<Attempt> = (0..opts.restarts).into_par_iter().map(|r| descend(&target, d, opts, r)).collect();
    let best = attempts
        .into_iter()
        .min_by(|a, b| a.error.total_cmp(&b.error).then(a.seed.cmp(&b.seed)))
        .expect("at least one restart");
    let reference = if d > 1 { ((d as f64).ln() / particles as f64).sqrt() } else { 0.0 };
    Ok(DeFinettiFit {
        atoms: best.atoms,
        weights: best.weights,
        error: best.error,
        reference,
        iterations: best.iterations,
        seed: best.seed,
    })
}
