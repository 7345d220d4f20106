use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{axpy, dot, hermitian_eigen, norm, scale, symmetric_eigen};
use crate::C64;

#[derive(Clone, Debug)]
pub struct BlockEigenOptions {
    /// Number of eigenpairs that must converge.
    pub wanted: usize,
    /// Block size (≥ wanted); the guard vectors speed up convergence of the
    /// last wanted pairs and keep degenerate levels together.
    pub block: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Keep all iterates real (for real symmetric operators).
    pub real: bool,
}

#[derive(Clone, Debug)]
pub struct BlockEigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lowest eigenpairs of a Hermitian operator by locally optimal block
/// preconditioned conjugate gradients. Vectors are unit in the Euclidean norm.
pub fn lobpcg(
    dim: usize,
    apply: &dyn Fn(&[C64], &mut [C64]),
    precondition: &dyn Fn(&mut [C64]),
    opts: &BlockEigenOptions,
) -> BlockEigenResult {
    let m = opts.block.max(opts.wanted).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<C64>> = (0..m)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let im = if opts.real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                    C64::new(rng.gen_range(-1.0..1.0), im)
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut x, &[], opts.real);
    let mut ax: Vec<Vec<C64>> = x.iter().map(|v| applied(apply, v)).collect();
    let mut p: Vec<Vec<C64>> = Vec::new();
    let mut values = vec![0.0; m];
    let mut residuals = vec![f64::INFINITY; m];
    let mut iterations = 0;

    // initial Rayleigh–Ritz
    rayleigh_ritz(&mut x, &mut ax, &mut values, m, opts.real);

    while iterations < opts.max_iter {
        let mut w: Vec<Vec<C64>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut r = ax[i].clone();
            axpy(&mut r, C64::new(-values[i], 0.0), &x[i]);
            residuals[i] = norm(&r);
            w.push(r);
        }
        if residuals[..opts.wanted].iter().all(|r| *r <= opts.tol) {
            break;
        }
        iterations += 1;
        for r in &mut w {
            precondition(r);
            if opts.real {
                r.iter_mut().for_each(|v| v.im = 0.0);
            }
        }
        let mut extra: Vec<Vec<C64>> = w;
        extra.extend(p.drain(..));
        orthonormalize(&mut extra, &x, opts.real);
        let a_extra: Vec<Vec<C64>> = extra.iter().map(|v| applied(apply, v)).collect();

        let mut basis: Vec<Vec<C64>> = x.clone();
        basis.extend(extra.iter().cloned());
        let mut abasis: Vec<Vec<C64>> = ax.clone();
        abasis.extend(a_extra);
        let k = basis.len();
        let g = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &abasis[j]));
        let coeffs = lowest_vectors(&g, m, opts.real, &mut values);

        let combine = |vs: &[Vec<C64>], from: usize, col: usize| -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for (r, v) in vs.iter().enumerate().skip(from) {
                axpy(&mut out, coeffs[(r, col)], v);
            }
            out
        };
        let new_x: Vec<Vec<C64>> = (0..m).map(|c| combine(&basis, 0, c)).collect();
        let new_ax: Vec<Vec<C64>> = (0..m).map(|c| combine(&abasis, 0, c)).collect();
        p = (0..m).map(|c| combine(&basis, m, c)).collect();
        x = new_x;
        ax = new_ax;
        if opts.real {
            for v in x.iter_mut().chain(ax.iter_mut()).chain(p.iter_mut()) {
                v.iter_mut().for_each(|z| z.im = 0.0);
            }
        }
    }

    // final residuals against the returned vectors
    for i in 0..m {
        let mut r = applied(apply, &x[i]);
        values[i] = dot(&x[i], &r).re;
        axpy(&mut r, C64::new(-values[i], 0.0), &x[i]);
        residuals[i] = norm(&r);
    }
    let converged = residuals[..opts.wanted].iter().all(|r| *r <= opts.tol);
    BlockEigenResult { values, vectors: x, residuals, iterations, converged }
}

fn applied(apply: &dyn Fn(&[C64], &mut [C64]), v: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    apply(v, &mut out);
    out
}

fn lowest_vectors(g: &DMatrix<C64>, m: usize, real: bool, values: &mut [f64]) -> DMatrix<C64> {
    let k = g.nrows();
    let (vals, vecs) = if real {
        let gr = DMatrix::from_fn(k, k, |i, j| g[(i, j)].re);
        let (vals, vecs) = symmetric_eigen(&gr);
        (vals, vecs.map(|v| C64::new(v, 0.0)))
    } else {
        hermitian_eigen(g)
    };
    values[..m].copy_from_slice(&vals[..m]);
    vecs.columns(0, m).into_owned()
}

fn rayleigh_ritz(x: &mut Vec<Vec<C64>>, ax: &mut Vec<Vec<C64>>, values: &mut [f64], m: usize, real: bool) {
    let g = DMatrix::from_fn(m, m, |i, j| dot(&x[i], &ax[j]));
    let c = lowest_vectors(&g, m, real, values);
    let dim = x[0].len();
    let mix = |vs: &[Vec<C64>]| -> Vec<Vec<C64>> {
        (0..m)
            .map(|col| {
                let mut out = vec![C64::new(0.0, 0.0); dim];
                for (r, v) in vs.iter().enumerate() {
                    axpy(&mut out, c[(r, col)], v);
                }
                out
            })
            .collect()
    };
    *x = mix(x);
    *ax = mix(ax);
}

/// Orthonormalize `vs` against `fixed` (assumed orthonormal) and among
/// themselves; vectors that become numerically dependent are dropped.
pub fn orthonormalize(vs: &mut Vec<Vec<C64>>, fixed: &[Vec<C64>], real: bool) {
    let mut kept: Vec<Vec<C64>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        let start = norm(&v);
        if start == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in fixed.iter().chain(kept.iter()) {
                let mut c = dot(q, &v);
                if real {
                    c.im = 0.0;
                }
                axpy(&mut v, -c, q);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * start {
            scale(&mut v, 1.0 / nv);
            kept.push(v);
        }
    }
    *vs = kept;
}
