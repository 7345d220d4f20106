use nalgebra::DMatrix;

use super::dense::{axpy, dot, norm, scale, symmetric_eigen};
use super::lanczos::{tridiagonal, LinearOperator};
use crate::C64;

#[derive(Clone, Debug)]
pub struct KrylovStats {
    pub substeps: usize,
    pub rejected: usize,
    pub max_error_estimate: f64,
}

/// `exp(-i H t) ψ` by Lanczos projection, subdividing `t` until the
/// a-posteriori error estimate per substep is below `tol`.
pub fn expm_apply<O: LinearOperator + ?Sized>(
    op: &O,
    psi: &[C64],
    t: f64,
    krylov_dim: usize,
    tol: f64,
) -> (Vec<C64>, KrylovStats) {
    let mut stats = KrylovStats { substeps: 0, rejected: 0, max_error_estimate: 0.0 };
    let mut state = psi.to_vec();
    let mut remaining = t;
    let mut dt = t;
    while remaining.abs() > 1e-15 * t.abs().max(1.0) {
        let step = if dt.abs() > remaining.abs() { remaining } else { dt };
        let (next, err) = krylov_step(op, &state, step, krylov_dim);
        if err > tol && step.abs() > 1e-12 {
            stats.rejected += 1;
            dt = step / 2.0;
            continue;
        }
        stats.max_error_estimate = stats.max_error_estimate.max(err);
        stats.substeps += 1;
        state = next;
        remaining -= step;
        if err < 0.01 * tol {
            dt = step * 1.5;
        }
    }
    (state, stats)
}

fn krylov_step<O: LinearOperator + ?Sized>(op: &O, psi: &[C64], t: f64, m: usize) -> (Vec<C64>, f64) {
    let dim = psi.len();
    let beta0 = norm(psi);
    if beta0 == 0.0 {
        return (psi.to_vec(), 0.0);
    }
    let mut basis = vec![psi.to_vec()];
    scale(&mut basis[0], 1.0 / beta0);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut tail = 0.0;
    let m = m.min(dim);
    for j in 0..m {
        op.apply(&basis[j], &mut w);
        alpha.push(dot(&basis[j], &w).re);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(&mut w, -c, v);
            }
        }
        let b = norm(&w);
        if b < 1e-14 || j + 1 == m {
            tail = if j + 1 == m { b } else { 0.0 };
            break;
        }
        beta.push(b);
        let mut next = w.clone();
        scale(&mut next, 1.0 / b);
        basis.push(next);
    }
    let k = alpha.len();
    let (vals, vecs) = symmetric_eigen(&tridiagonal(&alpha, &beta[..k - 1]));
    // c = S exp(-iθt) Sᵀ e₁
    let coeffs: Vec<C64> = (0..k)
        .map(|r| {
            (0..k)
                .map(|c| C64::from_polar(1.0, -vals[c] * t) * vecs[(r, c)] * vecs[(0, c)])
                .sum()
        })
        .collect();
    let err = beta0 * tail * coeffs[k - 1].norm();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (c, v) in coeffs.iter().zip(&basis) {
        axpy(&mut out, c * beta0, v);
    }
    (out, err)
}

#[allow(dead_code)]
fn dense_expm(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (vals, vecs) = super::hermitian_eigen(h);
    let n = vals.len();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { C64::from_polar(1.0, -vals[i] * t) } else { C64::new(0.0, 0.0) });
    &vecs * d * vecs.adjoint()
}
