use nalgebra::{DMatrix, SymmetricEigen};

use crate::C64;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    // symmetrize against round-off before handing to the solver
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(y: &mut [C64], s: C64, x: &[C64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += s * b;
    }
}

pub fn scale(x: &mut [C64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}
