use nalgebra::DMatrix;

use super::fock::FockBasis;
use super::ground::ManyBodyResult;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::C64;

/// Trace-normalized reduced density matrix. For `k = 2` the matrix acts on
/// the symmetric pair space with basis `|ii⟩` and `(|ij⟩ + |ji⟩)/√2`, `i < j`.
#[derive(Clone, Debug)]
pub struct Rdm {
    k: usize,
    modes: usize,
    matrix: DMatrix<C64>,
}

/// Ordered pairs `i ≤ j` labelling the symmetric pair basis.
pub fn symmetric_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            v.push((i, j));
        }
    }
    v
}

impl Rdm {
    pub fn from_matrix(k: usize, modes: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let expected = match k {
            1 => modes,
            2 => modes * (modes + 1) / 2,
            _ => return Err(Error::InvalidParameter(format!("k = {k} not in {{1, 2}}"))),
        };
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::InvalidParameter(format!("RDM matrix must be {expected}×{expected}")));
        }
        Ok(Self { k, modes, matrix })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The `d² × d²` matrix on the full pair space, rows indexed `i·d + j`.
    pub fn full(&self) -> DMatrix<C64> {
        if self.k == 1 {
            return self.matrix.clone();
        }
        let s = embedding(self.modes);
        &s * &self.matrix * s.adjoint()
    }

    /// `Tr₂ γ⁽²⁾` (identity for `k = 1`).
    pub fn partial_trace(&self) -> DMatrix<C64> {
        if self.k == 1 {
            return self.matrix.clone();
        }
        let d = self.modes;
        let f = self.full();
        DMatrix::from_fn(d, d, |i, k| (0..d).map(|j| f[(i * d + j, k * d + j)]).sum())
    }

    /// Matrix in a rotated mode basis `φ'_a = Σ_i U_{ia} φ_i`.
    pub fn rotated(&self, u: &DMatrix<C64>) -> Self {
        let m = match self.k {
            1 => u.adjoint() * &self.matrix * u,
            _ => {
                let s = embedding(self.modes);
                let uu = u.kronecker(u);
                let f = s.adjoint() * uu.adjoint() * self.full() * &uu * &s;
                f
            }
        };
        Self { k: self.k, modes: self.modes, matrix: m }
    }

    /// Restriction to the first `d` modes (not renormalized).
    pub fn compressed(&self, d: usize) -> Self {
        match self.k {
            1 => Self { k: 1, modes: d, matrix: self.matrix.view((0, 0), (d, d)).into_owned() },
            _ => {
                let big = symmetric_pairs(self.modes);
                let keep: Vec<usize> =
                    big.iter().enumerate().filter(|(_, &(i, j))| i < d && j < d).map(|(p, _)| p).collect();
                let m = DMatrix::from_fn(keep.len(), keep.len(), |a, b| self.matrix[(keep[a], keep[b])]);
                Self { k: 2, modes: d, matrix: m }
            }
        }
    }
}

/// Isometry from the symmetric pair space into the full pair space.
pub fn embedding(d: usize) -> DMatrix<C64> {
    let pairs = symmetric_pairs(d);
    let mut s = DMatrix::zeros(d * d, pairs.len());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (p, &(i, j)) in pairs.iter().enumerate() {
        if i == j {
            s[(i * d + i, p)] = C64::new(1.0, 0.0);
        } else {
            s[(i * d + j, p)] = C64::new(h, 0.0);
            s[(j * d + i, p)] = C64::new(h, 0.0);
        }
    }
    s
}

/// `γ⁽¹⁾_{ij} = ⟨a_j†a_i⟩/N`.
pub fn rdm1(psi: &[C64], fock: &FockBasis) -> Result<Rdm> {
    let n = fock.particles();
    let d = fock.modes();
    if n < 1 {
        return Err(Error::InvalidParameter("one-body RDM needs N ≥ 1".into()));
    }
    let lower = FockBasis::new(n - 1, d, usize::MAX)?;
    // v[m][i] = ⟨m|a_i|Ψ⟩
    let mut v = vec![C64::new(0.0, 0.0); lower.len() * d];
    for (idx, state) in fock.states().iter().enumerate() {
        let amp = psi[idx];
        let mut m = state.clone();
        for i in 0..d {
            if m[i] == 0 {
                continue;
            }
            let c = (m[i] as f64).sqrt();
            m[i] -= 1;
            v[lower.rank(&m) * d + i] += amp * c;
            m[i] += 1;
        }
    }
    let mut g = DMatrix::zeros(d, d);
    for row in v.chunks(d) {
        for i in 0..d {
            for j in 0..d {
                g[(i, j)] += row[i] * row[j].conj();
            }
        }
    }
    Rdm::from_matrix(1, d, g / C64::new(n as f64, 0.0))
}

/// `γ⁽²⁾` with full-space entries `⟨a_k†a_l†a_j a_i⟩/(N(N-1))`.
pub fn rdm2(psi: &[C64], fock: &FockBasis) -> Result<Rdm> {
    let n = fock.particles();
    let d = fock.modes();
    if n < 2 {
        return Err(Error::InvalidParameter("two-body RDM needs N ≥ 2".into()));
    }
    let lower = FockBasis::new(n - 2, d, usize::MAX)?;
    let pairs = symmetric_pairs(d);
    let np = pairs.len();
    // s[m][p] = ⟨m| a_j a_i |Ψ⟩ in the normalized symmetric pair basis
    let mut s = vec![C64::new(0.0, 0.0); lower.len() * np];
    let sqrt2 = std::f64::consts::SQRT_2;
    for (idx, state) in fock.states().iter().enumerate() {
        let amp = psi[idx];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let mut m = state.clone();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if m[i] == 0 {
                continue;
            }
            let ci = (m[i] as f64).sqrt();
            m[i] -= 1;
            if m[j] > 0 {
                let cj = (m[j] as f64).sqrt();
                m[j] -= 1;
                let factor = if i == j { 1.0 } else { sqrt2 };
                s[lower.rank(&m) * np + p] += amp * (ci * cj * factor);
                m[j] += 1;
            }
            m[i] += 1;
        }
    }
    let mut g = DMatrix::zeros(np, np);
    for row in s.chunks(np) {
        for a in 0..np {
            if row[a] == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..np {
                g[(a, b)] += row[a] * row[b].conj();
            }
        }
    }
    Rdm::from_matrix(2, d, g / C64::new((n * (n - 1)) as f64, 0.0))
}

pub fn rdm(result: &ManyBodyResult, fock: &FockBasis, k: usize) -> Result<Rdm> {
    if result.psi.len() != fock.len() {
        return Err(Error::InvalidParameter("state does not live on this Fock basis".into()));
    }
    match k {
        1 => rdm1(&result.psi, fock),
        2 => rdm2(&result.psi, fock),
        _ => Err(Error::InvalidParameter(format!("k = {k} not in {{1, 2}}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unit_vector;

    #[test]
    fn condensate_rdms() {
        let fock = FockBasis::new(4, 3, 1000).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); fock.len()];
        psi[0] = C64::new(1.0, 0.0);
        let g1 = rdm1(&psi, &fock).unwrap();
        assert!((g1.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((g1.trace() - 1.0).abs() < 1e-14);
        let g2 = rdm2(&psi, &fock).unwrap();
        assert!((g2.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_state_invariants_and_partial_trace() {
        let fock = FockBasis::new(3, 3, 1000).unwrap();
        let psi = random_unit_vector(fock.len(), 9);
        let g1 = rdm1(&psi, &fock).unwrap();
        let g2 = rdm2(&psi, &fock).unwrap();
        for g in [&g1, &g2] {
            assert!((g.trace() - 1.0).abs() < 1e-10);
            assert!(g.hermiticity_defect() < 1e-12);
            assert!(g.min_eigenvalue() > -1e-10);
        }
        let pt = g2.partial_trace();
        assert!((pt - g1.matrix()).iter().all(|z| z.norm() < 1e-10));
    }
}
