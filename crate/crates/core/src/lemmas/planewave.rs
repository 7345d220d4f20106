use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::manybody::{hermite_functions, ModeBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Cos,
    Sin,
}

/// Multiplication by `cos(k·x)` or `sin(k·x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveOp {
    pub k: (f64, f64),
    pub parity: Parity,
}

impl PlaneWaveOp {
    pub fn cos(kx: f64, ky: f64) -> Self {
        Self { k: (kx, ky), parity: Parity::Cos }
    }

    pub fn sin(kx: f64, ky: f64) -> Self {
        Self { k: (kx, ky), parity: Parity::Sin }
    }

    pub fn modulus(&self) -> f64 {
        self.k.0.hypot(self.k.1)
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let phase = self.k.0 * x + self.k.1 * y;
        match self.parity {
            Parity::Cos => phase.cos(),
            Parity::Sin => phase.sin(),
        }
    }
}

/// `⟨φ_a|cos(kx)|φ_b⟩` and `⟨φ_a|sin(kx)|φ_b⟩` for 1D Hermite functions
/// `a, b ≤ max_n`, by trapezoidal quadrature fine enough to resolve `k`.
fn hermite_trig_matrices(max_n: usize, k: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let reach = (2.0 * max_n as f64 + 1.0).sqrt();
    let half = reach + 12.0;
    let dx = std::f64::consts::PI / (k.abs() + 2.0 * reach + 10.0) / 2.0;
    let m = (2.0 * half / dx).ceil() as usize + 1;
    let dx = 2.0 * half / (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| -half + i as f64 * dx).collect();
    let psi = hermite_functions(max_n, &xs);
    let c: Vec<f64> = xs.iter().map(|x| (k * x).cos()).collect();
    let s: Vec<f64> = xs.iter().map(|x| (k * x).sin()).collect();
    let entry = |a: usize, b: usize, t: &[f64]| -> f64 {
        psi[a].iter().zip(&psi[b]).zip(t).map(|((p, q), w)| p * q * w).sum::<f64>() * dx
    };
    let cm = DMatrix::from_fn(max_n + 1, max_n + 1, |a, b| entry(a, b, &c));
    let sm = DMatrix::from_fn(max_n + 1, max_n + 1, |a, b| entry(a, b, &s));
    (cm, sm)
}

/// The real `d × d` matrix `⟨φ_i|b_k|φ_j⟩`.
pub fn plane_wave_matrix(basis: &ModeBasis, op: &PlaneWaveOp) -> Result<DMatrix<f64>> {
    if !basis.is_real() {
        return Err(Error::Precondition("plane-wave norms need a basis without magnetic field".into()));
    }
    let d = basis.dim();
    if let Some(sep) = basis.separable() {
        // cos(kx x + ky y) = cx cy - sx sy, sin(kx x + ky y) = sx cy + cx sy
        let max_n = sep.quanta.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        let (cx, sx) = hermite_trig_matrices(max_n, op.k.0);
        let (cy, sy) = hermite_trig_matrices(max_n, op.k.1);
        let q = &sep.quanta;
        return Ok(DMatrix::from_fn(d, d, |i, j| {
            let ((ax, ay), (bx, by)) = (q[i], q[j]);
            match op.parity {
                Parity::Cos => cx[(ax, bx)] * cy[(ay, by)] - sx[(ax, bx)] * sy[(ay, by)],
                Parity::Sin => sx[(ax, bx)] * cy[(ay, by)] + cx[(ax, bx)] * sy[(ay, by)],
            }
        }));
    }
    let grid = basis.grid();
    let nyquist = std::f64::consts::PI / grid.spacing();
    if op.k.0.abs().max(op.k.1.abs()) > 0.5 * nyquist {
        return Err(Error::InvalidParameter(format!(
            "|k| component {:.3} exceeds half the grid Nyquist momentum {:.3}",
            op.k.0.abs().max(op.k.1.abs()),
            nyquist
        )));
    }
    let mult: Vec<f64> = grid.points().map(|(x, y)| op.eval(x, y)).collect();
    let area = grid.cell_area();
    let modes = basis.modes();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: f64 = modes[i]
                .values()
                .iter()
                .zip(modes[j].values())
                .zip(&mult)
                .map(|((a, b), w)| (a.conj() * b).re * w)
                .sum::<f64>()
                * area;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Spectral norm of `P b_k P` on the range of the basis.
pub fn plane_wave_norm(basis: &ModeBasis, op: &PlaneWaveOp) -> Result<f64> {
    let m = plane_wave_matrix(basis, op)?;
    let (vals, _) = symmetric_eigen(&m);
    Ok(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaneWaveSample {
    pub k: f64,
    pub parity: Parity,
    pub norm: f64,
    /// `norm · |k| / Λ^{1/2}`.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaneWaveSweep {
    pub cutoff: f64,
    pub modes: usize,
    pub samples: Vec<PlaneWaveSample>,
    /// Smallest `C` with `norm ≤ C Λ^{1/2}/|k|` over the sweep.
    pub fitted_c: f64,
    pub max_norm: f64,
}

/// Norms of `P cos(k·x) P` and `P sin(k·x) P` for `k = |k|·direction` over
/// the given moduli, with the fitted envelope constant.
pub fn plane_wave_sweep(basis: &ModeBasis, moduli: &[f64], direction: (f64, f64)) -> Result<PlaneWaveSweep> {
    let len = direction.0.hypot(direction.1);
    if len == 0.0 {
        return Err(Error::InvalidParameter("sweep direction must be nonzero".into()));
    }
    let (ex, ey) = (direction.0 / len, direction.1 / len);
    let root = basis.cutoff().sqrt();
    let mut samples = Vec::with_capacity(2 * moduli.len());
    for &k in moduli {
        for parity in [Parity::Cos, Parity::Sin] {
            let norm = plane_wave_norm(basis, &PlaneWaveOp { k: (k * ex, k * ey), parity })?;
            samples.push(PlaneWaveSample { k, parity, norm, scaled: norm * k / root });
        }
    }
    let fitted_c = samples.iter().map(|s| s.scaled).fold(0.0, f64::max);
    let max_norm = samples.iter().map(|s| s.norm).fold(0.0, f64::max);
    Ok(PlaneWaveSweep { cutoff: basis.cutoff(), modes: basis.dim(), samples, fitted_c, max_norm })
}
