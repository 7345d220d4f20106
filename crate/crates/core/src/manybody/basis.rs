use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Grid2D, OneBodyOperator, PotentialSpec, VectorPotentialSpec};
use crate::linalg::{lobpcg, symmetric_eigen, BlockEigenOptions};
use crate::C64;

/// How many one-body modes to keep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeSelection {
    /// The lowest `d` eigenmodes.
    Count(usize),
    /// All eigenmodes with energy at most `Λ`, widened to whole levels.
    Cutoff(f64),
}

/// Phase convention applied to every mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// The largest-magnitude grid value is real and positive.
    LargestComponentPositive,
}

#[derive(Clone, Debug)]
pub struct ModeBasisOptions {
    /// Largest admissible number of modes.
    pub cap: usize,
    /// Eigen-residual target `‖hφ - εφ‖₂` per mode.
    pub tol: f64,
    pub seed: u64,
    /// Relative spacing below which two eigenvalues count as one level.
    pub level_tol: f64,
}

impl Default for ModeBasisOptions {
    fn default() -> Self {
        Self { cap: 400, tol: 1e-8, seed: 0, level_tol: 1e-6 }
    }
}

/// Orthonormal eigenmodes of the one-body operator `h`, in ascending order.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    grid: Grid2D,
    modes: Vec<Field>,
    energies: Vec<f64>,
    residuals: Vec<f64>,
    cutoff: f64,
    requested_cutoff: Option<f64>,
    split_level: bool,
    gauge: Gauge,
    real: bool,
    /// Oscillator quantum numbers and 1D factors when built analytically.
    separable: Option<Separable>,
}

#[derive(Clone, Debug)]
pub(crate) struct Separable {
    pub quanta: Vec<(usize, usize)>,
}

fn cluster_tol(level_tol: f64, e: f64) -> f64 {
    level_tol * e.abs().max(1.0)
}

/// Number of modes to keep out of the ascending `energies`, plus whether a
/// level is cut and the effective cutoff.
fn select_count(energies: &[f64], selection: ModeSelection, level_tol: f64) -> Result<(usize, bool)> {
    match selection {
        ModeSelection::Count(d) => {
            if d == 0 || d > energies.len() {
                return Err(Error::InvalidParameter(format!("mode count {d} out of range")));
            }
            let split = d < energies.len() && energies[d] - energies[d - 1] < cluster_tol(level_tol, energies[d - 1]);
            Ok((d, split))
        }
        ModeSelection::Cutoff(lambda) => {
            let slack = cluster_tol(level_tol, lambda);
            let mut d = energies.iter().take_while(|&&e| e <= lambda + slack).count();
            if d == 0 {
                return Err(Error::InvalidParameter(format!("cutoff {lambda} below the lowest level {}", energies[0])));
            }
            while d < energies.len() && energies[d] - energies[d - 1] < cluster_tol(level_tol, energies[d - 1]) {
                d += 1;
            }
            Ok((d, false))
        }
    }
}

fn fix_gauge(values: &mut [C64]) {
    // near-ties (symmetric grid points) go to the lowest index so that the
    // choice survives rounding noise
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let best = values.iter().position(|v| v.norm() >= max * (1.0 - 1e-6)).unwrap_or(0);
    let phase = values[best].conj() / values[best].norm();
    for v in values.iter_mut() {
        *v *= phase;
    }
}

/// Rotates every degenerate cluster to diagonalize `x² - y²`, ordered by
/// decreasing eigenvalue. For the oscillator this reproduces the Hermite
/// product states with `n_x` descending inside each level.
fn canonicalize_clusters(grid: &Grid2D, vectors: &mut [Vec<C64>], energies: &[f64], level_tol: f64) {
    let probe: Vec<f64> = grid.points().map(|(x, y)| x * x - y * y).collect();
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len() && energies[end] - energies[end - 1] < cluster_tol(level_tol, energies[end - 1]) {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let block = &vectors[start..end];
            let m = DMatrix::from_fn(size, size, |i, j| {
                block[i].iter().zip(&block[j]).zip(&probe).map(|((a, b), p)| (a.conj() * b).re * p).sum::<f64>()
            });
            let (vals, vecs) = symmetric_eigen(&m);
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
            let rotated: Vec<Vec<C64>> = order
                .iter()
                .map(|&c| {
                    let mut out = vec![C64::new(0.0, 0.0); block[0].len()];
                    for (r, v) in block.iter().enumerate() {
                        let coef = vecs[(r, c)];
                        for (o, x) in out.iter_mut().zip(v) {
                            *o += x * coef;
                        }
                    }
                    out
                })
                .collect();
            for (slot, v) in vectors[start..end].iter_mut().zip(rotated) {
                *slot = v;
            }
        }
        start = end;
    }
}

impl ModeBasis {
    /// Lowest eigenmodes of the discretized `h = (-i∇ + A)² + V`.
    pub fn build(
        v: &PotentialSpec,
        a: &VectorPotentialSpec,
        grid: &Grid2D,
        selection: ModeSelection,
        opts: &ModeBasisOptions,
    ) -> Result<Self> {
        let op = OneBodyOperator::new(grid, v, a)?;
        let real = !op.is_magnetic();
        let initial = match selection {
            ModeSelection::Count(d) => d,
            ModeSelection::Cutoff(_) => 8,
        };
        if initial > opts.cap {
            return Err(Error::Capacity(format!("{initial} modes requested, cap is {}", opts.cap)));
        }
        let mut wanted = initial;
        loop {
            // one spare level of guard vectors so the last level is complete
            let guard = (wanted / 2).max(4);
            let result = lobpcg(
                grid.len(),
                &|x: &[C64], y: &mut [C64]| op.apply_slice(x, y),
                &|r: &mut [C64]| {
                    grid.fft(r);
                    for (idx, z) in r.iter_mut().enumerate() {
                        *z /= grid.k_squared(idx) + 1.0;
                    }
                    grid.ifft(r);
                },
                &BlockEigenOptions {
                    wanted: wanted + 1,
                    block: wanted + guard,
                    tol: opts.tol,
                    max_iter: 2000,
                    seed: opts.seed,
                    real,
                },
            );
            if !result.converged {
                return Err(Error::Degenerate(format!(
                    "mode eigensolver did not converge (max residual {:e})",
                    result.residuals[..=wanted].iter().cloned().fold(0.0, f64::max)
                )));
            }
            let energies = result.values[..=wanted].to_vec();
            let complete = match selection {
                ModeSelection::Count(_) => true,
                ModeSelection::Cutoff(lambda) => {
                    let last = energies[wanted];
                    last > lambda + cluster_tol(opts.level_tol, lambda) && {
                        let (d, _) = select_count(&energies, selection, opts.level_tol)?;
                        d < energies.len()
                    }
                }
            };
            if !complete {
                if wanted * 2 > opts.cap {
                    return Err(Error::Capacity(format!(
                        "cutoff needs more than the cap of {} modes",
                        opts.cap
                    )));
                }
                wanted *= 2;
                continue;
            }
            let (d, split_level) = select_count(&energies, selection, opts.level_tol)?;
            if d > opts.cap {
                return Err(Error::Capacity(format!("{d} modes requested, cap is {}", opts.cap)));
            }
            let mut vectors = result.vectors[..d].to_vec();
            let energies = energies[..d].to_vec();
            if real {
                canonicalize_clusters(grid, &mut vectors, &energies, opts.level_tol);
            }
            let scale = 1.0 / grid.cell_area().sqrt();
            let mut modes = Vec::with_capacity(d);
            let mut residuals = Vec::with_capacity(d);
            let mut refined = Vec::with_capacity(d);
            for mut vec in vectors {
                fix_gauge(&mut vec);
                let field = Field::from_values(grid, vec.iter().map(|z| z * scale).collect())?;
                let hf = op.apply(&field)?;
                let e = field.inner(&hf).re;
                let mut r = hf;
                r.axpy(C64::new(-e, 0.0), &field);
                residuals.push(r.norm());
                refined.push(e);
                modes.push(field);
            }
            let requested_cutoff = match selection {
                ModeSelection::Cutoff(l) => Some(l),
                ModeSelection::Count(_) => None,
            };
            let cutoff = match selection {
                ModeSelection::Cutoff(l) => l.max(refined[d - 1]),
                ModeSelection::Count(_) => refined[d - 1],
            };
            return Ok(Self {
                grid: grid.clone(),
                modes,
                energies: refined,
                residuals,
                cutoff,
                requested_cutoff,
                split_level,
                gauge: Gauge::LargestComponentPositive,
                real,
                separable: None,
            });
        }
    }

    /// Hermite product modes of `-Δ + |x|²` with energies `2(n_x + n_y + 1)`,
    /// sampled on `grid`; levels ordered by `n_x` descending.
    pub fn harmonic_oscillator(grid: &Grid2D, selection: ModeSelection, cap: usize) -> Result<Self> {
        let max_level = match selection {
            ModeSelection::Count(d) => (0..).find(|&l: &usize| (l + 1) * (l + 2) / 2 >= d).unwrap_or(0),
            ModeSelection::Cutoff(lambda) => {
                if lambda < 2.0 {
                    return Err(Error::InvalidParameter(format!("cutoff {lambda} below the lowest level 2")));
                }
                ((lambda / 2.0 - 1.0).floor()) as usize
            }
        };
        let mut quanta = Vec::new();
        for level in 0..=max_level {
            for nx in (0..=level).rev() {
                quanta.push((nx, level - nx));
            }
        }
        let all: Vec<f64> = quanta.iter().map(|&(a, b)| 2.0 * (a + b + 1) as f64).collect();
        let (d, split_level) = match selection {
            ModeSelection::Count(d) => {
                if d == 0 {
                    return Err(Error::InvalidParameter("mode count must be positive".into()));
                }
                (d, d < all.len() && all[d] == all[d - 1])
            }
            ModeSelection::Cutoff(_) => (all.len(), false),
        };
        if d > cap {
            return Err(Error::Capacity(format!("{d} modes requested, cap is {cap}")));
        }
        quanta.truncate(d);
        let factors: Vec<Vec<f64>> =
            hermite_functions(max_level, &(0..grid.n()).map(|i| grid.coord(i)).collect::<Vec<_>>());
        let n = grid.n();
        let mut modes = Vec::with_capacity(d);
        for &(nx, ny) in &quanta {
            let mut vals = vec![C64::new(0.0, 0.0); grid.len()];
            for iy in 0..n {
                for ix in 0..n {
                    vals[iy * n + ix] = C64::new(factors[nx][ix] * factors[ny][iy], 0.0);
                }
            }
            fix_gauge(&mut vals);
            modes.push(Field::from_values(grid, vals)?);
        }
        let energies = all[..d].to_vec();
        let op = OneBodyOperator::new(grid, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero)?;
        let mut residuals = Vec::with_capacity(d);
        for (m, &e) in modes.iter().zip(&energies) {
            let mut r = op.apply(m)?;
            r.axpy(C64::new(-e, 0.0), m);
            residuals.push(r.norm());
        }
        let requested_cutoff = match selection {
            ModeSelection::Cutoff(l) => Some(l),
            ModeSelection::Count(_) => None,
        };
        Ok(Self {
            grid: grid.clone(),
            modes,
            cutoff: requested_cutoff.unwrap_or(energies[d - 1]).max(energies[d - 1]),
            energies,
            residuals,
            requested_cutoff,
            split_level,
            gauge: Gauge::LargestComponentPositive,
            real: true,
            separable: Some(Separable { quanta }),
        })
    }

    /// The first `d` modes as a basis of their own (a sub-projector).
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.dim() {
            return Err(Error::InvalidParameter(format!("cannot keep {d} of {} modes", self.dim())));
        }
        let mut out = self.clone();
        out.modes.truncate(d);
        out.energies.truncate(d);
        out.residuals.truncate(d);
        out.cutoff = out.energies[d - 1];
        out.requested_cutoff = None;
        out.split_level = d < self.dim() && self.energies[d] - self.energies[d - 1] < 1e-6 * self.energies[d - 1].abs().max(1.0);
        if let Some(s) = &mut out.separable {
            s.quanta.truncate(d);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn modes(&self) -> &[Field] {
        &self.modes
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `Λ`: the requested cutoff after widening, or `ε_d`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn requested_cutoff(&self) -> Option<f64> {
        self.requested_cutoff
    }

    /// True when the kept modes end inside a degenerate level.
    pub fn split_level(&self) -> bool {
        self.split_level
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub(crate) fn separable(&self) -> Option<&Separable> {
        self.separable.as_ref()
    }

    /// Overlap matrix `⟨φ_i|φ_j⟩`.
    pub fn gram(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.modes[i].inner(&self.modes[j]))
    }

    /// Coefficients `⟨φ_i|u⟩` and the defect `‖u‖² - Σ|c_i|²`.
    pub fn expand(&self, u: &Field) -> Result<(Vec<C64>, f64)> {
        u.same_grid(&self.modes[0])?;
        let c: Vec<C64> = self.modes.iter().map(|m| m.inner(u)).collect();
        let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        Ok((c, (u.norm_sq() - kept).max(0.0)))
    }

    /// `Σ c_i φ_i` on the grid.
    pub fn synthesize(&self, coeffs: &[C64]) -> Field {
        let mut out = Field::zeros(&self.grid);
        for (m, c) in self.modes.iter().zip(coeffs) {
            out.axpy(*c, m);
        }
        out
    }
}

/// Normalized Hermite functions `ψ_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}`
/// for `n ≤ max_n` by the stable three-term recurrence.
pub(crate) fn hermite_functions(max_n: usize, xs: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; xs.len()]; max_n + 1];
    for (i, &x) in xs.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
        out[0][i] = cur;
        for n in 1..=max_n {
            let next = x * (2.0 / n as f64).sqrt() * cur - ((n - 1) as f64 / n as f64).sqrt() * prev;
            prev = cur;
            cur = next;
            out[n][i] = cur;
        }
    }
    out
}
