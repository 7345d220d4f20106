use crate::error::{Error, Result};
use crate::field::{Field, Grid2D, InteractionSpec, PotentialSpec, VectorPotentialSpec};
use crate::C64;

/// Discretized one-body operator `h = (-i∇ + A)² + V` on a fixed grid.
///
/// The magnetic part is applied in the symmetric form
/// `Σ_c [p_c(A_c u) + A_c p_c u] + |A|²u` with spectral `p = -i∇`, which
/// equals `-i(∇·A)u - 2iA·∇u + |A|²u` and keeps the discrete operator
/// exactly Hermitian.
#[derive(Clone, Debug)]
pub struct OneBodyOperator {
    grid: Grid2D,
    potential: Vec<f64>,
    vector_potential: Option<(Vec<f64>, Vec<f64>)>,
}

impl OneBodyOperator {
    pub fn new(grid: &Grid2D, v: &PotentialSpec, a: &VectorPotentialSpec) -> Result<Self> {
        Ok(Self { grid: grid.clone(), potential: v.sample(grid)?, vector_potential: a.sample(grid)? })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn is_magnetic(&self) -> bool {
        self.vector_potential.is_some()
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "field on {:?}, operator sampled on {:?}",
                u.grid(),
                self.grid
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        self.apply_slice(u.values(), &mut out);
        Field::from_values(&self.grid, out)
    }

    /// `out = h·u` on raw sample vectors.
    pub fn apply_slice(&self, u: &[C64], out: &mut [C64]) {
        let g = &self.grid;
        let mut hat = u.to_vec();
        g.fft(&mut hat);
        out.copy_from_slice(&hat);
        for (i, v) in out.iter_mut().enumerate() {
            *v *= g.k_squared(i);
        }
        g.ifft(out);
        for ((o, ui), vi) in out.iter_mut().zip(u).zip(&self.potential) {
            *o += vi * ui;
        }
        let Some((ax, ay)) = &self.vector_potential else { return };
        for (axis, a) in [ax, ay].into_iter().enumerate() {
            let k_of = |i: usize| {
                let (kx, ky) = g.momentum(i);
                if axis == 0 { kx } else { ky }
            };
            // A_c·(p_c u)
            let mut pu: Vec<C64> = hat.iter().enumerate().map(|(i, v)| v * k_of(i)).collect();
            g.ifft(&mut pu);
            // p_c(A_c u)
            let mut pau: Vec<C64> = u.iter().zip(a).map(|(v, a)| v * a).collect();
            g.fft(&mut pau);
            for (i, v) in pau.iter_mut().enumerate() {
                *v *= k_of(i);
            }
            g.ifft(&mut pau);
            for (i, o) in out.iter_mut().enumerate() {
                *o += pau[i] + a[i] * pu[i] + a[i] * a[i] * u[i];
            }
        }
    }

    /// `⟨u|h|u⟩`.
    pub fn expectation(&self, u: &Field) -> Result<f64> {
        Ok(u.inner(&self.apply(u)?).re)
    }
}

/// `h·u` for the given trap and vector potential.
pub fn apply_one_body(u: &Field, v: &PotentialSpec, a: &VectorPotentialSpec) -> Result<Field> {
    OneBodyOperator::new(u.grid(), v, a)?.apply(u)
}

/// The pair potential at particle number `N` and dilution exponent `β`:
/// `x ↦ N^{2β} w(N^β x)`.
#[derive(Clone, Debug)]
pub struct ScaledInteraction {
    spec: InteractionSpec,
    particles: usize,
    beta: f64,
    dilation: f64,
}

impl ScaledInteraction {
    pub fn new(spec: &InteractionSpec, particles: usize, beta: f64) -> Result<Self> {
        if particles < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {particles}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("β must lie in (0, 1), got {beta}")));
        }
        Ok(Self::unchecked(spec, particles, beta))
    }

    /// No range checks on `(N, β)`; used for the unscaled `β = 0` kernel.
    pub(crate) fn unchecked(spec: &InteractionSpec, particles: usize, beta: f64) -> Self {
        let dilation = (particles as f64).powf(beta);
        Self { spec: spec.clone(), particles, beta, dilation }
    }

    pub fn spec(&self) -> &InteractionSpec {
        &self.spec
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `N^β`.
    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.dilation * self.dilation * self.spec.eval(self.dilation * x, self.dilation * y)
    }

    /// `ŵ(N^{-β}k)`, the transform of the scaled potential.
    pub fn fourier(&self, kx: f64, ky: f64) -> f64 {
        self.spec.fourier(kx / self.dilation, ky / self.dilation)
    }

    pub fn effective_range(&self) -> f64 {
        self.spec.min_range() / self.dilation
    }

    /// The scaled range must span at least two grid spacings.
    pub fn check_resolved(&self, grid: &Grid2D) -> Result<()> {
        let two = 2.0 * grid.spacing();
        if self.spec.is_zero() || self.effective_range() >= two {
            Ok(())
        } else {
            Err(Error::UnderResolved { range: self.effective_range(), two_spacings: two })
        }
    }

    /// Momentum-lattice weights `ŵ(N^{-β}k)` in FFT order.
    pub fn weights(&self, grid: &Grid2D) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let (kx, ky) = grid.momentum(i);
                self.fourier(kx, ky)
            })
            .collect()
    }
}

/// `N^{2β} w(N^β x)`.
pub fn scaled_interaction(w: &InteractionSpec, particles: usize, beta: f64, x: (f64, f64)) -> Result<f64> {
    Ok(ScaledInteraction::new(w, particles, beta)?.eval(x.0, x.1))
}

/// Samples `ŵ(N^{-β}k)` on the momentum lattice of `grid` such that
/// `(2π)^{-2} Σ_k ŵ(N^{-β}k) e^{ik·r} Δk²` reproduces the scaled potential.
pub fn fourier_weights(w: &InteractionSpec, particles: usize, beta: f64, grid: &Grid2D) -> Result<Vec<f64>> {
    Ok(ScaledInteraction::new(w, particles, beta)?.weights(grid))
}

/// Periodic convolution `∫ w_N(x - y) f(y) dy` with precomputed momentum weights.
pub fn convolve(grid: &Grid2D, weights: &[f64], f: &[C64]) -> Vec<C64> {
    let mut data = f.to_vec();
    grid.fft(&mut data);
    for (v, w) in data.iter_mut().zip(weights) {
        *v *= w;
    }
    grid.ifft(&mut data);
    data
}

/// Real convolution of a density.
pub fn convolve_real(grid: &Grid2D, weights: &[f64], f: &[f64]) -> Vec<f64> {
    let c: Vec<C64> = f.iter().map(|v| C64::new(*v, 0.0)).collect();
    convolve(grid, weights, &c).into_iter().map(|v| v.re).collect()
}
