use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Uniform periodic grid on the square `[-L, L)²` with `n` points per axis.
///
/// Point `(ix, iy)` sits at `(-L + ix·Δ, -L + iy·Δ)` with `Δ = 2L/n` and is
/// stored at flat index `iy·n + ix`. The dual momentum lattice is
/// `(π/L)·{-n/2, …, n/2-1}²`, indexed in FFT order.
#[derive(Clone)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
    wavenumbers: Arc<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

impl Grid2D {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = std::f64::consts::PI / half_width;
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect();
        Ok(Self { n, half_width, wavenumbers: Arc::new(wavenumbers), forward, inverse })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Momentum lattice spacing `π/L`.
    pub fn dk(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Position of the flat index `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx % self.n), self.coord(idx / self.n))
    }

    /// Wavenumbers along one axis in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Momentum of the flat FFT index `idx`.
    pub fn momentum(&self, idx: usize) -> (f64, f64) {
        (self.wavenumbers[idx % self.n], self.wavenumbers[idx / self.n])
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let (kx, ky) = self.momentum(idx);
        kx * kx + ky * ky
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Trapezoidal (= rectangle, periodic) quadrature of real samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn integrate_c(&self, values: &[C64]) -> C64 {
        values.iter().sum::<C64>() * self.cell_area()
    }

    /// Unnormalized forward 2D DFT in place.
    pub fn fft(&self, data: &mut [C64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse 2D DFT in place, including the `1/n²` normalization.
    pub fn ifft(&self, data: &mut [C64]) {
        self.transform(data, &self.inverse);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn transform(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match grid");
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }

    /// Apply a diagonal multiplier in momentum space.
    pub fn apply_symbol(&self, data: &mut [C64], symbol: impl Fn(f64, f64) -> C64) {
        self.fft(data);
        for (idx, v) in data.iter_mut().enumerate() {
            let (kx, ky) = self.momentum(idx);
            *v *= symbol(kx, ky);
        }
        self.ifft(data);
    }
}

fn transpose(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(6, 1.0).is_err());
        assert!(Grid2D::new(9, 1.0).is_err());
        assert!(Grid2D::new(16, 0.0).is_err());
        assert!(Grid2D::new(16, 1.0).is_ok());
    }

    #[test]
    fn constant_integrates_to_box_area() {
        let g = Grid2D::new(64, 3.5).unwrap();
        let ones = vec![1.0; g.len()];
        let area = (2.0 * 3.5f64).powi(2);
        assert!((g.integrate(&ones) - area).abs() < 1e-12 * area);
    }

    #[test]
    fn momentum_lattice_is_dual() {
        let g = Grid2D::new(16, 2.0).unwrap();
        let k = g.wavenumbers();
        // e^{i k x} must be periodic over the box for every lattice momentum.
        for &kk in k {
            let phase = kk * 2.0 * g.half_width();
            let turns = phase / (2.0 * std::f64::consts::PI);
            assert!((turns - turns.round()).abs() < 1e-12);
        }
        assert_eq!(k[8], -8.0 * std::f64::consts::PI / 2.0);
    }

    #[test]
    fn fft_round_trip() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let orig: Vec<C64> = (0..g.len())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        g.fft(&mut data);
        g.ifft(&mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
