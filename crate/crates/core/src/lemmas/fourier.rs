use std::f64::consts::PI;

use crate::error::Result;
use crate::field::{Grid2D, InteractionSpec, ScaledInteraction};

/// Pairs `(x, y)` of points at which the decomposition is tested.
pub type PointPair = ((f64, f64), (f64, f64));

/// `(2π)^{-2} Σ_k ŵ(N^{-β}k) [cos(k·x)cos(k·y) + sin(k·x)sin(k·y)] Δk²`
/// over the momentum lattice of `grid`.
pub fn reconstruct_pair(weights: &[f64], grid: &Grid2D, x: (f64, f64), y: (f64, f64)) -> f64 {
    let dk2 = grid.dk() * grid.dk();
    let mut sum = 0.0;
    for (idx, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let (kx, ky) = grid.momentum(idx);
        let (px, py) = (kx * x.0 + ky * x.1, kx * y.0 + ky * y.1);
        sum += w * (px.cos() * py.cos() + px.sin() * py.sin());
    }
    sum * dk2 / (4.0 * PI * PI)
}

/// Largest absolute error of the plane-wave reconstruction of
/// `N^{2β} w(N^β(x - y))` over the sample pairs.
pub fn fourier_decomposition_check(
    w: &InteractionSpec,
    particles: usize,
    beta: f64,
    grid: &Grid2D,
    samples: &[PointPair],
) -> Result<f64> {
    let scaled = ScaledInteraction::new(w, particles, beta)?;
    scaled.check_resolved(grid)?;
    let weights = scaled.weights(grid);
    Ok(samples
        .iter()
        .map(|&(x, y)| {
            let exact = scaled.eval(x.0 - y.0, x.1 - y.1);
            (reconstruct_pair(&weights, grid, x, y) - exact).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_reconstruction() {
        let g = Grid2D::new(128, 6.0).unwrap();
        let w = InteractionSpec::gaussian(1.0, 1.0);
        let err = fourier_decomposition_check(&w, 8, 0.5, &g, &[((0.3, -0.2), (0.3, -0.2))]).unwrap();
        let peak = ScaledInteraction::new(&w, 8, 0.5).unwrap().eval(0.0, 0.0).abs();
        assert!(err / peak < 1e-4, "{err}");
        let zero = fourier_decomposition_check(&InteractionSpec::zero(), 8, 0.5, &g, &[((0.0, 0.0), (1.0, 1.0))]);
        assert_eq!(zero.unwrap(), 0.0);
    }
}
