use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::field::Grid2D;
use crate::C64;

/// Complex-valued function sampled on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid2D,
    values: Vec<C64>,
}

impl Field {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Grid2D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = grid.points().map(|(x, y)| f(x, y)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_real_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| C64::new(f(x, y), 0.0))
    }

    /// Normalized harmonic-oscillator ground state `π^{-1/2} e^{-|x|²/2}`.
    pub fn gaussian(grid: &Grid2D) -> Self {
        let c = std::f64::consts::PI.powf(-0.5);
        Self::from_real_fn(grid, |x, y| c * (-(x * x + y * y) / 2.0).exp())
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// `⟨self, other⟩ = ∫ conj(self)·other`.
    pub fn inner(&self, other: &Field) -> C64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_area()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `∫|u|⁴`.
    pub fn quartic(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * self.grid.cell_area()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn scale(&mut self, s: C64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: f64) -> Field {
        let mut out = self.clone();
        out.scale(C64::new(s, 0.0));
        out
    }

    /// Rescale to unit L² norm; fails on the zero field.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Degenerate("cannot normalize the zero field".into()));
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(())
    }

    pub fn normalized(&self) -> Result<Field> {
        let mut out = self.clone();
        out.normalize()?;
        Ok(out)
    }

    /// `self + s·other`.
    pub fn axpy(&mut self, s: C64, other: &Field) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    /// Continuous Fourier transform `û(k) = ∫u e^{-ik·x} dx` on the momentum
    /// lattice, in FFT order.
    pub fn to_momentum(&self) -> Vec<C64> {
        let mut data = self.values.clone();
        self.grid.fft(&mut data);
        let area = self.grid.cell_area();
        let l = self.grid.half_width();
        for (idx, v) in data.iter_mut().enumerate() {
            let (kx, ky) = self.grid.momentum(idx);
            // shift of the first sample from the origin to (-L, -L)
            *v *= C64::from_polar(area, (kx + ky) * l);
        }
        data
    }

    /// Inverse of [`Field::to_momentum`].
    pub fn from_momentum(grid: &Grid2D, mut data: Vec<C64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch("momentum samples do not match grid".into()));
        }
        let area = grid.cell_area();
        let l = grid.half_width();
        for (idx, v) in data.iter_mut().enumerate() {
            let (kx, ky) = grid.momentum(idx);
            *v *= C64::from_polar(1.0 / area, -(kx + ky) * l);
        }
        grid.ifft(&mut data);
        Field::from_values(grid, data)
    }

    /// `(2π)^{-2} Σ_k |û(k)|² Δk²`, the momentum-side L² norm.
    pub fn momentum_norm_sq(&self) -> f64 {
        let dk = self.grid.dk();
        let s: f64 = self.to_momentum().iter().map(|v| v.norm_sqr()).sum();
        s * dk * dk / (4.0 * std::f64::consts::PI.powi(2))
    }

    /// Spectral gradient `(∂ₓu, ∂ᵧu)`.
    pub fn gradient(&self) -> (Field, Field) {
        let mut dx = self.values.clone();
        let mut dy = self.values.clone();
        self.grid.apply_symbol(&mut dx, |kx, _| C64::new(0.0, kx));
        self.grid.apply_symbol(&mut dy, |_, ky| C64::new(0.0, ky));
        (
            Field { grid: self.grid.clone(), values: dx },
            Field { grid: self.grid.clone(), values: dy },
        )
    }

    /// `-Δu` computed spectrally.
    pub fn neg_laplacian(&self) -> Field {
        let mut out = self.values.clone();
        self.grid.apply_symbol(&mut out, |kx, ky| C64::new(kx * kx + ky * ky, 0.0));
        Field { grid: self.grid.clone(), values: out }
    }

    /// `∫|∇u|²`, evaluated in momentum space.
    pub fn kinetic(&self) -> f64 {
        let mut data = self.values.clone();
        self.grid.fft(&mut data);
        let s: f64 = data
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.k_squared(i) * v.norm_sqr())
            .sum();
        s * self.grid.cell_area() / self.grid.len() as f64
    }

    /// `(∫|x|²|u|²)^{1/2}`.
    pub fn width(&self) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (x, y) = self.grid.point(i);
                (x * x + y * y) * v.norm_sqr()
            })
            .sum();
        (s * self.grid.cell_area()).sqrt()
    }

    /// Write the field in the text layout: a header with `n`, `L` and a kind
    /// tag, followed by `n²` row-major `re im` pairs.
    pub fn write_text<W: Write>(&self, mut out: W, kind: &str) -> Result<()> {
        writeln!(out, "bose2d-field v1")?;
        writeln!(out, "n {}", self.grid.n())?;
        writeln!(out, "L {:e}", self.grid.half_width())?;
        writeln!(out, "kind {kind}")?;
        for v in &self.values {
            writeln!(out, "{:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Read a field written by [`Field::write_text`]; returns it with its kind tag.
    pub fn read_text<R: BufRead>(input: R) -> Result<(Field, String)> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing {what}")))?
                .map_err(Error::from)
        };
        if next("magic")?.trim() != "bose2d-field v1" {
            return Err(Error::Format("bad magic line".into()));
        }
        let header = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .map(|s| s.trim().to_string())
                .ok_or_else(|| Error::Format(format!("expected `{key}` header")))
        };
        let n: usize = header(next("n")?, "n ")?
            .parse()
            .map_err(|e| Error::Format(format!("n: {e}")))?;
        let l: f64 = header(next("L")?, "L ")?
            .parse()
            .map_err(|e| Error::Format(format!("L: {e}")))?;
        let kind = header(next("kind")?, "kind")?;
        let grid = Grid2D::new(n, l)?;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let line = next("sample")?;
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next()) {
                (Some(Ok(re)), Some(Ok(im))) => values.push(C64::new(re, im)),
                _ => return Err(Error::Format(format!("malformed sample {i}"))),
            }
        }
        Ok((Field::from_values(&grid, values)?, kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid2D {
        Grid2D::new(64, 6.0).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_with_unit_kinetic_energy() {
        let u = Field::gaussian(&grid());
        assert!((u.norm_sq() - 1.0).abs() < 1e-12);
        // ∫|∇u|² = 1 and ∫|u|⁴ = 1/(2π) for the oscillator ground state
        assert!((u.kinetic() - 1.0).abs() < 1e-10);
        assert!((u.quartic() - 0.5 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_analytic() {
        let u = Field::gaussian(&Grid2D::new(96, 9.0).unwrap());
        let (dx, _) = u.gradient();
        for (i, v) in dx.values().iter().enumerate() {
            let (x, _) = u.grid().point(i);
            assert!((v - (-x) * u.values()[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn momentum_round_trip() {
        let g = grid();
        let u = Field::from_fn(&g, |x, y| C64::new((-x * x - 0.5 * y * y).exp(), x * (-(x * x + y * y)).exp()));
        let back = Field::from_momentum(&g, u.to_momentum()).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-13);
        }
        // û(0) = ∫u
        let int = g.integrate_c(u.values());
        assert!((u.to_momentum()[0] - int).norm() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let u = Field::from_fn(&Grid2D::new(8, 1.5).unwrap(), |x, y| C64::new(x.sin(), y * 0.3));
        let mut buf = Vec::new();
        u.write_text(&mut buf, "wavefunction").unwrap();
        let (v, kind) = Field::read_text(buf.as_slice()).unwrap();
        assert_eq!(kind, "wavefunction");
        assert_eq!(u, v);
    }

    #[test]
    fn read_rejects_truncated_input() {
        let text = "bose2d-field v1\nn 8\nL 1\nkind x\n0 0\n";
        assert!(Field::read_text(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn parseval(coeffs in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let g = Grid2D::new(32, 4.0).unwrap();
            let u = Field::from_fn(&g, |x, y| {
                let env = (-(x * x + y * y) / 2.0).exp();
                let mut re = 0.0;
                let mut im = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    let p = (j / 3) as i32;
                    let q = (j % 3) as i32;
                    re += c * x.powi(p) * y.powi(q);
                    im += c * x.powi(q) * y.powi(p) * 0.5;
                }
                C64::new(re * env, im * env)
            });
            let a = u.norm_sq();
            let b = u.momentum_norm_sq();
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        }
    }
}
