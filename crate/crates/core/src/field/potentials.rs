use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid2D;

/// External trap `V`, together with the constants `(s, c)` of the growth
/// condition `V(x) ≥ |x|^s / c - c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub exponent: f64,
    pub trap_constant: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// `coefficient·|x|^exponent`
    Power { coefficient: f64 },
    /// `|x|²`
    Harmonic,
    /// Samples on a specific grid.
    Sampled { grid: Grid2D, values: Arc<Vec<f64>> },
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        Self { kind: PotentialKind::Harmonic, exponent: 2.0, trap_constant: 1.0 }
    }

    pub fn power(coefficient: f64, exponent: f64) -> Self {
        // coefficient·r^s ≥ r^s/c - c holds as soon as c ≥ 1/coefficient.
        let c = (1.0 / coefficient).max(1.0);
        Self { kind: PotentialKind::Power { coefficient }, exponent, trap_constant: c }
    }

    pub fn sampled(grid: &Grid2D, values: Vec<f64>, exponent: f64, trap_constant: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch("potential samples do not match grid".into()));
        }
        Ok(Self {
            kind: PotentialKind::Sampled { grid: grid.clone(), values: Arc::new(values) },
            exponent,
            trap_constant,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let r2 = x * x + y * y;
        match &self.kind {
            PotentialKind::Harmonic => Some(r2),
            PotentialKind::Power { coefficient } => Some(coefficient * r2.powf(self.exponent / 2.0)),
            PotentialKind::Sampled { .. } => None,
        }
    }

    pub fn sample(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        match &self.kind {
            PotentialKind::Sampled { grid: g, values } => {
                if g != grid {
                    return Err(Error::GridMismatch(format!(
                        "potential sampled on {g:?}, requested on {grid:?}"
                    )));
                }
                Ok(values.as_ref().clone())
            }
            _ => Ok(grid.points().map(|(x, y)| self.eval(x, y).unwrap()).collect()),
        }
    }

    /// Smallest slack `V(x) - (|x|^s/c - c)` over the grid.
    pub fn trapping_margin(&self, grid: &Grid2D) -> Result<f64> {
        let v = self.sample(grid)?;
        let c = self.trap_constant;
        Ok(grid
            .points()
            .zip(&v)
            .map(|((x, y), v)| v - ((x * x + y * y).powf(self.exponent / 2.0) / c - c))
            .fold(f64::INFINITY, f64::min))
    }
}

/// Magnetic vector potential `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorPotentialSpec {
    Zero,
    /// Symmetric gauge `A(x) = (B/2)(-x₂, x₁)` of a uniform field `B`.
    Uniform { field: f64 },
    Sampled { grid: Grid2D, ax: Arc<Vec<f64>>, ay: Arc<Vec<f64>> },
}

impl VectorPotentialSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Uniform { field } => *field == 0.0,
            Self::Sampled { ax, ay, .. } => ax.iter().chain(ay.iter()).all(|v| *v == 0.0),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        match self {
            Self::Zero => Some((0.0, 0.0)),
            Self::Uniform { field } => Some((-0.5 * field * y, 0.5 * field * x)),
            Self::Sampled { .. } => None,
        }
    }

    /// Components `(A₁, A₂)` on the grid, or `None` when `A ≡ 0`.
    pub fn sample(&self, grid: &Grid2D) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        if self.is_zero() {
            return Ok(None);
        }
        match self {
            Self::Sampled { grid: g, ax, ay } => {
                if g != grid {
                    return Err(Error::GridMismatch(format!(
                        "vector potential sampled on {g:?}, requested on {grid:?}"
                    )));
                }
                Ok(Some((ax.as_ref().clone(), ay.as_ref().clone())))
            }
            _ => {
                let (ax, ay) = grid.points().map(|(x, y)| self.eval(x, y).unwrap()).unzip();
                Ok(Some((ax, ay)))
            }
        }
    }

    /// `curl A = ∂₁A₂ - ∂₂A₁` at a point, by central differences.
    pub fn curl_fd(&self, x: f64, y: f64, h: f64) -> Option<f64> {
        let a = |x, y| self.eval(x, y);
        let (_, a2p) = a(x + h, y)?;
        let (_, a2m) = a(x - h, y)?;
        let (a1p, _) = a(x, y + h)?;
        let (a1m, _) = a(x, y - h)?;
        Some((a2p - a2m) / (2.0 * h) - (a1p - a1m) / (2.0 * h))
    }
}

/// Shape of the unscaled pair potential `w`.
#[derive(Clone, Debug, PartialEq)]
pub enum InteractionForm {
    /// `-g·exp(-|x|²/(2σ²))`
    Gaussian,
    /// `-g·(1 - |x|²/σ²)²` for `|x| < σ`, zero outside.
    CompactBump,
    /// Samples on a grid, bilinearly interpolated (zero outside the box).
    Sampled { grid: Grid2D, values: Arc<Vec<f64>> },
}

/// Unscaled interaction `w`: an attractive part of amplitude `strength` and
/// range `range`, plus an optional repulsive Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionSpec {
    pub form: InteractionForm,
    pub strength: f64,
    pub range: f64,
    pub repulsive: Option<RepulsivePart>,
}

/// `+g_r·exp(-|x|²/(2σ_r²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepulsivePart {
    pub strength: f64,
    pub range: f64,
}

impl InteractionSpec {
    pub fn zero() -> Self {
        Self { form: InteractionForm::Gaussian, strength: 0.0, range: 1.0, repulsive: None }
    }

    pub fn gaussian(strength: f64, range: f64) -> Self {
        Self { form: InteractionForm::Gaussian, strength, range, repulsive: None }
    }

    /// Attractive Gaussian of range `range` with `∫|w₋| = m_minus`.
    pub fn gaussian_with_negative_mass(m_minus: f64, range: f64) -> Self {
        Self::gaussian(m_minus / (2.0 * PI * range * range), range)
    }

    pub fn compact_bump(strength: f64, range: f64) -> Self {
        Self { form: InteractionForm::CompactBump, strength, range, repulsive: None }
    }

    pub fn sampled(grid: &Grid2D, values: Vec<f64>, range: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch("interaction samples do not match grid".into()));
        }
        Ok(Self {
            form: InteractionForm::Sampled { grid: grid.clone(), values: Arc::new(values) },
            strength: 1.0,
            range,
            repulsive: None,
        })
    }

    pub fn with_repulsion(mut self, strength: f64, range: f64) -> Self {
        self.repulsive = Some(RepulsivePart { strength, range });
        self
    }

    pub fn is_zero(&self) -> bool {
        let attractive_zero = match &self.form {
            InteractionForm::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
            _ => self.strength == 0.0,
        };
        attractive_zero && self.repulsive.map_or(true, |r| r.strength == 0.0)
    }

    /// Smallest length scale carried by `w`.
    pub fn min_range(&self) -> f64 {
        match self.repulsive {
            Some(r) if r.strength != 0.0 => self.range.min(r.range),
            _ => self.range,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        let s2 = self.range * self.range;
        let base = match &self.form {
            InteractionForm::Gaussian => -self.strength * (-r2 / (2.0 * s2)).exp(),
            InteractionForm::CompactBump => {
                if r2 < s2 {
                    -self.strength * (1.0 - r2 / s2).powi(2)
                } else {
                    0.0
                }
            }
            InteractionForm::Sampled { grid, values } => bilinear(grid, values, x, y),
        };
        base + self.repulsive.map_or(0.0, |r| {
            r.strength * (-r2 / (2.0 * r.range * r.range)).exp()
        })
    }

    /// `ŵ(k) = ∫ w(x) e^{-ik·x} dx` (real part; `w` even makes it real).
    pub fn fourier(&self, kx: f64, ky: f64) -> f64 {
        let k2 = kx * kx + ky * ky;
        let s2 = self.range * self.range;
        let base = match &self.form {
            InteractionForm::Gaussian => -self.strength * 2.0 * PI * s2 * (-s2 * k2 / 2.0).exp(),
            InteractionForm::CompactBump => {
                let q = k2.sqrt() * self.range;
                -self.strength * 2.0 * PI * s2 * bump_profile(q)
            }
            InteractionForm::Sampled { grid, values } => {
                let area = grid.cell_area();
                grid.points()
                    .zip(values.iter())
                    .map(|((x, y), w)| w * (kx * x + ky * y).cos())
                    .sum::<f64>()
                    * area
            }
        };
        base + self.repulsive.map_or(0.0, |r| {
            let rs2 = r.range * r.range;
            r.strength * 2.0 * PI * rs2 * (-rs2 * k2 / 2.0).exp()
        })
    }

    /// `b = ∫ w`.
    pub fn integral(&self) -> f64 {
        self.fourier(0.0, 0.0)
    }

    /// `m⁻ = ∫ |w₋|`.
    pub fn negative_mass(&self) -> f64 {
        match (&self.form, self.repulsive) {
            (InteractionForm::Gaussian, None) => 2.0 * PI * self.range.powi(2) * self.strength.max(0.0),
            (InteractionForm::CompactBump, None) => PI * self.range.powi(2) * self.strength.max(0.0) / 3.0,
            (InteractionForm::Sampled { grid, values }, _) => {
                grid.integrate(&values.iter().map(|v| (-v).max(0.0)).collect::<Vec<_>>())
            }
            _ => self.radial_integral(|w| (-w).max(0.0)),
        }
    }

    /// `∫ w²`.
    pub fn square_integral(&self) -> f64 {
        match &self.form {
            InteractionForm::Sampled { grid, values } => {
                grid.integrate(&values.iter().map(|v| v * v).collect::<Vec<_>>())
            }
            _ => self.radial_integral(|w| w * w),
        }
    }

    /// `∫ |w|`.
    pub fn abs_integral(&self) -> f64 {
        match &self.form {
            InteractionForm::Sampled { grid, values } => {
                grid.integrate(&values.iter().map(|v| v.abs()).collect::<Vec<_>>())
            }
            _ => self.radial_integral(f64::abs),
        }
    }

    /// `2π ∫₀^∞ f(w(r)) r dr` by composite Simpson, for the radial forms.
    fn radial_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        let reach = match self.repulsive {
            Some(r) => self.range.max(r.range),
            None => self.range,
        } * 14.0;
        let m = 20_000;
        let h = reach / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let r = i as f64 * h;
            let wgt = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += wgt * f(self.eval(r, 0.0)) * r;
        }
        2.0 * PI * s * h / 3.0
    }
}

/// `8 J₃(q)/q³`, the normalized Hankel transform of `(1 - t²)²` on the unit disk.
fn bump_profile(q: f64) -> f64 {
    if q < 1e-3 {
        // series: 1/6 - q²/96 + …
        return 1.0 / 6.0 - q * q / 96.0;
    }
    8.0 * bessel_j(3, q) / q.powi(3)
}

/// Bessel function of the first kind of integer order from its integral
/// representation; the periodic trapezoid rule converges spectrally.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let m = 64 + 2 * x.abs().ceil() as usize;
    let h = PI / m as f64;
    let mut s = 0.0;
    for i in 0..=m {
        let t = i as f64 * h;
        let wgt = if i == 0 || i == m { 0.5 } else { 1.0 };
        s += wgt * (order as f64 * t - x * t.sin()).cos();
    }
    s * h / PI
}

fn bilinear(grid: &Grid2D, values: &[f64], x: f64, y: f64) -> f64 {
    let h = grid.spacing();
    let n = grid.n();
    let fx = (x + grid.half_width()) / h;
    let fy = (y + grid.half_width()) / h;
    if fx < 0.0 || fy < 0.0 || fx > (n - 1) as f64 || fy > (n - 1) as f64 {
        return 0.0;
    }
    let ix = (fx.floor() as usize).min(n - 2);
    let iy = (fy.floor() as usize).min(n - 2);
    let tx = fx - ix as f64;
    let ty = fy - iy as f64;
    let at = |i: usize, j: usize| values[j * n + i];
    (1.0 - tx) * (1.0 - ty) * at(ix, iy)
        + tx * (1.0 - ty) * at(ix + 1, iy)
        + (1.0 - tx) * ty * at(ix, iy + 1)
        + tx * ty * at(ix + 1, iy + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integrals() {
        let w = InteractionSpec::gaussian(1.0, 1.0);
        assert!((w.integral() + 2.0 * PI).abs() < 1e-14);
        assert!((w.negative_mass() - 2.0 * PI).abs() < 1e-14);
        assert!((w.abs_integral() - 2.0 * PI).abs() < 1e-8);
        // ∫ e^{-r²/σ²} = πσ²
        assert!((w.square_integral() - PI).abs() < 1e-8);
    }

    #[test]
    fn negative_mass_dominates_negative_part_of_integral() {
        let w = InteractionSpec::gaussian(2.0, 1.0).with_repulsion(3.0, 0.5);
        let b = w.integral();
        let m = w.negative_mass();
        assert!(m >= (-b).max(0.0) - 1e-10, "m⁻ = {m}, b = {b}");
        let m_direct = w.radial_integral(|v| (-v).max(0.0));
        assert!((m - m_direct).abs() < 1e-10);
    }

    #[test]
    fn compact_bump_transform_is_consistent() {
        let w = InteractionSpec::compact_bump(1.5, 0.8);
        assert!((w.integral() - w.radial_integral(|v| v)).abs() < 1e-8);
        assert!((w.negative_mass() - w.radial_integral(|v| (-v).max(0.0))).abs() < 1e-8);
        // ŵ at finite k against a direct radial Hankel quadrature
        let k = 3.7;
        let m = 4000;
        let h = w.range / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let r = i as f64 * h;
            let wgt = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += wgt * w.eval(r, 0.0) * bessel_j(0, k * r) * r;
        }
        let direct = 2.0 * PI * s * h / 3.0;
        assert!((w.fourier(k, 0.0) - direct).abs() < 1e-9);
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(3, 2.5) - 0.216_600_391_039_113_6).abs() < 1e-14);
    }

    #[test]
    fn uniform_field_curl() {
        let a = VectorPotentialSpec::Uniform { field: 0.5 };
        for &(x, y) in &[(0.0, 0.0), (1.3, -2.0), (-4.0, 3.3)] {
            assert!((a.curl_fd(x, y, 1e-3).unwrap() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn harmonic_trap_margin() {
        let g = Grid2D::new(16, 4.0).unwrap();
        assert!(PotentialSpec::harmonic().trapping_margin(&g).unwrap() >= 1.0 - 1e-12);
        let weak = PotentialSpec { trap_constant: 0.5, ..PotentialSpec::harmonic() };
        assert!(weak.trapping_margin(&g).unwrap() < 0.0);
    }
}
