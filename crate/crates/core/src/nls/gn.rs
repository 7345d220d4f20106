use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Field, Grid2D};
use crate::C64;

/// `2‖u‖²‖∇u‖² / ∫|u|⁴`, invariant under `u ↦ λu(μ·)`.
pub fn gn_quotient(u: &Field) -> Result<f64> {
    let f = u.quartic();
    if !(f >= 1e-14) {
        return Err(Error::Degenerate(format!("∫|u|⁴ = {f:e} is too small for the quotient")));
    }
    Ok(2.0 * u.norm_sq() * u.kinetic() / f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GnMethod {
    GridQuotient,
    RadialShooting,
}

#[derive(Clone, Debug)]
pub struct GnResult {
    pub a_star: f64,
    /// Optimizer normalized to solve `-ΔQ + Q = Q³`.
    pub profile: Field,
    pub method: GnMethod,
    /// Grid method: L² residual of the profile equation. Shooting: final
    /// width of the bisection bracket on `Q(0)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Both estimates of a* and their relative gap.
#[derive(Clone, Debug)]
pub struct GnComparison {
    pub grid: GnResult,
    pub shooting: GnResult,
    pub relative_gap: f64,
}

/// a* by two independent routes: quotient minimization on `grid` and radial
/// shooting for the profile equation.
pub fn compute_a_star(grid: &Grid2D, tol: f64) -> Result<GnComparison> {
    let g = a_star_grid(grid, tol)?;
    let s = a_star_shooting(grid)?;
    let relative_gap = (g.a_star - s.a_star).abs() / s.a_star;
    Ok(GnComparison { grid: g, shooting: s, relative_gap })
}

struct Moments {
    mass: f64,
    kinetic: f64,
    quartic: f64,
}

fn moments(u: &Field) -> Moments {
    Moments { mass: u.norm_sq(), kinetic: u.kinetic(), quartic: u.quartic() }
}

/// Evaluates `u(μx)` on the same grid by trigonometric interpolation.
pub(crate) fn dilate(u: &Field, mu: f64) -> Field {
    let grid = u.grid();
    let n = grid.n();
    let l = grid.half_width();
    let mut spec = u.values().to_vec();
    grid.fft(&mut spec);
    let coeffs = DMatrix::from_row_slice(n, n, &spec);
    let k = grid.wavenumbers();
    let e = DMatrix::from_fn(n, n, |j, p| C64::from_polar(1.0 / n as f64, k[p] * (mu * grid.coord(j) + l)));
    let v = &e * coeffs * e.transpose();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = v[(j, i)];
        }
    }
    Field::from_values(grid, out).expect("finite interpolation")
}

/// Puts `u` at unit mass and unit kinetic energy; the dilation is skipped
/// when the kinetic energy is already within `slack` of one.
fn fix_scale(u: &mut Field, slack: f64) {
    let m = u.norm_sq();
    *u = u.scaled(1.0 / m.sqrt());
    let k = u.kinetic();
    if (k - 1.0).abs() > slack {
        *u = dilate(u, k.sqrt().recip());
        let m = u.norm_sq();
        *u = u.scaled(1.0 / m.sqrt());
    }
}

fn real_part(values: &mut [C64]) {
    for z in values {
        z.im = 0.0;
    }
}

/// Minimizes the GN quotient by preconditioned gradient descent on `log J`
/// over real fields, keeping `∫|u|² = ∫|∇u|² = 1` to remove the dilation and
/// amplitude flat directions.
pub fn a_star_grid(grid: &Grid2D, tol: f64) -> Result<GnResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if grid.half_width() < 6.0 {
        return Err(Error::Precondition(format!(
            "half-width {} too small for a unit-scale soliton (need ≥ 6)",
            grid.half_width()
        )));
    }
    let da = grid.cell_area();
    let mut u = Field::gaussian(grid);
    fix_scale(&mut u, 0.0);
    let mut m = moments(&u);
    let mut j = 2.0 * m.mass * m.kinetic / m.quartic;
    let mut tau: f64 = 0.5;
    let mut iterations = 0;
    let max_iter = 20_000;
    let mut grad_norm = f64::INFINITY;
    let mut stagnant = 0;
    while iterations < max_iter && stagnant < 50 {
        let lap = u.neg_laplacian();
        let mut g: Vec<C64> = u
            .values()
            .iter()
            .zip(lap.values())
            .map(|(a, l)| 2.0 * a / m.mass + 2.0 * l / m.kinetic - 4.0 * a * a.norm_sqr() / m.quartic)
            .collect();
        real_part(&mut g);
        grad_norm = (g.iter().map(|z| z.norm_sqr()).sum::<f64>() * da).sqrt();
        if grad_norm <= tol {
            break;
        }
        grid.fft(&mut g);
        for (idx, z) in g.iter_mut().enumerate() {
            *z /= -(1.0 + grid.k_squared(idx));
        }
        grid.ifft(&mut g);
        real_part(&mut g);
        iterations += 1;
        let mut accepted = false;
        while tau > 1e-12 {
            let mut trial = u.clone();
            for (t, d) in trial.values_mut().iter_mut().zip(&g) {
                *t += d * tau;
            }
            let mt = moments(&trial);
            let jt = 2.0 * mt.mass * mt.kinetic / mt.quartic;
            if jt <= j * (1.0 + 1e-15) {
                // the gradient floor is set by rounding once J stops moving
                if jt > j * (1.0 - 1e-14) {
                    stagnant += 1;
                } else {
                    stagnant = 0;
                }
                u = trial;
                fix_scale(&mut u, 1e-3);
                m = moments(&u);
                j = 2.0 * m.mass * m.kinetic / m.quartic;
                tau = (tau * 1.25).min(4.0);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    fix_scale(&mut u, 0.0);
    let m = moments(&u);
    // -ΔQ + Q = Q³ fixes the amplitude once mass and kinetic energy agree
    let q = u.scaled((2.0 * m.kinetic / m.quartic).sqrt());
    let a_star = gn_quotient(&q)?;
    let residual = profile_residual(&q);
    if iterations >= max_iter && grad_norm > tol.max(1e-6) {
        return Err(Error::Degenerate(format!(
            "quotient minimization stalled at gradient norm {grad_norm:e}"
        )));
    }
    Ok(GnResult { a_star, profile: q, method: GnMethod::GridQuotient, residual, iterations })
}

/// `‖-ΔQ + Q - Q³‖₂`.
pub fn profile_residual(q: &Field) -> f64 {
    let lap = q.neg_laplacian();
    let r: Vec<f64> = q
        .values()
        .iter()
        .zip(lap.values())
        .map(|(a, l)| (l + a - a * a.norm_sqr()).norm_sqr())
        .collect();
    q.grid().integrate(&r).sqrt()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Shot {
    Overshoot,
    Undershoot,
}

struct ShotOutcome {
    kind: Shot,
    /// `(r, Q)` samples along the accepted steps.
    samples: Vec<(f64, f64)>,
    /// `∫ Q² r dr` up to the terminating event.
    mass: f64,
}

type State = [f64; 3];

fn rhs(r: f64, s: &State) -> State {
    let (q, p) = (s[0], s[1]);
    [p, -p / r + q - q * q * q, q * q * r]
}

/// One Dormand–Prince step; returns the fifth-order update and the
/// embedded error estimate.
fn dopri_step(r: f64, s: &State, h: f64) -> (State, f64) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 3]; 7];
    for stage in 0..7 {
        let mut y = *s;
        for (prev, a) in A[stage].iter().enumerate().take(stage) {
            for c in 0..3 {
                y[c] += h * a * k[prev][c];
            }
        }
        k[stage] = rhs(r + C[stage] * h, &y);
    }
    let mut hi = *s;
    let mut err = 0.0f64;
    for c in 0..3 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for stage in 0..7 {
            d5 += B5[stage] * k[stage][c];
            d4 += B4[stage] * k[stage][c];
        }
        hi[c] += h * d5;
        // the accumulated integral does not steer the step size
        if c < 2 {
            err = err.max((h * (d5 - d4)).abs() / (1e-14 + 1e-12 * hi[c].abs()));
        }
    }
    (hi, err)
}

const SHOOT_START: f64 = 1e-6;
const SHOOT_END: f64 = 12.0;

fn shoot(q0: f64) -> ShotOutcome {
    let r0 = SHOOT_START;
    let c = q0 - q0 * q0 * q0;
    let mut s: State = [q0 + c * r0 * r0 / 4.0, c * r0 / 2.0, q0 * q0 * r0 * r0 / 2.0];
    let mut r = r0;
    let mut h: f64 = 1e-4;
    let mut samples = vec![(0.0, q0), (r, s[0])];
    while r < SHOOT_END {
        let step = h.min(SHOOT_END - r);
        let (next, err) = dopri_step(r, &s, step);
        if err > 1.0 {
            h = step * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        r += step;
        s = next;
        samples.push((r, s[0]));
        if s[0] < 0.0 {
            return ShotOutcome { kind: Shot::Overshoot, samples, mass: s[2] };
        }
        if s[1] > 0.0 {
            return ShotOutcome { kind: Shot::Undershoot, samples, mass: s[2] };
        }
        h = step * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
    }
    // still positive and decreasing at the end: decide on the sign of Q
    let kind = if s[0] > 0.0 { Shot::Undershoot } else { Shot::Overshoot };
    ShotOutcome { kind, samples, mass: s[2] }
}

/// a* = 2π∫Q²r dr for the positive decaying radial solution of
/// `-Q'' - Q'/r + Q = Q³`, with `Q(0)` bisected in `[2, 2.5]`.
/// The profile is sampled onto `grid`.
pub fn a_star_shooting(grid: &Grid2D) -> Result<GnResult> {
    let (mut lo, mut hi) = (2.0, 2.5);
    if shoot(lo).kind != Shot::Undershoot || shoot(hi).kind != Shot::Overshoot {
        return Err(Error::Bracket("Q(0) ∈ [2, 2.5] does not bracket the ground-state profile".into()));
    }
    let mut iterations = 0;
    while hi - lo > 4.0 * f64::EPSILON * hi && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid).kind {
            Shot::Undershoot => lo = mid,
            Shot::Overshoot => hi = mid,
        }
        iterations += 1;
    }
    let below = shoot(lo);
    let above = shoot(hi);
    // both trajectories track the profile until they separate near the end
    let mass = 0.5 * (below.mass + above.mass);
    let a_star = 2.0 * PI * mass;
    let samples = below.samples;
    let profile = Field::from_real_fn(grid, |x, y| interpolate(&samples, (x * x + y * y).sqrt()));
    Ok(GnResult { a_star, profile, method: GnMethod::RadialShooting, residual: hi - lo, iterations })
}

fn interpolate(samples: &[(f64, f64)], r: f64) -> f64 {
    let last = samples.len() - 1;
    if r >= samples[last].0 {
        return 0.0;
    }
    let idx = samples.partition_point(|&(s, _)| s <= r).max(1);
    let (r0, q0) = samples[idx - 1];
    let (r1, q1) = samples[idx];
    (q0 + (q1 - q0) * (r - r0) / (r1 - r0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_quotient_is_four_pi() {
        let g = Grid2D::new(128, 8.0).unwrap();
        let u = Field::gaussian(&g);
        assert!((gn_quotient(&u).unwrap() - 4.0 * PI).abs() < 1e-6);
        let j3 = gn_quotient(&u.scaled(3.0)).unwrap();
        assert!((j3 - gn_quotient(&u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_vanishing_field() {
        let g = Grid2D::new(16, 6.0).unwrap();
        assert!(gn_quotient(&Field::zeros(&g)).is_err());
    }

    #[test]
    fn dilation_is_exact_for_resolved_gaussians() {
        let g = Grid2D::new(128, 10.0).unwrap();
        let u = Field::from_real_fn(&g, |x, y| (-(x * x + y * y)).exp());
        let v = dilate(&u, 1.3);
        let exact = Field::from_real_fn(&g, |x, y| (-(1.69 * (x * x + y * y))).exp());
        let err = v.values().iter().zip(exact.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn shooting_reproduces_known_constant() {
        let g = Grid2D::new(32, 8.0).unwrap();
        let s = a_star_shooting(&g).unwrap();
        assert!((s.a_star - 11.700_89).abs() < 1e-4, "{}", s.a_star);
    }
}
