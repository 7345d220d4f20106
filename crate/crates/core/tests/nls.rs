use bose2d::field::*;
use bose2d::nls::*;
use bose2d::C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn a_star() -> f64 {
    static A: OnceLock<f64> = OnceLock::new();
    *A.get_or_init(|| a_star_shooting(&Grid2D::new(16, 8.0).unwrap()).unwrap().a_star)
}

/// Lowest eigenpair of a symmetric tridiagonal matrix by shifted inverse iteration.
fn tridiagonal_ground(diag: &[f64], off: &[f64], start: &[f64]) -> (f64, Vec<f64>) {
    let m = diag.len();
    let lower = diag.iter().enumerate().map(|(i, d)| {
        let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < m { off[i].abs() } else { 0.0 };
        d - l - r
    }).fold(f64::INFINITY, f64::min);
    let mut shift = lower - 1.0;
    let mut x = start.to_vec();
    let mut lambda = 0.0;
    for sweep in 0..200 {
        // Thomas algorithm for (T - shift) y = x
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut b0 = diag[0] - shift;
        c[0] = if m > 1 { off[0] / b0 } else { 0.0 };
        d[0] = x[0] / b0;
        for i in 1..m {
            b0 = diag[i] - shift - off[i - 1] * c[i - 1];
            if i + 1 < m {
                c[i] = off[i] / b0;
            }
            d[i] = (x[i] - off[i - 1] * d[i - 1]) / b0;
        }
        let mut y = vec![0.0; m];
        y[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut y {
            *v /= norm;
        }
        let ty: Vec<f64> = (0..m)
            .map(|i| {
                let mut s = diag[i] * y[i];
                if i > 0 {
                    s += off[i - 1] * y[i - 1];
                }
                if i + 1 < m {
                    s += off[i] * y[i + 1];
                }
                s
            })
            .collect();
        let new_lambda: f64 = ty.iter().zip(&y).map(|(a, b)| a * b).sum();
        let change = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if sweep > 2 && change < 1e-13 && (new_lambda - lambda).abs() < 1e-14 {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
        if sweep == 3 {
            shift = lambda - 0.5;
        }
    }
    (lambda, x)
}

/// Radially symmetric ground-state energy of `∫|∇u|² + |x|²|u|² + (b/2)|u|⁴`
/// on `[0, R]` with `m` cells, by self-consistent field iteration.
fn radial_energy(b: f64, radius: f64, m: usize) -> f64 {
    let h = radius / m as f64;
    let r: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
    let face = |i: usize| (i as f64) * h;
    // v = sqrt(2π r h) u makes the weighted problem symmetric with Σv² = 1
    let mut diag0 = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for i in 0..m {
        let left = face(i);
        let right = face(i + 1);
        diag0[i] = (left + right) / (h * h * r[i]) + r[i] * r[i];
        if i + 1 < m {
            off[i] = -right / (h * h * (r[i] * r[i + 1]).sqrt());
        }
    }
    let weight: Vec<f64> = r.iter().map(|ri| 2.0 * PI * ri * h).collect();
    let mut v: Vec<f64> = r.iter().zip(&weight).map(|(ri, w)| (-(ri * ri) / 2.0).exp() * w.sqrt()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut rho: Vec<f64> = v.iter().zip(&weight).map(|(x, w)| x * x / w).collect();
    for _ in 0..500 {
        let diag: Vec<f64> = diag0.iter().zip(&rho).map(|(d, p)| d + b * p).collect();
        let (_, vn) = tridiagonal_ground(&diag, &off, &v);
        v = vn;
        let new_rho: Vec<f64> = v.iter().zip(&weight).map(|(x, w)| x * x / w).collect();
        let change = new_rho.iter().zip(&rho).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        rho = rho.iter().zip(&new_rho).map(|(a, c)| 0.5 * a + 0.5 * c).collect();
        if change < 1e-12 {
            break;
        }
    }
    // energy of the final orbital, quadratic part from the symmetric matrix
    let mut quad = 0.0;
    for i in 0..m {
        quad += diag0[i] * v[i] * v[i];
        if i + 1 < m {
            quad += 2.0 * off[i] * v[i] * v[i + 1];
        }
    }
    let quartic: f64 = v.iter().zip(&weight).map(|(x, w)| (x * x / w).powi(2) * w).sum();
    quad + 0.5 * b * quartic
}

#[test]
fn attractive_ground_state_matches_radial_solver() {
    let b = -0.5 * a_star();
    let g = Grid2D::new(128, 8.0).unwrap();
    let p = NlsProblem::delta(&g, &PotentialSpec::harmonic(), b).unwrap().with_tol(1e-8).unwrap();
    let r = minimize_nls(&p, None, 0).unwrap();
    assert_eq!(r.status, NlsStatus::Converged);
    let coarse = radial_energy(b, 8.0, 2000);
    let fine = radial_energy(b, 8.0, 4000);
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    assert!(r.energy < 2.0);
    assert!((r.energy - extrapolated).abs() < 1e-4, "grid {} radial {}", r.energy, extrapolated);
}

#[test]
fn stability_dichotomy_at_threshold() {
    let g = Grid2D::new(128, 8.0).unwrap();
    let sub = NlsProblem::delta(&g, &PotentialSpec::harmonic(), -0.9 * a_star()).unwrap();
    let r = minimize_nls(&sub, None, 0).unwrap();
    assert_eq!(r.status, NlsStatus::Converged);
    assert!(r.energy.is_finite() && r.energy < 2.0);
    for f in [1.1, 1.2] {
        let sup = NlsProblem::delta(&g, &PotentialSpec::harmonic(), -f * a_star()).unwrap();
        let r = minimize_nls(&sup, None, 0).unwrap();
        assert_eq!(r.status, NlsStatus::CollapseDetected, "b = -{f}a*");
        // the certificate: a dilation of this iterate drives the energy to -∞
        assert!(sup.scale_invariant_energy(&r.u) < 0.0);
    }
}

#[test]
fn descent_is_monotone_and_normalized() {
    let g = Grid2D::new(64, 8.0).unwrap();
    let v = PotentialSpec::power(1.0, 4.0);
    let p = NlsProblem::delta(&g, &v, -3.0).unwrap();
    let r = minimize_nls(&p, None, 11).unwrap();
    assert_eq!(r.status, NlsStatus::Converged);
    assert!(r.residual <= p.tol);
    assert!((r.u.norm_sq() - 1.0).abs() < 1e-10);
    for w in r.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn two_methods_for_a_star_agree() {
    let g = Grid2D::new(128, 12.0).unwrap();
    let c = compute_a_star(&g, 1e-7).unwrap();
    assert!(c.relative_gap < 1e-3, "{c:?}");
    assert!(c.grid.a_star > 11.6 && c.grid.a_star < 11.8);
    assert!(c.grid.a_star <= 4.0 * PI);
    let q = gn_quotient(&c.grid.profile).unwrap();
    assert!((q - c.grid.a_star).abs() < 1e-8 * c.grid.a_star);
    assert!((gn_quotient(&c.grid.profile).unwrap() - c.shooting.a_star).abs() < 1e-6 * 12.0);

    let fine = a_star_grid(&Grid2D::new(256, 12.0).unwrap(), 1e-7).unwrap();
    assert!((fine.a_star - c.grid.a_star).abs() / fine.a_star < 1e-4);
}

#[test]
fn shooting_profile_solves_the_profile_equation() {
    let g = Grid2D::new(128, 12.0).unwrap();
    let s = a_star_shooting(&g).unwrap();
    let q = gn_quotient(&s.profile).unwrap();
    // the linearly interpolated sample is close to, not at, the optimizer
    assert!((q - s.a_star).abs() / s.a_star < 1e-3);
    assert!((s.profile.norm_sq() - s.a_star).abs() / s.a_star < 1e-3);
}

fn gaussian_sum(grid: &Grid2D, bumps: &[(f64, f64, f64, f64, f64)], scale: f64) -> Field {
    Field::from_fn(grid, |x, y| {
        bumps
            .iter()
            .map(|&(cx, cy, w, re, im)| {
                let (dx, dy) = (scale * x - cx, scale * y - cy);
                C64::new(re, im) * (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

fn bump() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.6..1.5f64, -1.0..1.0f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn quotient_never_beats_a_star(bumps in prop::collection::vec(bump(), 1..4)) {
        let g = Grid2D::new(48, 9.0).unwrap();
        let u = gaussian_sum(&g, &bumps, 1.0);
        prop_assume!(u.norm_sq() > 1e-3);
        let u = u.normalized().unwrap();
        prop_assert!(gn_quotient(&u).unwrap() >= a_star() - 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn quotient_is_dilation_invariant(
        bumps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.6..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..3),
    ) {
        let g = Grid2D::new(256, 16.0).unwrap();
        let u = gaussian_sum(&g, &bumps, 1.0);
        prop_assume!(u.norm_sq() > 1e-3);
        let j = gn_quotient(&u).unwrap();
        for lambda in [0.5, 2.0] {
            let v = gaussian_sum(&g, &bumps, lambda);
            prop_assert!((gn_quotient(&v).unwrap() - j).abs() < 1e-10 * j);
        }
    }
}

/// `½∬ρ(x)w_N(x-y)ρ(y)` by a direct double sum.
fn direct_interaction(rho: &[f64], grid: &Grid2D, w: &InteractionSpec, n: usize, beta: f64) -> f64 {
    let pts: Vec<(f64, f64)> = grid.points().collect();
    let da = grid.cell_area();
    let mut total = 0.0;
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        if rho[i] < 1e-300 {
            continue;
        }
        let mut inner = 0.0;
        for (j, &(xj, yj)) in pts.iter().enumerate() {
            inner += rho[j] * scaled_interaction(w, n, beta, (xi - xj, yi - yj)).unwrap();
        }
        total += rho[i] * inner;
    }
    0.5 * total * da * da
}

#[test]
fn hartree_energy_matches_double_sum_and_closed_form() {
    let g = Grid2D::new(64, 5.0).unwrap();
    let gauss = Field::gaussian(&g);
    let strength = 0.7;
    let w = InteractionSpec::gaussian(strength, 1.0);
    let (n, beta) = (8usize, 0.5);
    let p = NlsProblem::new(
        &g,
        &PotentialSpec::harmonic(),
        &VectorPotentialSpec::Zero,
        Coupling::Hartree { w: w.clone(), particles: n, beta },
    )
    .unwrap();
    let e = nls_energy(&gauss, &p).unwrap();
    let direct = direct_interaction(&gauss.density(), &g, &w, n, beta);
    assert!((e - 2.0 - direct).abs() < 1e-4, "{} vs {}", e - 2.0, direct);
    // ρ*ρ is a unit-variance Gaussian, so the integral is analytic
    let s2 = 1.0 / (n as f64).powf(2.0 * beta);
    let g_n = strength * (n as f64).powf(2.0 * beta);
    let closed = -0.5 * g_n * s2 / (1.0 + s2);
    assert!((e - 2.0 - closed).abs() < 1e-8);

    let gamma = OneBodyMixedState::pure(&gauss).unwrap();
    let eh = hartree_energy(&gamma, &w, n, beta, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero).unwrap();
    assert!((eh - e).abs() < 1e-12);
}

fn hermite_mode(g: &Grid2D, nx: i32, ny: i32) -> Field {
    let h = |n: i32, t: f64| match n {
        0 => 1.0,
        1 => 2.0 * t,
        2 => 4.0 * t * t - 2.0,
        _ => 8.0 * t * t * t - 12.0 * t,
    };
    Field::from_real_fn(g, |x, y| h(nx, x) * h(ny, y) * (-(x * x + y * y) / 2.0).exp()).normalized().unwrap()
}

#[test]
fn two_mode_hartree_energy_matches_double_sum() {
    let g = Grid2D::new(64, 6.0).unwrap();
    let modes = vec![hermite_mode(&g, 0, 0), hermite_mode(&g, 1, 0)];
    let w = InteractionSpec::gaussian(1.3, 1.0);
    let gamma = OneBodyMixedState::new(modes, vec![0.7, 0.3]).unwrap();
    let e = hartree_energy(&gamma, &w, 4, 0.5, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero).unwrap();
    let one_body = 0.7 * 2.0 + 0.3 * 4.0;
    let direct = direct_interaction(&gamma.density(), &g, &w, 4, 0.5);
    assert!((e - one_body - direct).abs() < 1e-4);
    let free = hartree_energy(&gamma, &InteractionSpec::zero(), 4, 0.5, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero)
        .unwrap();
    assert!((free - one_body).abs() < 1e-8);
}

#[test]
fn hartree_chain_is_ordered_below_threshold() {
    let g = Grid2D::new(128, 8.0).unwrap();
    let w = InteractionSpec::gaussian_with_negative_mass(0.5 * a_star(), 1.0);
    let gamma = OneBodyMixedState::new(vec![hermite_mode(&g, 0, 0), hermite_mode(&g, 0, 1)], vec![0.6, 0.4]).unwrap();
    let r = hartree_bound_report(&gamma, &w, 8, 0.5, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero, a_star())
        .unwrap();
    assert_eq!(r.chain_holds, Some(true), "{r:?}");
    assert!(r.hartree_energy >= r.middle && r.middle >= r.lower && r.lower >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn hoffmann_ostenhof_margin_for_random_mixtures(
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 30),
        raw in prop::collection::vec(0.05..1.0f64, 3),
    ) {
        let g = Grid2D::new(64, 8.0).unwrap();
        let basis: Vec<Field> = (0..10).map(|k| hermite_mode(&g, k % 4, k / 4)).collect();
        let mut modes: Vec<Field> = Vec::new();
        for m in 0..3 {
            let mut f = Field::zeros(&g);
            for (k, b) in basis.iter().enumerate() {
                let (re, im) = coeffs[m * 10 + k];
                f.axpy(C64::new(re, im), b);
            }
            for prev in &modes {
                let c = prev.inner(&f);
                f.axpy(-c, prev);
            }
            prop_assume!(f.norm() > 1e-3);
            modes.push(f.normalized().unwrap());
        }
        let total: f64 = raw.iter().sum();
        let gamma = OneBodyMixedState::new(modes, raw.iter().map(|x| x / total).collect()).unwrap();
        let r = hartree_bound_report(&gamma, &InteractionSpec::zero(), 2, 0.5, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero, a_star()).unwrap();
        prop_assert!(r.kinetic_margin >= -1e-8, "{}", r.kinetic_margin);
    }
}

#[test]
fn hartree_minimum_approaches_delta_minimum() {
    let g = Grid2D::new(128, 8.0).unwrap();
    let b = -0.5 * a_star();
    let w = InteractionSpec::gaussian_with_negative_mass(-b, 1.0);
    let delta = minimize_nls(&NlsProblem::delta(&g, &PotentialSpec::harmonic(), b).unwrap(), None, 0).unwrap();
    for beta in [0.25, 0.5] {
        let gaps: Vec<f64> = [2usize, 4, 8, 16]
            .iter()
            .map(|&n| {
                let p = NlsProblem::new(
                    &g,
                    &PotentialSpec::harmonic(),
                    &VectorPotentialSpec::Zero,
                    Coupling::Hartree { w: w.clone(), particles: n, beta },
                )
                .unwrap();
                (minimize_nls(&p, None, 0).unwrap().energy - delta.energy).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|p| p[1] < p[0]), "β = {beta}: {gaps:?}");
    }
}

#[test]
fn split_step_is_second_order_and_unitary() {
    let g = Grid2D::new(128, 8.0).unwrap();
    let p = NlsProblem::delta(&g, &PotentialSpec::harmonic(), -4.0).unwrap();
    let u0 = Field::from_real_fn(&g, |x, y| (-((x - 1.0).powi(2) + y * y) / 2.0).exp()).normalized().unwrap();
    let opts = PropagateOptions { save_every: 1000, drift_warning: 1e-3 };
    let coarse = propagate_nls(&u0, &p, 1.0, 0.01, &opts).unwrap();
    let fine = propagate_nls(&u0, &p, 1.0, 0.005, &opts).unwrap();
    let ratio = coarse.max_energy_drift / fine.max_energy_drift;
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    assert!(coarse.max_norm_drift < 1e-8 && fine.max_norm_drift < 1e-8);
    let rough = propagate_nls(&u0, &p, 1.0, 0.2, &PropagateOptions { save_every: 1, drift_warning: 1e-4 }).unwrap();
    assert_eq!(rough.status, PropagationStatus::EnergyDriftWarning);
}
