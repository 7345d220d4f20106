use bose2d::field::*;
use bose2d::lemmas::*;
use bose2d::manybody::*;
use bose2d::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A_STAR: f64 = 11.700896;

fn attractive(mult: f64) -> InteractionSpec {
    InteractionSpec::gaussian_with_negative_mass(mult * A_STAR, 1.0)
}

struct Instance {
    basis: ModeBasis,
    tensor: TwoBodyTensor,
    fock: FockBasis,
    result: ManyBodyResult,
}

fn ground(grid: &Grid2D, d: usize, w: &InteractionSpec, n: usize, beta: f64, eps: f64) -> Instance {
    let basis = ModeBasis::harmonic_oscillator(grid, ModeSelection::Count(d), 400).unwrap();
    let tensor = two_body_elements(&basis, w, n, beta).unwrap();
    let fock = FockBasis::new(n, d, 50_000).unwrap();
    let h = assemble_hamiltonian(&basis, &tensor, &fock, eps).unwrap();
    let result = ground_state(&h, 1e-10, 0).unwrap();
    Instance { basis, tensor, fock, result }
}

#[test]
fn plane_wave_envelope_across_cutoffs() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let ks: Vec<f64> = (0..=49).map(|i| 1.0 + i as f64).collect();
    let mut constants = Vec::new();
    for lambda in [10.0, 20.0, 40.0] {
        let b = ModeBasis::harmonic_oscillator(&g, ModeSelection::Cutoff(lambda), 400).unwrap();
        let sweep = plane_wave_sweep(&b, &ks, (1.0, 0.0)).unwrap();
        for s in &sweep.samples {
            assert!(s.norm <= 1.0 + 1e-12);
            let envelope = (sweep.fitted_c * lambda.sqrt() / s.k).min(1.0);
            assert!(s.norm <= envelope + 1e-12);
        }
        constants.push(sweep.fitted_c);
    }
    for pair in constants.windows(2) {
        let ratio = pair[1].max(pair[0]) / pair[1].min(pair[0]);
        assert!(ratio <= 2.0, "{constants:?}");
    }
}

#[test]
fn plane_wave_decomposition_converges_spectrally() {
    let w = InteractionSpec::gaussian(1.0, 1.0);
    let samples: Vec<PointPair> = vec![
        ((0.0, 0.0), (0.0, 0.0)),
        ((0.4, -0.3), (0.1, 0.2)),
        ((1.0, 1.0), (0.7, 1.2)),
    ];
    let coarse = fourier_decomposition_check(&w, 8, 0.5, &Grid2D::new(72, 6.0).unwrap(), &samples).unwrap();
    let fine = fourier_decomposition_check(&w, 8, 0.5, &Grid2D::new(144, 6.0).unwrap(), &samples).unwrap();
    assert!(fine * 4.0 <= coarse, "{coarse} -> {fine}");
}

#[test]
fn localization_defect_vanishes_inside_the_projector() {
    let g = Grid2D::new(96, 6.0).unwrap();
    let inst = ground(&g, 10, &InteractionSpec::zero(), 4, 0.5, 0.0);
    let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
    let report = localization_defect(&g2, inst.basis.energies(), &inst.tensor, 3, 0.75).unwrap();
    assert!(report.lhs.abs() < 1e-12);
    assert_eq!(report.fitted_c, 0.0);

    // a product state of P-modes with interaction switched on
    let w = attractive(0.5);
    let tensor = two_body_elements(&inst.basis, &w, 4, 0.5).unwrap();
    let mut c = vec![C64::new(0.0, 0.0); 10];
    c[0] = C64::new(0.8, 0.0);
    c[2] = C64::new(0.6, 0.0);
    let psi = product_state(&inst.fock, &c);
    let report = localization_defect(&rdm2(&psi, &inst.fock).unwrap(), inst.basis.energies(), &tensor, 3, 0.75).unwrap();
    assert!(report.lhs.abs() < 1e-12);

    let bad = localization_defect(&g2, inst.basis.energies(), &inst.tensor, 10, 0.75);
    assert!(bad.is_err());
}

#[test]
fn localization_constant_is_stable_across_projectors() {
    let g = Grid2D::new(128, 6.0).unwrap();
    let inst = ground(&g, 10, &attractive(0.5), 4, 0.5, 0.0);
    let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
    let c: Vec<f64> = [3, 6]
        .iter()
        .map(|&s| localization_defect(&g2, inst.basis.energies(), &inst.tensor, s, 0.75).unwrap().fitted_c)
        .collect();
    assert!(c.iter().all(|v| *v > 0.0));
    assert!(c[0].max(c[1]) / c[0].min(c[1]) <= 3.0, "{c:?}");
}

#[test]
fn moments_of_the_free_condensate() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let inst = ground(&g, 6, &InteractionSpec::zero(), 3, 0.5, 0.3);
    let g1 = rdm(&inst.result, &inst.fock, 1).unwrap();
    let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
    let m = moment_report(&inst.result, &g1, &g2, inst.basis.energies()).unwrap();
    let e1 = inst.basis.energies()[0];
    assert!((m.first_moment - e1).abs() < 1e-10);
    assert!((m.second_moment - e1 * e1).abs() < 1e-9);
    let bound = (1.0 + (0.7 * e1).abs()) / 0.3;
    assert!((m.first_bound - bound).abs() < 1e-9);
    assert!((m.fitted_c - (e1 / bound).max(e1 * e1 / (bound * bound))).abs() < 1e-9);

    let unperturbed = ground(&g, 6, &InteractionSpec::zero(), 3, 0.5, 0.0);
    assert!(moment_report(&unperturbed.result, &g1, &g2, inst.basis.energies()).is_err());
}

#[test]
fn moment_constant_is_uniform_in_n() {
    let g = Grid2D::new(128, 6.0).unwrap();
    let mut fitted = Vec::new();
    for beta in [0.5, 0.75] {
        for n in 2..=5 {
            let inst = ground(&g, 6, &attractive(0.8), n, beta, 0.3);
            let g1 = rdm(&inst.result, &inst.fock, 1).unwrap();
            let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
            fitted.push(moment_report(&inst.result, &g1, &g2, inst.basis.energies()).unwrap().fitted_c);
        }
    }
    let max = fitted.iter().cloned().fold(0.0, f64::max);
    let min = fitted.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 5.0, "{fitted:?}");
}

#[test]
fn pair_energy_reproduces_the_ground_energy() {
    let g = Grid2D::new(96, 6.0).unwrap();
    let inst = ground(&g, 6, &attractive(0.8), 4, 0.5, 0.0);
    let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
    let e = pair_energy(&g2, inst.basis.energies(), &inst.tensor).unwrap();
    assert!((e - inst.result.per_particle).abs() < 1e-10);
}

#[test]
fn de_finetti_is_exact_on_products() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let inst = ground(&g, 4, &InteractionSpec::zero(), 4, 0.5, 0.0);
    let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
    let fit = fit_definetti(&g2, 4, &DeFinettiOptions::default()).unwrap();
    assert!(fit.error <= 1e-8, "{}", fit.error);

    // a rotated condensate is still a product
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c: Vec<C64> = c.iter().map(|z| z / norm).collect();
    let psi = product_state(&inst.fock, &c);
    let fit = fit_definetti(&rdm2(&psi, &inst.fock).unwrap(), 4, &DeFinettiOptions::default()).unwrap();
    assert!(fit.error <= 1e-8, "{}", fit.error);
}

#[test]
fn de_finetti_distance_is_unitarily_invariant_and_bounded() {
    let fock = FockBasis::new(4, 4, 100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut psi: Vec<C64> = (0..fock.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    let g2 = rdm2(&psi, &fock).unwrap();
    let fit = fit_definetti(&g2, 4, &DeFinettiOptions::default()).unwrap();
    assert!(fit.error >= 0.0 && fit.error <= 1.0);
    assert!(fit.weights.iter().all(|w| *w >= 0.0) && fit.weights.iter().sum::<f64>() <= 1.0 + 1e-12);
    for a in &fit.atoms {
        assert!((a.trace().re - 1.0).abs() < 1e-10);
        assert!(bose2d::linalg::hermitian_eigenvalues(a)[0] > -1e-10);
    }

    // rotate modes: target and atoms transform together
    let a = DMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let u = a.qr().q();
    let rotated = g2.rotated(&u);
    let atoms: Vec<DMatrix<C64>> = fit.atoms.iter().map(|g| u.adjoint() * g * &u).collect();
    let before = definetti_distance(&g2.full(), &fit.atoms, &fit.weights);
    let after = definetti_distance(&rotated.full(), &atoms, &fit.weights);
    assert!((before - after).abs() < 1e-8, "{before} vs {after}");
}

#[test]
fn de_finetti_error_decreases_with_n() {
    let g = Grid2D::new(128, 6.0).unwrap();
    let mut last = f64::INFINITY;
    for n in [4usize, 6, 8, 10] {
        let inst = ground(&g, 4, &attractive(0.8), n, 0.5, 0.0);
        let g2 = rdm(&inst.result, &inst.fock, 2).unwrap();
        let fit = fit_definetti(&g2, n, &DeFinettiOptions::default()).unwrap();
        assert!(fit.error <= last, "N = {n}: {} after {last}", fit.error);
        assert!(fit.error < fit.reference);
        last = fit.error;
    }
}

/// Independent exhaustive search of the exponent recursion.
fn brute_force_gain(alpha: f64, resolution: f64) -> f64 {
    let steps = (0.5 / resolution).round() as usize;
    let mut best = f64::INFINITY;
    for i in 1..steps {
        let a = i as f64 * resolution;
        for j in 1..steps {
            let b = j as f64 * resolution;
            let v = (alpha + a - 0.5).max(alpha + 2.0 * b * alpha + a * b / 2.0 - a / 4.0);
            best = best.min(v);
        }
    }
    alpha - best.max(0.0)
}

#[test]
fn bootstrap_gain_matches_grid_search() {
    let state = BootstrapState::start(0.75, 0.1).unwrap();
    let next = bootstrap_step(&state, &BootstrapSearch::default()).unwrap();
    let oracle = brute_force_gain(1.5, 1e-3);
    assert!((next.gain - oracle).abs() < 1e-12);
    assert!(next.gain >= 0.05);
    assert!((next.delta - 0.5 - next.b_exp).abs() < 1e-15);
}

#[test]
fn bootstrap_terminates_below_one() {
    let search = BootstrapSearch::default();
    let half = run_bootstrap(0.5, 0.1, &search).unwrap();
    assert!(half.reached_zero);
    assert_eq!(*half.trajectory.last().unwrap(), 0.0);
    assert!(half.trajectory.windows(2).all(|w| w[1] < w[0]));
    let near = run_bootstrap(0.99, 0.1, &search).unwrap();
    assert!(near.reached_zero && near.steps.len() > half.steps.len());
    assert!(run_bootstrap(1.0, 0.1, &search).is_err());
}

#[test]
fn tail_bound_scaling() {
    let w = InteractionSpec::gaussian(1.0, 1.0);
    let (n, beta, c) = (16usize, 0.75, 0.8);
    let t10 = interaction_tail_bound(&w, n, beta, 10.0, c).unwrap();
    let t20 = interaction_tail_bound(&w, n, beta, 20.0, c).unwrap();
    // the outer envelope is unsaturated, so it is linear in Λ
    assert!((t20.outer / t10.outer - 2.0).abs() < 0.2);
    // middle term against 2π|ŵ(0)|·CΛ·β·log N
    let closed = 2.0 * std::f64::consts::PI * w.integral().abs() * c * 10.0 * beta * (n as f64).ln();
    let ratio = t10.middle / closed;
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    // with CΛ ≤ 1 the middle envelope is unsaturated too
    let s1 = interaction_tail_bound(&w, n, beta, 0.5, c).unwrap();
    let s2 = interaction_tail_bound(&w, n, beta, 1.0, c).unwrap();
    assert!((s2.middle / s1.middle - 2.0).abs() < 0.2, "{}", s2.middle / s1.middle);
}
