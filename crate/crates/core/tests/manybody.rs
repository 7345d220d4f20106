use bose2d::field::*;
use bose2d::linalg::{hermitian_eigenvalues, LinearOperator};
use bose2d::manybody::*;
use bose2d::nls::{minimize_nls, NlsProblem};
use bose2d::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

const A_STAR: f64 = 11.700896;

fn numeric_basis(grid: &Grid2D, d: usize) -> ModeBasis {
    ModeBasis::build(
        &PotentialSpec::harmonic(),
        &VectorPotentialSpec::Zero,
        grid,
        ModeSelection::Count(d),
        &ModeBasisOptions::default(),
    )
    .unwrap()
}

fn attractive(mult: f64) -> InteractionSpec {
    InteractionSpec::gaussian_with_negative_mass(mult * A_STAR, 1.0)
}

/// `∬ φ_i*(x) φ_j*(y) w_N(x - y) φ_k(x) φ_l(y)` by a direct double sum over
/// grid points with minimum-image separations.
fn direct_tensor(basis: &ModeBasis, w: &InteractionSpec, n_particles: usize, beta: f64) -> TwoBodyTensor {
    let grid = basis.grid();
    let scaled = ScaledInteraction::new(w, n_particles, beta).unwrap();
    let box_len = 2.0 * grid.half_width();
    let wrap = |v: f64| v - box_len * (v / box_len).round();
    let d = basis.dim();
    let modes: Vec<&[C64]> = basis.modes().iter().map(|m| m.values()).collect();
    let area = grid.cell_area();
    let mut acc = vec![C64::new(0.0, 0.0); d.pow(4)];
    for p in 0..grid.len() {
        let (x1, y1) = grid.point(p);
        for q in 0..grid.len() {
            let (x2, y2) = grid.point(q);
            let wv = scaled.eval(wrap(x1 - x2), wrap(y1 - y2));
            if wv.abs() < 1e-300 {
                continue;
            }
            for i in 0..d {
                for k in 0..d {
                    let left = modes[i][p].conj() * modes[k][p] * wv;
                    for j in 0..d {
                        for l in 0..d {
                            acc[((i * d + j) * d + k) * d + l] += left * modes[j][q].conj() * modes[l][q];
                        }
                    }
                }
            }
        }
    }
    let mut it = acc.into_iter();
    TwoBodyTensor::from_fn(d, |_, _, _, _| it.next().unwrap() * area * area)
}

#[test]
fn oscillator_spectrum_and_cutoff() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let b = numeric_basis(&g, 10);
    let expected = [2.0, 4.0, 4.0, 6.0, 6.0, 6.0, 8.0, 8.0, 8.0, 8.0];
    for (e, x) in b.energies().iter().zip(expected) {
        assert!((e - x).abs() < 1e-4);
    }
    let b = ModeBasis::build(
        &PotentialSpec::harmonic(),
        &VectorPotentialSpec::Zero,
        &g,
        ModeSelection::Cutoff(5.0),
        &ModeBasisOptions::default(),
    )
    .unwrap();
    assert_eq!(b.dim(), 3);
}

#[test]
fn magnetic_spectrum_matches_fock_darwin_levels() {
    let field = 0.5;
    let omega = (1.0 + field * field / 4.0f64).sqrt();
    let mut analytic = Vec::new();
    for nr in 0..4i32 {
        for m in -8i32..=8 {
            analytic.push(2.0 * omega * (2 * nr + m.abs() + 1) as f64 + field * m as f64);
        }
    }
    analytic.sort_by(f64::total_cmp);
    let g = Grid2D::new(64, 7.0).unwrap();
    let b = ModeBasis::build(
        &PotentialSpec::harmonic(),
        &VectorPotentialSpec::Uniform { field },
        &g,
        ModeSelection::Count(6),
        &ModeBasisOptions::default(),
    )
    .unwrap();
    assert!(!b.is_real());
    for (e, x) in b.energies().iter().zip(&analytic) {
        assert!((e - x).abs() < 1e-3, "{e} vs {x}");
    }
}

#[test]
fn two_body_tensor_matches_direct_double_sum() {
    // coarse grid where the scaled Gaussian is still smooth on the lattice
    let g = Grid2D::new(40, 6.0).unwrap();
    let basis = numeric_basis(&g, 3);
    let w = attractive(0.5);
    let fast = two_body_elements(&basis, &w, 2, 0.5).unwrap();
    let slow = direct_tensor(&basis, &w, 2, 0.5);
    let scale = fast.max_abs();
    for (a, b) in fast.data().iter().zip(slow.data()) {
        assert!((a - b).norm() < 1e-4 * scale, "{a} vs {b}");
    }
    assert!(fast.symmetry_defect() < 1e-12);
    assert!(fast.data().iter().all(|z| z.im == 0.0));
}

#[test]
fn two_particle_matrix_matches_first_quantized_construction() {
    let g = Grid2D::new(48, 6.0).unwrap();
    let basis = numeric_basis(&g, 2);
    let w = attractive(0.6);
    let tensor = two_body_elements(&basis, &w, 2, 0.5).unwrap();
    let fock = FockBasis::new(2, 2, 100).unwrap();
    let h = assemble_hamiltonian(&basis, &tensor, &fock, 0.0).unwrap().to_dense();

    // first quantization: symmetric two-particle states on the grid, with the
    // one-body part from the operator and the interaction from a direct sum
    let op = OneBodyOperator::new(&g, &PotentialSpec::harmonic(), &VectorPotentialSpec::Zero).unwrap();
    let hm: Vec<Field> = basis.modes().iter().map(|m| op.apply(m).unwrap()).collect();
    let one = |i: usize, k: usize| basis.modes()[i].inner(&hm[k]);
    let direct = direct_tensor(&basis, &w, 2, 0.5);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // |2,0⟩ = |11⟩, |1,1⟩ = (|12⟩ + |21⟩)/√2, |0,2⟩ = |22⟩
    let pair: [Vec<(usize, usize, f64)>; 3] =
        [vec![(0, 0, 1.0)], vec![(0, 1, s), (1, 0, s)], vec![(1, 1, 1.0)]];
    for (r, occ) in fock.states().iter().enumerate() {
        let pr = match occ.as_slice() {
            [2, 0] => 0,
            [1, 1] => 1,
            _ => 2,
        };
        for (c, occ2) in fock.states().iter().enumerate() {
            let pc = match occ2.as_slice() {
                [2, 0] => 0,
                [1, 1] => 1,
                _ => 2,
            };
            let mut m = C64::new(0.0, 0.0);
            for &(i, j, a) in &pair[pr] {
                for &(k, l, b) in &pair[pc] {
                    let mut v = direct.get(i, j, k, l);
                    if j == l {
                        v += one(i, k);
                    }
                    if i == k {
                        v += one(j, l);
                    }
                    m += v * a * b;
                }
            }
            assert!((h[(r, c)] - m).norm() < 1e-10 * (1.0 + m.norm()), "({r},{c}): {} vs {m}", h[(r, c)]);
        }
    }
}

#[test]
fn lanczos_matches_dense_diagonalization() {
    let g = Grid2D::new(64, 6.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let w = attractive(0.8);
    for (n, d, dim) in [(3usize, 6usize, 56usize), (4, 5, 70)] {
        let b = basis.truncated(d).unwrap();
        let tensor = two_body_elements(&b, &w, n, 0.5).unwrap();
        let fock = FockBasis::new(n, d, 1000).unwrap();
        assert_eq!(fock.len(), dim);
        let h = assemble_hamiltonian(&b, &tensor, &fock, 0.0).unwrap();
        let exact = hermitian_eigenvalues(&h.to_dense())[0];
        let r = ground_state(&h, 1e-10, 5).unwrap();
        assert!(r.converged);
        assert!((r.energy - exact).abs() < 1e-10, "N = {n}: {} vs {exact}", r.energy);
        let other = ground_state(&h, 1e-10, 99).unwrap();
        assert!((other.energy - r.energy).abs() < 1e-10);
        let norm: f64 = r.psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn free_bosons_condense_in_the_lowest_mode() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let fock = FockBasis::new(4, 6, 1000).unwrap();
    let h = assemble_hamiltonian(&basis, &TwoBodyTensor::zeros(6), &fock, 0.0).unwrap();
    let r = ground_state(&h, 1e-10, 0).unwrap();
    assert!((r.energy - 4.0 * basis.energies()[0]).abs() < 1e-10);
    let g1 = rdm(&r, &fock, 1).unwrap();
    assert!((g1.matrix()[(0, 0)].re - 1.0).abs() < 1e-10);
    let g2 = rdm(&r, &fock, 2).unwrap();
    let check = energy_identity_check(&r, &g2, basis.energies(), &TwoBodyTensor::zeros(6)).unwrap();
    assert!(check < 1e-12);
    let overlap = condensate_overlap(&g1, &basis.modes()[0], &basis).unwrap();
    assert!((overlap.value - 1.0).abs() < 1e-10 && !overlap.warning);
}

#[test]
fn orthogonal_field_is_flagged() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let full = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let basis = full.truncated(3).unwrap();
    let fock = FockBasis::new(2, 3, 100).unwrap();
    let psi = product_state(&fock, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let g1 = rdm1(&psi, &fock).unwrap();
    let outside = &full.modes()[5];
    let o = condensate_overlap(&g1, outside, &basis).unwrap();
    assert!(o.value.abs() < 1e-10);
    assert!((o.defect - 1.0).abs() < 1e-8 && o.warning);
}

#[test]
fn energy_identity_on_interacting_ground_states() {
    let g = Grid2D::new(96, 6.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let w = attractive(0.8);
    for (n, tol) in [(2usize, 1e-12), (4, 1e-10)] {
        let tensor = two_body_elements(&basis, &w, n, 0.5).unwrap();
        let fock = FockBasis::new(n, 6, 10_000).unwrap();
        let h = assemble_hamiltonian(&basis, &tensor, &fock, 0.0).unwrap();
        let r = ground_state(&h, 1e-11, 2).unwrap();
        let g2 = rdm(&r, &fock, 2).unwrap();
        let gap = energy_identity_check(&r, &g2, basis.energies(), &tensor).unwrap();
        assert!(gap <= tol, "N = {n}: {gap}");
        for k in [1, 2] {
            let m = rdm(&r, &fock, k).unwrap();
            assert!((m.trace() - 1.0).abs() < 1e-10);
            assert!(m.hermiticity_defect() < 1e-12);
            assert!(m.min_eigenvalue() > -1e-10);
        }
    }
}

#[test]
fn one_body_rdm_commutes_with_inversion() {
    let g = Grid2D::new(64, 6.0).unwrap();
    let basis = numeric_basis(&g, 6);
    let w = attractive(0.8);
    let tensor = two_body_elements(&basis, &w, 4, 0.5).unwrap();
    let fock = FockBasis::new(4, 6, 10_000).unwrap();
    let r = ground_state(&assemble_hamiltonian(&basis, &tensor, &fock, 0.0).unwrap(), 1e-10, 1).unwrap();
    let g1 = rdm(&r, &fock, 1).unwrap();
    // x ↦ -x on the lattice sends index i to (n - i) mod n on both axes
    let n = g.n();
    let reflect = |f: &Field| -> Field {
        let v = f.values();
        let out = (0..g.len()).map(|p| v[((n - p / n) % n) * n + (n - p % n) % n]).collect();
        Field::from_values(&g, out).unwrap()
    };
    let modes = basis.modes();
    let rot = DMatrix::from_fn(6, 6, |i, j| modes[i].inner(&reflect(&modes[j])));
    let comm = g1.matrix() * &rot - &rot * g1.matrix();
    let norm = comm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm < 1e-8, "{norm}");
}

#[test]
fn energy_decreases_with_nested_bases_and_respects_product_bound() {
    let g = Grid2D::new(96, 6.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(10), 100).unwrap();
    let w = attractive(0.8);
    let n = 4;
    let mut last = f64::INFINITY;
    for d in [1, 3, 6, 10] {
        let b = basis.truncated(d).unwrap();
        let tensor = two_body_elements(&b, &w, n, 0.5).unwrap();
        let fock = FockBasis::new(n, d, 10_000).unwrap();
        let h = assemble_hamiltonian(&b, &tensor, &fock, 0.0).unwrap();
        let r = ground_state(&h, 1e-10, 0).unwrap();
        assert!(r.per_particle <= last + 1e-10, "d = {d}: {} after {last}", r.per_particle);
        last = r.per_particle;
        let best = best_product_state(b.energies(), &tensor, 0.0, 4, 1);
        assert!(r.per_particle <= best.energy + 1e-10);
        // the product value is the exact Fock-space expectation
        let psi = product_state(&fock, &best.coefficients);
        assert!((h.expectation(&psi) / n as f64 - best.energy).abs() < 1e-10);
    }
}

#[test]
fn perturbation_rescales_the_one_body_part_only() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(4), 100).unwrap();
    let fock = FockBasis::new(3, 4, 100).unwrap();
    let free = TwoBodyTensor::zeros(4);
    let e0 = hermitian_eigenvalues(&assemble_hamiltonian(&basis, &free, &fock, 0.0).unwrap().to_dense());
    let e1 = hermitian_eigenvalues(&assemble_hamiltonian(&basis, &free, &fock, 0.5).unwrap().to_dense());
    for (a, b) in e0.iter().zip(&e1) {
        assert!((a - 2.0 * b).abs() < 1e-10);
    }
}

#[test]
fn condensate_overlap_with_the_nls_minimizer_grows_with_n() {
    let g = Grid2D::new(96, 6.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let w = attractive(0.8);
    let nls = minimize_nls(&NlsProblem::delta(&g, &PotentialSpec::harmonic(), w.integral()).unwrap(), None, 0).unwrap();
    let mut last = 0.0;
    for n in [2usize, 4, 6] {
        let tensor = two_body_elements(&basis, &w, n, 0.5).unwrap();
        let fock = FockBasis::new(n, 6, 10_000).unwrap();
        let r = ground_state(&assemble_hamiltonian(&basis, &tensor, &fock, 0.0).unwrap(), 1e-10, 0).unwrap();
        let o = condensate_overlap(&rdm(&r, &fock, 1).unwrap(), &nls.u, &basis).unwrap();
        assert!(o.value > 0.0 && o.value <= 1.0 + 1e-12);
        assert!(o.value > last, "N = {n}: {} after {last}", o.value);
        last = o.value;
    }
}

#[test]
fn free_evolution_keeps_the_condensate() {
    let g = Grid2D::new(64, 7.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(4), 100).unwrap();
    let fock = FockBasis::new(3, 4, 100).unwrap();
    let h = assemble_hamiltonian(&basis, &TwoBodyTensor::zeros(4), &fock, 0.0).unwrap();
    let mut c = vec![C64::new(0.0, 0.0); 4];
    c[0] = C64::new(1.0, 0.0);
    let psi0 = product_state(&fock, &c);
    let tr = evolve(&psi0, &h, &fock, 1.0, 0.1, None, &EvolveOptions::default()).unwrap();
    for g1 in &tr.rdm1 {
        assert!((g1.matrix() - tr.rdm1[0].matrix()).iter().all(|z| z.norm() < 1e-12));
    }
    assert!(tr.max_norm_drift < 1e-10);
}

#[test]
fn interacting_evolution_approaches_mean_field_with_n() {
    let g = Grid2D::new(128, 6.0).unwrap();
    let basis = ModeBasis::harmonic_oscillator(&g, ModeSelection::Count(6), 100).unwrap();
    let w = attractive(0.5);
    let mut c0: Vec<C64> = [1.0, 0.6, 0.0, 0.2, 0.0, 0.1].iter().map(|v| C64::new(*v, 0.0)).collect();
    c0[2] = C64::new(0.0, 0.3);
    let norm = c0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c0.iter_mut().for_each(|z| *z /= norm);
    let mut last = f64::INFINITY;
    for n in [2usize, 4, 6] {
        let tensor = two_body_elements(&basis, &w, n, 0.5).unwrap();
        let fock = FockBasis::new(n, 6, 10_000).unwrap();
        let h = assemble_hamiltonian(&basis, &tensor, &fock, 0.0).unwrap();
        let mf = evolve_mean_field(&c0, basis.energies(), &tensor, 1.0, 0.05).unwrap();
        let tr = evolve(&product_state(&fock, &c0), &h, &fock, 1.0, 0.05, Some(&mf.states), &EvolveOptions::default())
            .unwrap();
        assert!(tr.max_norm_drift < 1e-10 && tr.max_energy_drift < 1e-8);
        assert!(mf.max_norm_drift < 1e-8 && mf.max_energy_drift < 1e-8);
        let d = *tr.distances.as_ref().unwrap().last().unwrap();
        assert!(d < last, "N = {n}: {d} after {last}");
        last = d;
    }
}

#[test]
fn evolution_respects_the_dimension_cap() {
    let fock = FockBasis::new(3, 4, 100).unwrap();
    let h = assemble_from_energies(&[1.0, 2.0, 3.0, 4.0], &TwoBodyTensor::zeros(4), &fock, 0.0).unwrap();
    let psi = vec![C64::new(1.0, 0.0); h.dim()];
    let r = evolve(&psi, &h, &fock, 1.0, 0.1, None, &EvolveOptions { cap: 5, ..Default::default() });
    assert!(matches!(r, Err(bose2d::Error::Capacity(_))));
}

#[test]
fn dumps_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("bose2d-dump-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fock = FockBasis::new(4, 5, 1000).unwrap();
    let path = dir.join("fock.bin");
    io::write_fock(&fock, std::fs::File::create(&path).unwrap()).unwrap();
    let back = io::read_fock(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.states(), fock.states());
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_tensors_give_hermitian_operators(seed in 0u64..10_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw = TwoBodyTensor::from_fn(4, |_, _, _, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let w = TwoBodyTensor::from_fn(4, |i, j, k, l| {
            (raw.get(i, j, k, l) + raw.get(j, i, l, k) + raw.get(k, l, i, j).conj() + raw.get(l, k, j, i).conj()) * 0.25
        });
        prop_assert!(w.symmetry_defect() < 1e-12);
        let fock = FockBasis::new(3, 4, 100).unwrap();
        let h = assemble_from_energies(&[1.0, 1.5, 2.0, 3.0], &w, &fock, 0.2).unwrap().to_dense();
        let defect = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect < 1e-12);
    }
}
