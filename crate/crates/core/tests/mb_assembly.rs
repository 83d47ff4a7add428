use std::f64::consts::PI;

use fermigate_core::basis::{assemble_overlap, assemble_potential, assemble_stiffness, build_grid_basis, BoundarySpec, GridBasis, PotentialSpec};
use fermigate_core::linalg::{symmetric_eigen, Matrix, SymMatrix};
use fermigate_core::manybody::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn slater_condon(v: &PotentialSpec, w: &InteractionSpec, basis: &GridBasis, n_particles: usize) -> ManyBodyOperator {
    let m = assemble_overlap(basis);
    let a = assemble_stiffness(basis).add_scaled(1.0, &assemble_potential(basis, v).unwrap());
    let orbitals = cholesky_orbitals(basis, &m).unwrap();
    let one = transform_one_body(&a, &orbitals.coeffs).unwrap();
    let two = transform_two_body(w, basis, &orbitals).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), n_particles).unwrap();
    assemble_manybody(&one, &two, &slater).unwrap()
}

fn potentials(n_cells: usize) -> Vec<PotentialSpec> {
    vec![
        PotentialSpec::Zero,
        PotentialSpec::Delta { x0: 0.5, strength: -10.0 },
        PotentialSpec::sampled_from_fn(n_cells, |x| 3.0 * x - 1.0),
        PotentialSpec::HMinusOnePair { alpha: 0.7, cell_values: (0..n_cells).map(|c| (c as f64).sin()).collect() },
    ]
}

fn interactions(n_cells: usize) -> Vec<InteractionSpec> {
    vec![
        InteractionSpec::NoInteraction,
        InteractionSpec::DeltaContact { g: 5.0 },
        InteractionSpec::DeltaContact { g: -5.0 },
        InteractionSpec::sampled_from_fn(n_cells, |x, y| 2.0 + (x - y).abs() + x * y),
    ]
}

#[test]
fn slater_condon_matches_bruteforce() {
    // Six orbitals under each boundary condition.
    let cases = [
        (7, BoundarySpec::DirichletBoth),
        (6, BoundarySpec::DirichletLeft),
        (5, BoundarySpec::Free),
        (6, BoundarySpec::QuasiPeriodic { alpha: -1.0 }),
        (6, BoundarySpec::QuasiPeriodic { alpha: 1.0 }),
    ];
    for (n_cells, bc) in cases {
        let basis = build_grid_basis(n_cells, bc).unwrap();
        assert_eq!(basis.n_dofs(), 6);
        for v in potentials(n_cells) {
            for w in interactions(n_cells) {
                let fast = slater_condon(&v, &w, &basis, 2);
                let slow = assemble_manybody_bruteforce(&v, &w, &basis, 2).unwrap();
                let dev = fast.h.max_abs_diff(&slow.h);
                assert!(dev <= 1e-10, "{bc:?} {v:?} {w:?}: {dev}");
            }
        }
    }
}

#[test]
fn bruteforce_rejects_unsupported() {
    let basis = build_grid_basis(20, BoundarySpec::DirichletBoth).unwrap();
    assert!(assemble_manybody_bruteforce(&PotentialSpec::Zero, &InteractionSpec::NoInteraction, &basis, 2).is_err());
    let basis = build_grid_basis(7, BoundarySpec::DirichletBoth).unwrap();
    assert!(assemble_manybody_bruteforce(&PotentialSpec::Zero, &InteractionSpec::NoInteraction, &basis, 3).is_err());
}

/// Composite Boole rule (exact for quintics) on each cell, with orbitals
/// evaluated directly from the dof functions.
fn contact_oracle(basis: &GridBasis, r: &Matrix, a: usize, b: usize, c: usize, d: usize) -> f64 {
    let orb = |k: usize, x: f64| (0..basis.n_dofs()).map(|i| r[(i, k)] * basis.eval_dof(i, x)).sum::<f64>();
    let h = basis.h();
    let weights = [7.0, 32.0, 12.0, 32.0, 7.0];
    let mut s = 0.0;
    for cell in 0..basis.n_cells() {
        for (j, wj) in weights.iter().enumerate() {
            // Interior offsets keep each sample on its own cell.
            let x = (cell as f64 + (j as f64 / 4.0).clamp(1e-13, 1.0 - 1e-13)) * h;
            s += wj * h / 90.0 * orb(a, x) * orb(b, x) * orb(c, x) * orb(d, x);
        }
    }
    s
}

#[test]
fn contact_tensor_matches_quadrature_oracle() {
    let basis = build_grid_basis(7, BoundarySpec::DirichletBoth).unwrap();
    let orbitals = cholesky_orbitals(&basis, &assemble_overlap(&basis)).unwrap();
    let t = transform_two_body(&InteractionSpec::DeltaContact { g: 1.0 }, &basis, &orbitals).unwrap();
    let mut worst: f64 = 0.0;
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                for d in 0..6 {
                    worst = worst.max((t.get(a, b, c, d) - contact_oracle(&basis, &orbitals.coeffs, a, b, c, d)).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-10, "{worst}");
    let zero = transform_two_body(&InteractionSpec::DeltaContact { g: 0.0 }, &basis, &orbitals).unwrap();
    assert_eq!(zero.get(1, 2, 3, 4), 0.0);
}

#[test]
fn contact_tensor_vanishes_on_disjoint_supports() {
    let basis = build_grid_basis(10, BoundarySpec::DirichletBoth).unwrap();
    let hats = Orbitals::new(&basis, Matrix::identity(basis.n_dofs())).unwrap();
    let t = transform_two_body(&InteractionSpec::DeltaContact { g: 3.0 }, &basis, &hats).unwrap();
    assert_eq!(t.get(1, 2, 4, 2), 0.0);
    assert_ne!(t.get(1, 2, 2, 2), 0.0);
}

#[test]
fn noninteracting_sum_rule() {
    let basis = build_grid_basis(11, BoundarySpec::QuasiPeriodic { alpha: 1.0 }).unwrap();
    let v = PotentialSpec::Delta { x0: 0.3, strength: 4.0 };
    let op = slater_condon(&v, &InteractionSpec::NoInteraction, &basis, 3);
    let ManyBodyMatrix::Dense(h) = &op.h else { panic!("expected dense storage") };
    let mb = symmetric_eigen(h).unwrap().values;

    let a = assemble_stiffness(&basis).add_scaled(1.0, &assemble_potential(&basis, &v).unwrap());
    let (_, mu) = eigen_orbitals(&basis, &a, &assemble_overlap(&basis)).unwrap();
    let mut sums: Vec<f64> = op.basis.tuples().iter().map(|t| t.iter().map(|&k| mu[k]).sum()).collect();
    sums.sort_by(f64::total_cmp);
    for (x, y) in mb.iter().zip(&sums) {
        assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn eigen_orbitals_make_noninteracting_operator_diagonal() {
    let basis = build_grid_basis(12, BoundarySpec::DirichletBoth).unwrap();
    let a = assemble_stiffness(&basis);
    let (orbitals, mu) = eigen_orbitals(&basis, &a, &assemble_overlap(&basis)).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), 2).unwrap();
    let op = assemble_manybody(&SymMatrix::from_diagonal(&mu), &TwoBodyTensor::Zero { n: mu.len() }, &slater).unwrap();
    for (i, t) in slater.tuples().iter().enumerate() {
        assert_eq!(op.h.get(i, i), mu[t[0]] + mu[t[1]]);
    }
}

#[test]
fn assembly_is_linear_in_potential_and_interaction() {
    let n_cells = 7;
    let basis = build_grid_basis(n_cells, BoundarySpec::DirichletBoth).unwrap();
    let delta = |c: f64| PotentialSpec::Delta { x0: 0.5, strength: c };
    let kernel = |s: f64| InteractionSpec::sampled_from_fn(n_cells, |x, y| s * (1.0 + x * y));
    let h = |v: PotentialSpec, w: InteractionSpec| slater_condon(&v, &w, &basis, 2).h;
    // Second differences of a linear map vanish.
    let (a, b, c) = (h(delta(0.0), kernel(1.0)), h(delta(1.5), kernel(1.0)), h(delta(3.0), kernel(1.0)));
    let dim = a.dim();
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..=i {
            worst = worst.max((a.get(i, j) - 2.0 * b.get(i, j) + c.get(i, j)).abs());
        }
    }
    assert!(worst <= 1e-10, "potential: {worst}");
    let (a, b, c) = (h(PotentialSpec::Zero, kernel(0.0)), h(PotentialSpec::Zero, kernel(2.0)), h(PotentialSpec::Zero, kernel(4.0)));
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..=i {
            worst = worst.max((a.get(i, j) - 2.0 * b.get(i, j) + c.get(i, j)).abs());
        }
    }
    assert!(worst <= 1e-10, "interaction: {worst}");
    // Contact strength enters linearly with zero slope on this sector.
    let d0 = h(PotentialSpec::Zero, InteractionSpec::DeltaContact { g: 0.0 });
    let d5 = h(PotentialSpec::Zero, InteractionSpec::DeltaContact { g: 5.0 });
    assert!(d0.max_abs_diff(&d5) <= 1e-12);
}

#[test]
fn wavefunction_is_antisymmetric() {
    let basis = build_grid_basis(10, BoundarySpec::QuasiPeriodic { alpha: -1.0 }).unwrap();
    let orbitals = cholesky_orbitals(&basis, &assemble_overlap(&basis)).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = WaveVector::normalized((0..slater.len()).map(|_| rng.gen::<f64>() - 0.5).collect()).unwrap();
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
        let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
        if i == j {
            continue;
        }
        let mut y = x.clone();
        y.swap(i, j);
        let phi = |p: &[f64]| p.iter().map(|&t| orbitals.values_at(t)).collect::<Vec<_>>();
        let a = evaluate_with_values(&psi, &slater, &phi(&x));
        let b = evaluate_with_values(&psi, &slater, &phi(&y));
        assert!((a + b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn single_determinant_densities() {
    let basis = build_grid_basis(16, BoundarySpec::DirichletBoth).unwrap();
    let orbitals = cholesky_orbitals(&basis, &assemble_overlap(&basis)).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), 2).unwrap();
    let mut c = vec![0.0; slater.len()];
    c[slater.rank(&[0, 1]).unwrap()] = 1.0;
    let psi = WaveVector::new(c).unwrap();
    let rho = reduced_density(&psi, &slater, &orbitals).unwrap();
    let rho2 = reduced_pair_density(&psi, &slater, &orbitals).unwrap();
    for (p, &x) in rho.points.iter().enumerate() {
        let f = orbitals.values_at(x);
        assert!((rho.values[p] - (f[0] * f[0] + f[1] * f[1])).abs() <= 1e-12);
        for (q, &y) in rho2.points.iter().enumerate() {
            let g = orbitals.values_at(y);
            let det = f[0] * g[1] - f[1] * g[0];
            assert!((rho2.values[(p, q)] - det * det).abs() <= 1e-10);
        }
    }
    assert!((rho.integral() - 2.0).abs() <= 1e-10);
    assert!((rho2.integral() - 2.0).abs() <= 1e-8);
}

#[test]
fn free_dirichlet_ground_density() {
    let basis = build_grid_basis(40, BoundarySpec::DirichletBoth).unwrap();
    let (orbitals, _) = eigen_orbitals(&basis, &assemble_stiffness(&basis), &assemble_overlap(&basis)).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), 2).unwrap();
    let mut c = vec![0.0; slater.len()];
    c[0] = 1.0;
    let rho = reduced_density(&WaveVector::new(c).unwrap(), &slater, &orbitals).unwrap();
    for (x, r) in rho.points.iter().zip(&rho.values) {
        let exact = 2.0 * (PI * x).sin().powi(2) + 2.0 * (2.0 * PI * x).sin().powi(2);
        assert!((r - exact).abs() <= 2e-2, "x = {x}: {r} vs {exact}");
    }
    assert_eq!(rho.at_nodes().len(), 41);
}

#[test]
fn pair_density_needs_two_particles() {
    let basis = build_grid_basis(8, BoundarySpec::DirichletBoth).unwrap();
    let orbitals = cholesky_orbitals(&basis, &assemble_overlap(&basis)).unwrap();
    let slater = enumerate_slater_basis(orbitals.len(), 1).unwrap();
    let psi = WaveVector::normalized(vec![1.0; slater.len()]).unwrap();
    assert!(reduced_pair_density(&psi, &slater, &orbitals).is_err());
    assert!((reduced_density(&psi, &slater, &orbitals).unwrap().integral() - 1.0).abs() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn density_normalizations(seed in any::<u64>(), n_particles in 2usize..=4, alpha in prop_oneof![Just(1.0), Just(-1.0), Just(0.5)]) {
        let basis = build_grid_basis(9, BoundarySpec::QuasiPeriodic { alpha }).unwrap();
        let orbitals = cholesky_orbitals(&basis, &assemble_overlap(&basis)).unwrap();
        let slater = enumerate_slater_basis(orbitals.len(), n_particles).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = WaveVector::normalized((0..slater.len()).map(|_| rng.gen::<f64>() - 0.5).collect()).unwrap();
        let n = n_particles as f64;
        let rho = reduced_density(&psi, &slater, &orbitals).unwrap();
        prop_assert!((rho.integral() - n).abs() <= 1e-10);
        let rho2 = reduced_pair_density(&psi, &slater, &orbitals).unwrap();
        prop_assert!((rho2.integral() - n * (n - 1.0)).abs() <= 1e-8);
        prop_assert!(rho2.symmetry_defect() <= 1e-12);
        prop_assert!(rho2.min_diagonal() >= -1e-10);
    }

    #[test]
    fn slater_tuples_strictly_increasing(n in 1usize..12, k in 1usize..5) {
        prop_assume!(k <= n);
        let b = enumerate_slater_basis(n, k).unwrap();
        prop_assert_eq!(b.len(), binomial(n, k).unwrap());
        prop_assert!(b.tuples().iter().all(|t| t.windows(2).all(|w| w[0] < w[1])));
        prop_assert!(b.tuples().windows(2).all(|w| w[0] < w[1]));
    }
}

/// Applies `Σ_k h_k + Σ_{k≠l} W_kl` to an `n^N` coefficient tensor directly
/// in the product space.
fn product_space_apply(h: &SymMatrix, t: &TwoBodyTensor, c: &[f64], n: usize, k: usize) -> Vec<f64> {
    let total = n.pow(k as u32);
    let digits = |mut idx: usize| {
        let mut d = vec![0; k];
        for slot in (0..k).rev() {
            d[slot] = idx % n;
            idx /= n;
        }
        d
    };
    let flat = |d: &[usize]| d.iter().fold(0, |acc, &a| acc * n + a);
    let mut out = vec![0.0; total];
    for (idx, o) in out.iter_mut().enumerate() {
        let a = digits(idx);
        let mut s = 0.0;
        for slot in 0..k {
            let mut d = a.clone();
            for b in 0..n {
                d[slot] = b;
                s += h.get(a[slot], b) * c[flat(&d)];
            }
        }
        for s1 in 0..k {
            for s2 in 0..k {
                if s1 == s2 {
                    continue;
                }
                let mut d = a.clone();
                for b in 0..n {
                    for e in 0..n {
                        d[s1] = b;
                        d[s2] = e;
                        s += t.get(a[s1], a[s2], b, e) * c[flat(&d)];
                    }
                }
            }
        }
        *o = s;
    }
    out
}

#[test]
fn three_particle_elements_match_product_space() {
    let n_cells = 7;
    let basis = build_grid_basis(n_cells, BoundarySpec::DirichletBoth).unwrap();
    let v = PotentialSpec::sampled_from_fn(n_cells, |x| 5.0 * x * x);
    let w = InteractionSpec::sampled_from_fn(n_cells, |x, y| 1.0 + 4.0 * (x - y).powi(2));
    let m = assemble_overlap(&basis);
    let a = assemble_stiffness(&basis).add_scaled(1.0, &assemble_potential(&basis, &v).unwrap());
    let orbitals = cholesky_orbitals(&basis, &m).unwrap();
    let one = transform_one_body(&a, &orbitals.coeffs).unwrap();
    let two = transform_two_body(&w, &basis, &orbitals).unwrap();
    let slater = enumerate_slater_basis(6, 3).unwrap();
    let op = assemble_manybody(&one, &two, &slater).unwrap();

    // Normalized determinants have tensor entries ±1/√3!.
    let unit = |i: usize| {
        let mut e = vec![0.0; slater.len()];
        e[i] = 1.0;
        let norm = (6.0f64).sqrt();
        antisymmetric_tensor(&WaveVector::new(e).unwrap(), &slater).into_iter().map(|x| x / norm).collect::<Vec<_>>()
    };
    let tensors: Vec<Vec<f64>> = (0..slater.len()).map(unit).collect();
    let mut worst: f64 = 0.0;
    for j in 0..slater.len() {
        let hc = product_space_apply(&one, &two, &tensors[j], 6, 3);
        for i in 0..slater.len() {
            let e: f64 = tensors[i].iter().zip(&hc).map(|(p, q)| p * q).sum();
            worst = worst.max((e - op.h.get(i, j)).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}
