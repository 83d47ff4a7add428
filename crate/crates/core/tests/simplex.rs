use std::f64::consts::PI;

use fermigate_core::basis::{BoundarySpec, PotentialSpec};
use fermigate_core::manybody::{evaluate_on_tensor_grid, InteractionSpec, WaveVector};
use fermigate_core::mbspectrum::{build_system, solve_problem, ManyBodyProblem, ManyBodySolution};
use fermigate_core::simplex::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn free(bc: BoundarySpec, n_particles: usize) -> ManyBodyProblem {
    ManyBodyProblem { bc, potential: PotentialSpec::Zero, interaction: InteractionSpec::NoInteraction, n_particles }
}

fn random_simplex_function(n_cells: usize, n_particles: usize, rng: &mut ChaCha8Rng) -> SimplexFunction {
    let mut f = SimplexFunction::zeros(n_cells, n_particles).unwrap();
    for k in 0..f.len() {
        if !SimplexFunction::is_tied(&f.index(k)) {
            f.values_mut()[k] = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

#[test]
fn tessellation_by_reflected_simplices() {
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let perms = Permutation::all(3);
    let mut counts = vec![0usize; perms.len()];
    for _ in 0..n {
        let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
        let (sigma, margin) = locate_cell(&x);
        assert!(margin > 0.0);
        // Membership is unique: exactly one σ has σ⁻¹x strictly increasing.
        let members: Vec<usize> = (0..perms.len())
            .filter(|&j| perms[j].inverse().permute(&x).windows(2).all(|w| w[0] < w[1]))
            .collect();
        assert_eq!(members.len(), 1);
        assert_eq!(perms[members[0]], sigma);
        counts[members[0]] += 1;
    }
    let p = 1.0 / 6.0;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    for c in counts {
        assert!((c as f64 / n as f64 - p).abs() <= 3.0 * se, "cell fraction {}", c as f64 / n as f64);
    }
}

#[test]
fn extension_is_an_isometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..20 {
        let (n_cells, n_particles) = if trial % 2 == 0 { (12, 2) } else { (7, 3) };
        let psi = random_simplex_function(n_cells, n_particles, &mut rng);
        let full = extend_from_simplex(&psi).unwrap();
        assert!(antisymmetry_defect(&full, n_cells + 1, n_particles) == 0.0);
        let on_cube = cube_form(&full, n_cells, n_particles, None);
        let on_simplex = simplex_form(&psi, None);
        assert!((on_cube.mass - on_simplex.mass).abs() <= 1e-12 * on_simplex.mass);
        assert!((on_cube.h1_sq() - on_simplex.h1_sq()).abs() <= 1e-12 * on_simplex.h1_sq());
        let back = restrict_full_to_simplex(&full, n_cells, n_particles).unwrap();
        let err = back.values().iter().zip(psi.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12);
    }
}

#[test]
fn restriction_then_extension_is_identity_on_antisymmetric_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let system = build_system(&free(BoundarySpec::DirichletBoth, 3), 8).unwrap();
    let slater = &system.operator.basis;
    let psi = WaveVector::normalized((0..slater.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let full = evaluate_on_tensor_grid(&psi, slater, &system.orbitals.nodal);
    let scale = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rebuilt = extend_from_simplex(&restrict_full_to_simplex(&full, 8, 3).unwrap()).unwrap();
    let err = rebuilt.iter().zip(&full).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-12 * scale);
}

#[test]
fn pullback_preserves_rayleigh_quotients() {
    let n_cells = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let v: Vec<f64> = (0..=n_cells).map(|_| rng.gen_range(-20.0..20.0)).collect();
    let h = 1.0 / n_cells as f64;
    let pot = |idx: &[usize]| -> f64 {
        let mut s: f64 = idx.iter().map(|&i| v[i]).sum();
        for (k, &i) in idx.iter().enumerate() {
            for (l, &j) in idx.iter().enumerate() {
                if k != l {
                    s += 3.0 * ((i as f64 - j as f64) * h).cos();
                }
            }
        }
        s
    };
    for trial in 0..20 {
        let n_particles = 2 + trial % 2;
        let system = build_system(&free(BoundarySpec::Free, n_particles), n_cells).unwrap();
        let slater = &system.operator.basis;
        let psi = WaveVector::normalized((0..slater.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let full = evaluate_on_tensor_grid(&psi, slater, &system.orbitals.nodal);
        let reduced = restrict_full_to_simplex(&full, n_cells, n_particles).unwrap();
        let q_full = cube_form(&full, n_cells, n_particles, Some(&pot)).rayleigh_quotient();
        let q_reduced = simplex_form(&reduced, Some(&pot)).rayleigh_quotient();
        assert!((q_full - q_reduced).abs() <= 1e-10 * q_full.abs().max(1.0), "{q_full} vs {q_reduced}");
    }
}

fn dirichlet_pair() -> ManyBodySolution {
    solve_problem(&free(BoundarySpec::DirichletBoth, 2), 40, 2).unwrap()
}

#[test]
fn dirichlet_ground_state_matches_determinant() {
    let sol = dirichlet_pair();
    let f = restrict_to_simplex_function(&sol.state(0), &sol.system.operator.basis, &sol.system.orbitals).unwrap();
    let exact = |x: f64, y: f64| (PI * x).sin() * (2.0 * PI * y).sin() - (2.0 * PI * x).sin() * (PI * y).sin();
    let (mut num, mut den) = (0.0, 0.0);
    let mut pairs = Vec::new();
    for k in 0..f.len() {
        let idx = f.index(k);
        if idx[0] == idx[1] {
            assert_eq!(f.values()[k], 0.0);
            continue;
        }
        let e = exact(idx[0] as f64 / 40.0, idx[1] as f64 / 40.0);
        num += e * f.values()[k];
        den += e * e;
        pairs.push((f.values()[k], e));
    }
    let c = num / den;
    let peak = pairs.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let err = pairs.iter().fold(0.0f64, |m, (v, e)| m.max((v / c - e).abs()));
    assert!(err <= 1e-2 * peak, "relative nodal error {}", err / peak);
}

#[test]
fn ground_state_is_single_signed_excited_is_not() {
    let sol = dirichlet_pair();
    let slater = &sol.system.operator.basis;
    let ground = restrict_to_simplex(&sol.state(0), slater, &sol.system.orbitals).unwrap();
    let report = positivity_report(&ground, DEFAULT_EPS_POS);
    assert_eq!(report.sign_consistency, 1.0);
    assert!(report.interior > 0);
    let excited = restrict_to_simplex(&sol.state(1), slater, &sol.system.orbitals).unwrap();
    assert!(positivity_report(&excited, DEFAULT_EPS_POS).sign_consistency < 1.0);

    // Dense evaluation oracle: random points, exact interpolant values.
    let dense = random_simplex_sample(&sol.state(0), slater, &sol.system.orbitals, 20_000, 9).unwrap();
    assert_eq!(positivity_report(&dense, DEFAULT_EPS_POS).sign_consistency, 1.0);
    let dense = random_simplex_sample(&sol.state(1), slater, &sol.system.orbitals, 20_000, 9).unwrap();
    assert!(positivity_report(&dense, DEFAULT_EPS_POS).sign_consistency < 0.99);
}

#[test]
fn ground_state_nodal_volume_vanishes() {
    let sol = dirichlet_pair();
    let sample = random_simplex_sample(&sol.state(0), &sol.system.operator.basis, &sol.system.orbitals, 20_000, 1).unwrap();
    let f = nodal_volume_estimate(&sample, &[1e-1, 1e-2, 1e-4, 1e-6]).unwrap();
    assert!(f[0] > f[1], "{f:?}");
    assert!(f.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(f[3], 0.0);
}

#[test]
fn quasi_periodic_trace_law() {
    for (alpha, n_particles) in [(1.0, 3), (-1.0, 2), (0.5, 3)] {
        let n_cells = if n_particles == 2 { 40 } else { 20 };
        let sol = solve_problem(&free(BoundarySpec::QuasiPeriodic { alpha }, n_particles), n_cells, 1).unwrap();
        let full = evaluate_on_tensor_grid(&sol.state(0), &sol.system.operator.basis, &sol.system.orbitals.nodal);
        let defect = quasi_periodic_trace_defect(&full, n_cells, n_particles, alpha);
        assert!(defect <= 5e-2, "alpha {alpha}, N {n_particles}: {defect}");
    }
}
