//! Check builders shared by the scenario runner.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::neumann::{neumann_trace_limit, neumann_trace_weak, Eigenpair, Extension, Face, DEFAULT_EPS_CELLS};
use super::report::{Check, Environment, Expectation, Relation, VerificationReport};
use crate::basis::{assemble_overlap, assemble_potential, assemble_stiffness, build_grid_basis, BoundarySpec, PotentialSpec};
use crate::error::{Error, Result};
use crate::manybody::{
    assemble_manybody, assemble_manybody_bruteforce, cholesky_orbitals, enumerate_slater_basis, evaluate_on_tensor_grid,
    reduced_density, reduced_pair_density, transform_one_body, transform_two_body, InteractionSpec, WaveVector,
};
use crate::mbspectrum::{classify_degeneracy_with_solutions, solve_problem, ManyBodyProblem, ManyBodySystem};
use crate::simplex::{
    antisymmetry_defect, cube_form, extend_from_simplex, locate_cell, positivity_report, restrict_full_to_simplex,
    restrict_to_simplex, simplex_form, Permutation, SimplexFunction, DEFAULT_EPS_POS,
};
use crate::spectrum::{gap_report_refined, solve_sp_eig, GapVerdict, SpectralResult, DEFAULT_DEG_TOL};

/// Residual tolerance of the eigensolvers, recorded in every report.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Strict inequalities must exceed this multiple of the discretization error.
pub const MARGIN_FACTOR: f64 = 4.0;

pub(crate) fn env(grids: Vec<usize>, seed: u64) -> Environment {
    Environment { grids, residual_tolerance: RESIDUAL_TOLERANCE, seed }
}

pub(crate) fn sp_spectrum(bc: BoundarySpec, v: &PotentialSpec, n_cells: usize, k: Option<usize>) -> Result<SpectralResult> {
    let basis = build_grid_basis(n_cells, bc)?;
    let v = v.resample(n_cells);
    let m = assemble_overlap(&basis);
    let k = k.unwrap_or(basis.n_dofs()).min(basis.n_dofs());
    solve_sp_eig(&assemble_stiffness(&basis), &assemble_potential(&basis, &v)?, &m, k)
}

/// Flips `psi` so that its largest-magnitude value on the ordered simplex
/// grid is positive.
pub fn fix_sign(psi: WaveVector, system: &ManyBodySystem) -> Result<WaveVector> {
    let sample = restrict_to_simplex(&psi, &system.operator.basis, &system.orbitals)?;
    let (mut best, mut sign) = (0.0, 1.0);
    for &v in &sample.values {
        if v.abs() > best {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        WaveVector::new(psi.coeffs.iter().map(|c| -c).collect())
    } else {
        Ok(psi)
    }
}

/// Analytic free spectra at one grid.
pub fn free_spectrum_checks(bc: BoundarySpec, n_cells: usize) -> Result<Vec<Check>> {
    let p2 = PI * PI;
    let r = sp_spectrum(bc, &PotentialSpec::Zero, n_cells, Some(6))?;
    let ev = &r.eigenvalues;
    let checks = match bc {
        BoundarySpec::DirichletBoth => (1..=5)
            .map(|k| Check::close(format!("lambda_{k}_vs_{k}^2_pi^2"), ev[k - 1], (k * k) as f64 * p2, 2e-3))
            .collect(),
        BoundarySpec::QuasiPeriodic { alpha } if alpha == 1.0 => vec![
            Check::new("abs_lambda_1", ev[0].abs(), Relation::Le, 1e-6),
            Check::close("lambda_2_vs_4pi^2", ev[1], 4.0 * p2, 2e-3),
            Check::close("lambda_3_vs_4pi^2", ev[2], 4.0 * p2, 2e-3),
        ],
        BoundarySpec::QuasiPeriodic { alpha } if alpha == -1.0 => vec![
            Check::close("lambda_1_vs_pi^2", ev[0], p2, 2e-3),
            Check::close("lambda_2_vs_pi^2", ev[1], p2, 2e-3),
        ],
        other => return Err(Error::InvalidBoundary(format!("no analytic free spectrum for {other:?}"))),
    };
    Ok(checks)
}

/// The refined gap pattern of the lowest `gaps + 1` eigenvalues. Every gap
/// required to be strict must be strict; for zero potential under a
/// quasi-periodic condition the remaining gaps must be degenerate.
pub fn gap_law_checks(bc: BoundarySpec, v: &PotentialSpec, grids: (usize, usize), gaps: usize) -> Result<Vec<Check>> {
    let coarse = sp_spectrum(bc, v, grids.0, Some(gaps + 1))?;
    let fine = sp_spectrum(bc, v, grids.1, Some(gaps + 1))?;
    let report = gap_report_refined(&coarse, &fine, &bc, DEFAULT_DEG_TOL);
    let free = matches!(v, PotentialSpec::Zero) && bc.quasi_alpha().is_some();
    let mut checks = Vec::new();
    for e in &report.entries {
        let i = e.lower;
        if e.required_strict {
            checks.push(Check::new(format!("gap_{i}_strict"), e.gap, Relation::Gt, e.threshold));
        } else if free {
            checks.push(Check::new(format!("gap_{i}_degenerate"), e.gap, Relation::Le, e.threshold));
        }
    }
    let violations = report.entries.iter().filter(|e| e.verdict == GapVerdict::Violation).count();
    checks.push(Check::new("violations", violations as f64, Relation::Le, 0.0));
    Ok(checks)
}

/// Lowest `k` non-interacting eigenvalues against sorted `N`-sums of the
/// single-particle eigenvalues of the same grid.
pub fn slater_sum_oracle(v: &PotentialSpec, bc: BoundarySpec, n_particles: usize, k: usize, n_cells: usize) -> Result<VerificationReport> {
    let sp = sp_spectrum(bc, v, n_cells, None)?;
    let subsets = enumerate_slater_basis(sp.eigenvalues.len(), n_particles)?;
    let mut sums: Vec<f64> = subsets.tuples().iter().map(|t| t.iter().map(|&a| sp.eigenvalues[a]).sum()).collect();
    sums.sort_by(f64::total_cmp);
    let problem = ManyBodyProblem { bc, potential: v.clone(), interaction: InteractionSpec::NoInteraction, n_particles };
    let mb = solve_problem(&problem, n_cells, k.min(sums.len()))?;
    let dev = mb
        .spectrum
        .eigenvalues
        .iter()
        .zip(&sums)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0f64, f64::max);
    let checks = vec![Check::new("max_relative_deviation", dev, Relation::Le, 1e-8)];
    Ok(VerificationReport::new("slater_sum_oracle", Expectation::Pass, env(vec![n_cells], 0), checks))
}

/// Dirichlet end flags `(left, right)` of a separable condition.
fn dirichlet_set(bc: &BoundarySpec) -> Option<(bool, bool)> {
    match *bc {
        BoundarySpec::Free => Some((false, false)),
        BoundarySpec::DirichletLeft => Some((true, false)),
        BoundarySpec::DirichletRight => Some((false, true)),
        BoundarySpec::DirichletBoth => Some((true, true)),
        _ => None,
    }
}

/// `λ₁(Γ) < λ₁(Γ′)` along a chain of strictly growing Dirichlet sets, with
/// margin above `MARGIN_FACTOR` times the discretization error and at
/// least `min_margin` on the coarse grid.
pub fn monotonicity_suite(
    v: &PotentialSpec,
    w: &InteractionSpec,
    n_particles: usize,
    chain: &[BoundarySpec],
    grids: (usize, usize),
    min_margin: f64,
) -> Result<VerificationReport> {
    for pair in chain.windows(2) {
        let (a, b) = match (dirichlet_set(&pair[0]), dirichlet_set(&pair[1])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidBoundary("monotonicity needs product-type Dirichlet sets".into())),
        };
        let subset = (!a.0 || b.0) && (!a.1 || b.1);
        if !subset || a == b {
            return Err(Error::InvalidBoundary(format!("{:?} is not a strict subset of {:?}", pair[0], pair[1])));
        }
    }
    let mut levels = Vec::new();
    for bc in chain {
        let problem = ManyBodyProblem { bc: *bc, potential: v.clone(), interaction: w.clone(), n_particles };
        let coarse = solve_problem(&problem, grids.0, 1)?.spectrum.eigenvalues[0];
        let fine = solve_problem(&problem, grids.1, 1)?.spectrum.eigenvalues[0];
        levels.push((coarse, fine, (coarse - fine).abs()));
    }
    let mut checks = Vec::new();
    for (i, pair) in levels.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        let err = lo.2.max(hi.2);
        let tag = format!("{}_{}", i, i + 1);
        checks.push(Check::new(format!("margin_coarse_{tag}"), hi.0 - lo.0, Relation::Ge, min_margin));
        checks.push(Check::new(format!("margin_over_error_{tag}"), (hi.1 - lo.1) / err, Relation::Gt, MARGIN_FACTOR));
    }
    Ok(VerificationReport::new("monotonicity_suite", Expectation::Pass, env(vec![grids.0, grids.1], 0), checks))
}

/// Slater–Condon assembly against brute-force integration for `N = 2`
/// over potentials and interactions on one small grid.
pub fn slater_condon_checks(bc: BoundarySpec, n_cells: usize) -> Result<Vec<Check>> {
    let basis = build_grid_basis(n_cells, bc)?;
    let potentials = [
        ("zero", PotentialSpec::Zero),
        ("well", PotentialSpec::Delta { x0: 0.5, strength: -10.0 }),
        ("ramp", PotentialSpec::sampled_from_fn(n_cells, |x| 10.0 * x)),
    ];
    let interactions = [
        ("none", InteractionSpec::NoInteraction),
        ("contact+5", InteractionSpec::DeltaContact { g: 5.0 }),
        ("contact-5", InteractionSpec::DeltaContact { g: -5.0 }),
    ];
    let m = assemble_overlap(&basis);
    let orbitals = cholesky_orbitals(&basis, &m)?;
    let slater = enumerate_slater_basis(orbitals.len(), 2)?;
    let mut checks = Vec::new();
    for (vn, v) in &potentials {
        let a = assemble_stiffness(&basis).add_scaled(1.0, &assemble_potential(&basis, v)?);
        let one = transform_one_body(&a, &orbitals.coeffs)?;
        for (wn, w) in &interactions {
            let fast = assemble_manybody(&one, &transform_two_body(w, &basis, &orbitals)?, &slater)?;
            let slow = assemble_manybody_bruteforce(v, w, &basis, 2)?;
            checks.push(Check::new(format!("max_abs_deviation_{vn}_{wn}"), fast.h.max_abs_diff(&slow.h), Relation::Le, 1e-10));
        }
    }
    Ok(checks)
}

/// Two-grid ground-state classification. A non-degenerate expectation
/// requires a stable gap above the margin rule; a negative control
/// requires the gap to collapse under refinement.
pub fn nondegeneracy_checks(
    problem: &ManyBodyProblem,
    grids: (usize, usize),
    expected: Expectation,
    expected_gap: Option<f64>,
) -> Result<Vec<Check>> {
    let (r, _) = classify_degeneracy_with_solutions(problem, grids, 2)?;
    let mut checks = Vec::new();
    match expected {
        Expectation::Pass => {
            checks.push(Check::new("refinement_ratio", r.refinement_ratio, Relation::Gt, 0.5));
            let err = r.discretization_error_estimate;
            checks.push(Check::new("gap_over_error", r.levels[1].gap / err, Relation::Gt, MARGIN_FACTOR));
        }
        Expectation::NegativeControl => {
            checks.push(Check::new("refinement_ratio", r.refinement_ratio, Relation::Le, 0.5));
        }
    }
    if let Some(g) = expected_gap {
        checks.push(Check::close("fine_gap_vs_expected", r.levels[1].gap, g, 5e-2));
    }
    Ok(checks)
}

/// Sign statistics of the ground state on the ordered simplex, and
/// optionally of the first excited state as a control.
pub fn positivity_checks(problem: &ManyBodyProblem, n_cells: usize, excited_control: bool) -> Result<Vec<Check>> {
    let sol = solve_problem(problem, n_cells, if excited_control { 2 } else { 1 })?;
    let (basis, orbitals) = (&sol.system.operator.basis, &sol.system.orbitals);
    let ground = positivity_report(&restrict_to_simplex(&sol.state(0), basis, orbitals)?, DEFAULT_EPS_POS);
    let mut checks = vec![
        Check::new("interior_nodes", ground.interior as f64, Relation::Ge, 1.0),
        Check::new("ground_sign_consistency", ground.sign_consistency, Relation::Ge, 0.999),
    ];
    if excited_control {
        let excited = positivity_report(&restrict_to_simplex(&sol.state(1), basis, orbitals)?, DEFAULT_EPS_POS);
        checks.push(Check::new("excited_sign_consistency", excited.sign_consistency, Relation::Le, 0.99));
    }
    Ok(checks)
}

/// Weak and limit boundary fluxes of the free Dirichlet ground state on
/// the face `x₁ = 0`: `f = 1` for `N = 1`, `f(x₂) = sin(πx₂)` for `N = 2`.
pub fn neumann_trace_checks(n_particles: usize, n_cells: usize) -> Result<Vec<Check>> {
    let problem = ManyBodyProblem {
        bc: BoundarySpec::DirichletBoth,
        potential: PotentialSpec::Zero,
        interaction: InteractionSpec::NoInteraction,
        n_particles,
    };
    let sol = solve_problem(&problem, n_cells, 1)?;
    let psi = fix_sign(sol.state(0), &sol.system)?;
    let pair = Eigenpair { system: &sol.system, psi: &psi, eigenvalue: sol.spectrum.eigenvalues[0] };
    let f: Vec<f64> = match n_particles {
        1 => vec![1.0],
        _ => (0..=n_cells).map(|i| if i == 0 || i == n_cells { 0.0 } else { (PI * i as f64 / n_cells as f64).sin() }).collect(),
    };
    let weak = neumann_trace_weak(&pair, Face::Left, &f, Extension::OneCell)?;
    let weak2 = neumann_trace_weak(&pair, Face::Left, &f, Extension::TwoCell)?;
    let limit = neumann_trace_limit(&pair, Face::Left, &f, &DEFAULT_EPS_CELLS)?;
    let zero = neumann_trace_weak(&pair, Face::Left, &vec![0.0; f.len()], Extension::OneCell)?;
    let mut checks = vec![
        Check::new("extension_independence", (weak - weak2).abs(), Relation::Le, 1e-10),
        Check::new("zero_profile", zero.abs(), Relation::Le, 0.0),
    ];
    if n_particles == 1 {
        let exact = -std::f64::consts::SQRT_2 * PI;
        checks.push(Check::close("weak_vs_exact", weak, exact, 2e-2));
        checks.push(Check::close("limit_vs_exact", limit.estimate, exact, 2e-2));
    } else {
        checks.push(Check::close("limit_vs_weak", limit.estimate, weak, 2e-2));
    }
    Ok(checks)
}

fn random_simplex_function(n_cells: usize, n_particles: usize, rng: &mut ChaCha8Rng) -> Result<SimplexFunction> {
    let mut f = SimplexFunction::zeros(n_cells, n_particles)?;
    for k in 0..f.len() {
        if !SimplexFunction::is_tied(&f.index(k)) {
            f.values_mut()[k] = rng.gen_range(-1.0..1.0);
        }
    }
    Ok(f)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Extension isometry and inverse identities on random inputs.
pub fn extension_checks(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut iso, mut inv) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let (n_cells, n_particles) = if t % 2 == 0 { (12, 2) } else { (7, 3) };
        let psi = random_simplex_function(n_cells, n_particles, &mut rng)?;
        let full = extend_from_simplex(&psi)?;
        let (c, s) = (cube_form(&full, n_cells, n_particles, None), simplex_form(&psi, None));
        iso = iso.max(relative(c.mass, s.mass)).max(relative(c.h1_sq(), s.h1_sq()));
        let back = restrict_full_to_simplex(&full, n_cells, n_particles)?;
        inv = inv.max(back.values().iter().zip(psi.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
    }
    // T⁻¹ then T on antisymmetric data.
    let problem = ManyBodyProblem {
        bc: BoundarySpec::DirichletBoth,
        potential: PotentialSpec::Zero,
        interaction: InteractionSpec::NoInteraction,
        n_particles: 3,
    };
    let system = crate::mbspectrum::build_system(&problem, 8)?;
    let slater = &system.operator.basis;
    let psi = WaveVector::normalized((0..slater.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let full = evaluate_on_tensor_grid(&psi, slater, &system.orbitals.nodal);
    let scale = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rebuilt = extend_from_simplex(&restrict_full_to_simplex(&full, 8, 3)?)?;
    let round = rebuilt.iter().zip(&full).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
    let swap = antisymmetry_defect(&full, 9, 3) / scale;
    Ok(vec![
        Check::new("extension_isometry", iso, Relation::Le, 1e-12),
        Check::new("restrict_after_extend", inv, Relation::Le, 1e-12),
        Check::new("extend_after_restrict", round, Relation::Le, 1e-12),
        Check::new("antisymmetry_under_swap", swap, Relation::Le, 1e-12),
    ])
}

/// Uniform points of `I_N` fall in exactly one reflected simplex, with
/// equal volume fractions.
pub fn tessellation_checks(seed: u64, points: usize, n_particles: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms = Permutation::all(n_particles);
    let mut counts = vec![0usize; perms.len()];
    let mut bad = 0usize;
    for _ in 0..points {
        let x: Vec<f64> = (0..n_particles).map(|_| rng.gen::<f64>()).collect();
        let (sigma, margin) = locate_cell(&x);
        let members: Vec<usize> = (0..perms.len())
            .filter(|&j| perms[j].inverse().permute(&x).windows(2).all(|w| w[0] < w[1]))
            .collect();
        if margin <= 0.0 || members.len() != 1 || perms[members[0]] != sigma {
            bad += 1;
        } else {
            counts[members[0]] += 1;
        }
    }
    let p = 1.0 / perms.len() as f64;
    let se = (p * (1.0 - p) / points as f64).sqrt();
    let worst = counts.iter().map(|&c| (c as f64 / points as f64 - p).abs() / se).fold(0.0f64, f64::max);
    vec![
        Check::new("non_unique_cells", bad as f64, Relation::Le, 0.0),
        Check::new("cell_volume_deviation_in_se", worst, Relation::Le, 3.0),
    ]
}

/// `∫ρ = N` and `∫∫ρ₂ = N(N−1)` on a ground state.
pub fn density_checks(problem: &ManyBodyProblem, n_cells: usize, tag: &str) -> Result<Vec<Check>> {
    let sol = solve_problem(problem, n_cells, 1)?;
    let psi = WaveVector::normalized(sol.state(0).coeffs)?;
    let (basis, orbitals) = (&sol.system.operator.basis, &sol.system.orbitals);
    let n = problem.n_particles as f64;
    let rho = reduced_density(&psi, basis, orbitals)?.integral();
    let mut checks = vec![Check::new(format!("density_integral_{tag}"), (rho - n).abs(), Relation::Le, 1e-10)];
    if problem.n_particles >= 2 {
        let rho2 = reduced_pair_density(&psi, basis, orbitals)?.integral();
        checks.push(Check::new(format!("pair_density_integral_{tag}"), (rho2 - n * (n - 1.0)).abs(), Relation::Le, 1e-8));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_nested_chain() {
        let chain = [BoundarySpec::DirichletLeft, BoundarySpec::DirichletRight];
        let r = monotonicity_suite(&PotentialSpec::Zero, &InteractionSpec::NoInteraction, 1, &chain, (20, 40), 0.5);
        assert!(matches!(r, Err(Error::InvalidBoundary(_))));
    }

    #[test]
    fn single_particle_sum_is_identity() {
        let r = slater_sum_oracle(&PotentialSpec::Delta { x0: 0.3, strength: 4.0 }, BoundarySpec::DirichletBoth, 1, 6, 30).unwrap();
        assert!(r.passed());
        assert!(r.checks[0].measured <= 1e-10);
    }
}
