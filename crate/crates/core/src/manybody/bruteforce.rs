//! Independent two-particle assembly: the quadratic form is evaluated on
//! antisymmetrized orbital products by explicit quadrature on the square,
//! with no use of excitation rules.

use super::hamiltonian::{ManyBodyMatrix, ManyBodyOperator, OperatorOrigin};
use super::interaction::{composite_gauss, InteractionSpec};
use super::orbitals::{cholesky_orbitals, Orbitals};
use super::slater::enumerate_slater_basis;
use crate::basis::{assemble_overlap, interpolate_nodal, GridBasis, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

pub const BRUTEFORCE_MAX_ORBITALS: usize = 12;

pub fn assemble_manybody_bruteforce(
    v: &PotentialSpec,
    w: &InteractionSpec,
    basis: &GridBasis,
    n_particles: usize,
) -> Result<ManyBodyOperator> {
    let orbitals = cholesky_orbitals(basis, &assemble_overlap(basis))?;
    assemble_manybody_bruteforce_with(v, w, basis, &orbitals, n_particles)
}

pub fn assemble_manybody_bruteforce_with(
    v: &PotentialSpec,
    w: &InteractionSpec,
    basis: &GridBasis,
    orbitals: &Orbitals,
    n_particles: usize,
) -> Result<ManyBodyOperator> {
    if n_particles != 2 {
        return Err(Error::InvalidArgument("brute-force assembly supports N = 2 only".into()));
    }
    let n = orbitals.len();
    if n > BRUTEFORCE_MAX_ORBITALS {
        return Err(Error::BasisTooLarge { size: n, cap: BRUTEFORCE_MAX_ORBITALS });
    }
    v.validate(basis.n_cells())?;
    w.validate(basis.n_cells())?;
    let slater = enumerate_slater_basis(n, 2)?;
    let pairs: Vec<(usize, usize)> = slater.tuples().iter().map(|t| (t[0], t[1])).collect();
    let dim = pairs.len();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = vec![vec![0.0; dim]; dim];

    // Ψ_I(x, y) and its gradient from orbital values and derivatives.
    let psi = |fx: &[f64], fy: &[f64], (a, b): (usize, usize)| r2 * (fx[a] * fy[b] - fx[b] * fy[a]);

    let (xs, ws) = composite_gauss(basis.n_cells(), 3);
    let fv: Vec<Vec<f64>> = xs.iter().map(|&x| orbitals.values_at(x)).collect();
    let dv: Vec<Vec<f64>> = xs.iter().map(|&x| orbitals.derivatives_at(x)).collect();
    let sampled_v = match v {
        PotentialSpec::Sampled { values } => Some(values.as_slice()),
        _ => None,
    };
    let kernel = match w {
        InteractionSpec::SampledKernel { values } => Some(values),
        _ => None,
    };
    let m = basis.n_cells();
    let mut vals = vec![0.0; dim];
    let mut gx = vec![0.0; dim];
    let mut gy = vec![0.0; dim];
    for (p, &x) in xs.iter().enumerate() {
        for (q, &y) in xs.iter().enumerate() {
            let wt = ws[p] * ws[q];
            for (k, &ab) in pairs.iter().enumerate() {
                vals[k] = psi(&fv[p], &fv[q], ab);
                gx[k] = psi(&dv[p], &fv[q], ab);
                gy[k] = psi(&fv[p], &dv[q], ab);
            }
            let mut mult = 0.0;
            if let Some(values) = sampled_v {
                mult += interpolate_nodal(values, m, x) + interpolate_nodal(values, m, y);
            }
            if let Some(k) = kernel {
                // Σ_{i≠j} W(x_i, x_j) for two particles.
                mult += 2.0 * kernel_value(k, m, x, y);
            }
            for i in 0..dim {
                for j in 0..=i {
                    h[i][j] += wt * (gx[i] * gx[j] + gy[i] * gy[j] + mult * vals[i] * vals[j]);
                }
            }
        }
    }

    // ρ_IJ(x) = 2 ∫ Ψ_I(x, y) Ψ_J(x, y) dy.
    let rho_at = |x: f64, out: &mut Vec<Vec<f64>>| {
        let fx = orbitals.values_at(x);
        for row in out.iter_mut() {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        for (q, _) in xs.iter().enumerate() {
            let pv: Vec<f64> = pairs.iter().map(|&ab| psi(&fx, &fv[q], ab)).collect();
            for i in 0..dim {
                for j in 0..=i {
                    out[i][j] += 2.0 * ws[q] * pv[i] * pv[j];
                }
            }
        }
    };
    let mut rho = vec![vec![0.0; dim]; dim];
    match v {
        PotentialSpec::Zero | PotentialSpec::Sampled { .. } => {}
        PotentialSpec::Delta { x0, strength } => {
            rho_at(*x0, &mut rho);
            add_scaled(&mut h, *strength, &rho);
        }
        PotentialSpec::HMinusOnePair { alpha, cell_values } => {
            // α ∫ρ over the square.
            for (p, _) in xs.iter().enumerate() {
                for (q, _) in xs.iter().enumerate() {
                    let wt = 2.0 * alpha * ws[p] * ws[q];
                    let pv: Vec<f64> = pairs.iter().map(|&ab| psi(&fv[p], &fv[q], ab)).collect();
                    for i in 0..dim {
                        for j in 0..=i {
                            h[i][j] += wt * pv[i] * pv[j];
                        }
                    }
                }
            }
            // Σ_c V_c ∫_c ρ′ = Σ_c V_c (ρ(x_{c+1}) − ρ(x_c)).
            for (c, &vc) in cell_values.iter().enumerate() {
                rho_at((c + 1) as f64 / m as f64, &mut rho);
                add_scaled(&mut h, vc, &rho);
                rho_at(c as f64 / m as f64, &mut rho);
                add_scaled(&mut h, -vc, &rho);
            }
        }
    }
    if let InteractionSpec::DeltaContact { g } = w {
        // g ∫ ρ₂(x, x) with ρ₂ = 2 Ψ_I Ψ_J on the diagonal.
        for (p, _) in xs.iter().enumerate() {
            let pv: Vec<f64> = pairs.iter().map(|&ab| psi(&fv[p], &fv[p], ab)).collect();
            for i in 0..dim {
                for j in 0..=i {
                    h[i][j] += 2.0 * g * ws[p] * pv[i] * pv[j];
                }
            }
        }
    }

    let mut out = SymMatrix::dense(dim);
    for i in 0..dim {
        for j in 0..=i {
            out.set(i, j, h[i][j]);
        }
    }
    Ok(ManyBodyOperator {
        h: ManyBodyMatrix::Dense(out),
        basis: slater,
        origin: OperatorOrigin {
            potential: Some(v.clone()),
            interaction: Some(w.clone()),
            bc: Some(basis.bc()),
            n_cells: Some(basis.n_cells()),
        },
    })
}

fn add_scaled(h: &mut [Vec<f64>], s: f64, r: &[Vec<f64>]) {
    for (hr, rr) in h.iter_mut().zip(r) {
        for (a, b) in hr.iter_mut().zip(rr) {
            *a += s * b;
        }
    }
}

fn kernel_value(values: &[Vec<f64>], m: usize, x: f64, y: f64) -> f64 {
    // Interpolate along x on the two bracketing rows, then along y.
    let col: Vec<f64> = (0..=m).map(|j| interpolate_nodal(&values.iter().map(|r| r[j]).collect::<Vec<_>>(), m, x)).collect();
    interpolate_nodal(&col, m, y)
}
