//! Lowest eigenpairs of many-body operators, two-grid degeneracy
//! classification of the ground state, and an inverse-iteration cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{assemble_overlap, assemble_potential, assemble_stiffness, build_grid_basis, BoundarySpec, GridBasis, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, lobpcg_from, norm2, symmetric_eigen, Cholesky, LinearOperator, LobpcgOptions, Preconditioner, SymMatrix};
use crate::manybody::{
    assemble_manybody, eigen_orbitals, enumerate_slater_basis, transform_two_body, InteractionSpec, ManyBodyMatrix,
    ManyBodyOperator, OperatorOrigin, Orbitals, WaveVector,
};
use crate::spectrum::SpectralResult;

/// Largest dimension solved by dense diagonalization.
pub const MB_DENSE_LIMIT: usize = 800;

const RESIDUAL_TOL: f64 = 1e-8;

struct ShiftedJacobi(Vec<f64>);

impl Preconditioner for ShiftedJacobi {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        for ((o, ri), d) in out.iter_mut().zip(r).zip(&self.0) {
            *o = ri * d;
        }
    }
}

/// Lowest `k` eigenpairs with Euclidean-orthonormal eigenvectors.
pub fn solve_mb_eig(op: &ManyBodyOperator, k: usize) -> Result<SpectralResult> {
    let h = &op.h;
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let scale = h.norm1();
    let block = (k + 4).min(n / 3);
    let (values, vectors) = match h {
        ManyBodyMatrix::Dense(m) if n <= MB_DENSE_LIMIT || block < k => dense_lowest(m, k)?,
        ManyBodyMatrix::Sparse(_) if block < k => {
            return Err(Error::InvalidArgument(format!("k = {k} too large for an iterative solve of dimension {n}")))
        }
        _ => {
            let diag = h.diagonal();
            let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
            let sigma = dmin - (1.0f64).max(0.1 * dmin.abs());
            let prec = ShiftedJacobi(diag.iter().map(|d| 1.0 / (d - sigma)).collect());
            // Start from the determinants with the lowest diagonal, lightly perturbed.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
            let mut rng = ChaCha8Rng::seed_from_u64(0x6a7e);
            let start: Vec<Vec<f64>> = order[..block]
                .iter()
                .map(|&i| {
                    let mut v: Vec<f64> = (0..n).map(|_| 1e-3 * (rng.gen::<f64>() - 0.5) / (n as f64).sqrt()).collect();
                    v[i] += 1.0;
                    v
                })
                .collect();
            let opts = LobpcgOptions {
                block,
                tol: 1e-3 * RESIDUAL_TOL,
                fallback_tol: RESIDUAL_TOL,
                scale,
                b_scale: 1.0,
                max_iter: 3000,
                seed: 0x5eed,
            };
            let res = lobpcg_from(h, None, &prec, k, &opts, &start)?;
            (res.values, res.vectors)
        }
    };
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(l, x)| {
            let hx = h.matvec(x);
            norm2(&hx.iter().zip(x).map(|(a, b)| a - l * b).collect::<Vec<_>>())
        })
        .collect();
    Ok(SpectralResult { eigenvalues: values, eigenvectors: vectors, residuals, k_requested: k })
}

fn dense_lowest(m: &SymMatrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = symmetric_eigen(m)?;
    Ok((eig.values[..k].to_vec(), (0..k).map(|j| eig.vectors.column(j)).collect()))
}

/// Scale-relative residual `max_i ‖Hx_i − λ_i x_i‖ / (‖H‖₁ + |λ_i|)`.
pub fn relative_residual(op: &ManyBodyOperator, res: &SpectralResult) -> f64 {
    let scale = op.h.norm1();
    res.eigenvalues.iter().zip(&res.residuals).map(|(l, r)| r / (scale + l.abs())).fold(0.0, f64::max)
}

/// A fully specified many-body problem; grid-bound data are resampled to
/// whichever grid it is solved on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyProblem {
    pub bc: BoundarySpec,
    pub potential: PotentialSpec,
    pub interaction: InteractionSpec,
    pub n_particles: usize,
}

/// Operator together with the grid and orbitals it is expressed in.
#[derive(Debug, Clone)]
pub struct ManyBodySystem {
    pub grid: GridBasis,
    pub orbitals: Orbitals,
    pub orbital_energies: Vec<f64>,
    pub operator: ManyBodyOperator,
}

/// Builds the Galerkin operator on the full antisymmetric product of the
/// grid space, using one-body eigenfunctions as orbitals.
pub fn build_system(problem: &ManyBodyProblem, n_cells: usize) -> Result<ManyBodySystem> {
    let grid = build_grid_basis(n_cells, problem.bc)?;
    let v = problem.potential.resample(n_cells);
    let w = problem.interaction.resample(n_cells);
    let m = assemble_overlap(&grid);
    let a = assemble_stiffness(&grid).add_scaled(1.0, &assemble_potential(&grid, &v)?);
    let (orbitals, mu) = eigen_orbitals(&grid, &a, &m)?;
    let two = transform_two_body(&w, &grid, &orbitals)?;
    let slater = enumerate_slater_basis(orbitals.len(), problem.n_particles)?;
    let mut operator = assemble_manybody(&SymMatrix::from_diagonal(&mu), &two, &slater)?;
    operator.origin = OperatorOrigin { potential: Some(v), interaction: Some(w), bc: Some(problem.bc), n_cells: Some(n_cells) };
    Ok(ManyBodySystem { grid, orbitals, orbital_energies: mu, operator })
}

#[derive(Debug, Clone)]
pub struct ManyBodySolution {
    pub system: ManyBodySystem,
    pub spectrum: SpectralResult,
}

impl ManyBodySolution {
    pub fn state(&self, i: usize) -> WaveVector {
        WaveVector::new(self.spectrum.eigenvectors[i].clone()).expect("solver output is finite")
    }
}

pub fn solve_problem(problem: &ManyBodyProblem, n_cells: usize, k: usize) -> Result<ManyBodySolution> {
    let system = build_system(problem, n_cells)?;
    let spectrum = solve_mb_eig(&system.operator, k)?;
    Ok(ManyBodySolution { system, spectrum })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneracyVerdict {
    NonDegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLevel {
    pub n_cells: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub levels: [GridLevel; 2],
    /// Gaps at or below this are solver noise and count as zero.
    pub noise_floor: f64,
    /// `gap(h/2) / gap(h)` after flooring; `0` when both gaps are noise.
    pub refinement_ratio: f64,
    /// `|λ₁(h) − λ₁(h/2)|`.
    pub discretization_error_estimate: f64,
    pub verdict: DegeneracyVerdict,
}

impl DegeneracyReport {
    pub fn from_levels(coarse: GridLevel, fine: GridLevel) -> Self {
        let noise_floor = 1e-8 * coarse.lambda1.abs().max(fine.lambda1.abs()).max(1.0);
        let floor = |g: f64| if g <= noise_floor { 0.0 } else { g };
        let (gc, gf) = (floor(coarse.gap), floor(fine.gap));
        let refinement_ratio = if gc == 0.0 {
            if gf == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            gf / gc
        };
        let err = (coarse.lambda1 - fine.lambda1).abs();
        let verdict = verdict_for(fine.gap, refinement_ratio, err);
        Self { levels: [coarse, fine], noise_floor, refinement_ratio, discretization_error_estimate: err, verdict }
    }

    /// Recomputes the verdict from the stored fields.
    pub fn is_consistent(&self) -> bool {
        verdict_for(self.levels[1].gap, self.refinement_ratio, self.discretization_error_estimate) == self.verdict
    }

    pub fn gap_margin(&self) -> f64 {
        self.levels[1].gap / (4.0 * self.discretization_error_estimate)
    }
}

fn verdict_for(fine_gap: f64, ratio: f64, err: f64) -> DegeneracyVerdict {
    if ratio <= 0.5 {
        DegeneracyVerdict::Degenerate
    } else if fine_gap > 4.0 * err {
        DegeneracyVerdict::NonDegenerate
    } else {
        DegeneracyVerdict::Inconclusive
    }
}

/// Default grid pair for a particle count.
pub fn default_grids(n_particles: usize) -> (usize, usize) {
    if n_particles <= 2 {
        (40, 80)
    } else {
        (20, 40)
    }
}

/// Solves on both grids and classifies the ground state; also returns the
/// two solutions with at least `k` eigenpairs each.
pub fn classify_degeneracy_with_solutions(
    problem: &ManyBodyProblem,
    grids: (usize, usize),
    k: usize,
) -> Result<(DegeneracyReport, [ManyBodySolution; 2])> {
    if grids.1 != 2 * grids.0 {
        return Err(Error::InvalidArgument(format!("grids must be (n, 2n), got {grids:?}")));
    }
    let k = k.max(2);
    let coarse = solve_problem(problem, grids.0, k)?;
    let fine = solve_problem(problem, grids.1, k)?;
    let level = |s: &ManyBodySolution, n_cells| {
        let ev = &s.spectrum.eigenvalues;
        GridLevel { n_cells, lambda1: ev[0], lambda2: ev[1], gap: ev[1] - ev[0] }
    };
    let report = DegeneracyReport::from_levels(level(&coarse, grids.0), level(&fine, grids.1));
    Ok((report, [coarse, fine]))
}

pub fn classify_degeneracy(problem: &ManyBodyProblem, grids: (usize, usize)) -> Result<DegeneracyReport> {
    Ok(classify_degeneracy_with_solutions(problem, grids, 2)?.0)
}

#[derive(Debug, Clone)]
pub struct InverseIterationResult {
    pub psi: WaveVector,
    pub eigenvalue: f64,
    pub iterations: usize,
}

/// Shift-and-invert power iteration for the ground state. The shift must
/// lie strictly below `λ₁`; this is detected through the factorization
/// (dense) or the conjugate-gradient curvature (sparse) of `H − shift`.
pub fn inverse_iteration_ground(op: &ManyBodyOperator, shift: f64, tol: f64) -> Result<InverseIterationResult> {
    const MAX_ITER: usize = 2000;
    let n = op.dim();
    let scale = op.h.norm1();
    let solver: Box<dyn Fn(&[f64]) -> Result<Vec<f64>>> = match &op.h {
        ManyBodyMatrix::Dense(m) => {
            let shifted = m.add_scaled(-shift, &SymMatrix::identity(n));
            let chol = Cholesky::factor(&shifted).map_err(|_| Error::ShiftTooHigh { shift })?;
            Box::new(move |b: &[f64]| Ok(chol.solve(b)))
        }
        ManyBodyMatrix::Sparse(_) => {
            let h = &op.h;
            let diag: Vec<f64> = h.diagonal().iter().map(|d| d - shift).collect();
            if diag.iter().any(|&d| d <= 0.0) {
                return Err(Error::ShiftTooHigh { shift });
            }
            Box::new(move |b: &[f64]| shifted_cg(h, shift, &diag, b))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x1417);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.5).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 1..=MAX_ITER {
        let mut y = solver(&x)?;
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
        let hx = op.h.matvec(&x);
        let theta = dot(&x, &hx);
        let r = norm2(&hx.iter().zip(&x).map(|(a, b)| a - theta * b).collect::<Vec<_>>());
        if theta <= shift {
            return Err(Error::ShiftTooHigh { shift });
        }
        if r <= tol * (scale + theta.abs()) {
            // Fix the sign by the largest-magnitude entry.
            let imax = (0..n).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0);
            if x[imax] < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(InverseIterationResult { psi: WaveVector::new(x)?, eigenvalue: theta, iterations: it });
        }
        if r < 0.999 * best {
            best = r;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 50 {
                return Err(Error::Stagnation { iterations: it });
            }
        }
    }
    Err(Error::Stagnation { iterations: MAX_ITER })
}

/// Jacobi-preconditioned CG on `(H − shift) y = b`.
fn shifted_cg(h: &ManyBodyMatrix, shift: f64, diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let b_norm = norm2(b);
    let mut ap = vec![0.0; n];
    for it in 0..10 * n.max(100) {
        h.apply(&p, &mut ap);
        for (a, pi) in ap.iter_mut().zip(&p) {
            *a -= shift * pi;
        }
        let curv = dot(&p, &ap);
        if curv <= 0.0 {
            return Err(Error::ShiftTooHigh { shift });
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= 1e-13 * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if it > 0 && !rz.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: 10 * n.max(100), residual: norm2(&r) })
}
