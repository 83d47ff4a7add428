//! Boundary flux of an eigenfunction on the face `x₁ = 0` or `x₁ = 1`, by
//! the weak formula `a(Ψ, F) − λ⟨Ψ, F⟩` for an extension `F = β(x₁) f(x′)`
//! and by the limit `−⟨γ_ε Ψ, f⟩ / ε` of traces on parallel hyperplanes.
//!
//! Only `N ≤ 2` is supported. For antisymmetric `Ψ` the pairing with `F`
//! equals the pairing with its antisymmetrization.

use serde::{Deserialize, Serialize};

use crate::basis::{nodal_overlap, nodal_potential, nodal_stiffness, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, SymMatrix};
use crate::manybody::{evaluate_on_tensor_grid, InteractionSpec, WaveVector};
use crate::mbspectrum::ManyBodySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    /// `x₁ = 0`.
    Left,
    /// `x₁ = 1`.
    Right,
}

/// Profile `β` of the extension across the face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    OneCell,
    TwoCell,
}

/// An eigenpair expressed in the orbitals of `system`.
#[derive(Debug, Clone, Copy)]
pub struct Eigenpair<'a> {
    pub system: &'a ManyBodySystem,
    pub psi: &'a WaveVector,
    pub eigenvalue: f64,
}

/// Default hyperplane offsets, in cells.
pub const DEFAULT_EPS_CELLS: [usize; 4] = [8, 4, 2, 1];

struct TraceData {
    n_cells: usize,
    n_particles: usize,
    /// Nodal values of `Ψ`, `n_nodes^N`, first coordinate slowest.
    full: Vec<f64>,
    one_body: SymMatrix,
    mass: SymMatrix,
}

fn trace_data(pair: &Eigenpair, f: &[f64]) -> Result<TraceData> {
    let system = pair.system;
    let basis = &system.operator.basis;
    let n_particles = basis.n_particles();
    let n_cells = system.grid.n_cells();
    if n_particles > 2 {
        return Err(Error::InvalidArgument(format!("boundary flux supports N ≤ 2, got {n_particles}")));
    }
    match n_particles {
        1 if f.len() != 1 => return Err(Error::DimensionMismatch(format!("N = 1 takes one profile value, got {}", f.len()))),
        2 if f.len() != n_cells + 1 => {
            return Err(Error::DimensionMismatch(format!("profile has {} values for {} nodes", f.len(), n_cells + 1)))
        }
        2 if f[0] != 0.0 || f[n_cells] != 0.0 => {
            return Err(Error::InvalidArgument("profile must vanish at the ends of the face (single-face support)".into()))
        }
        _ => {}
    }
    let origin = &system.operator.origin;
    let zero = PotentialSpec::Zero;
    let v = origin.potential.as_ref().unwrap_or(&zero);
    match origin.interaction {
        None | Some(InteractionSpec::NoInteraction) => {}
        // The contact term vanishes on the diagonal of an antisymmetric tensor interpolant.
        Some(InteractionSpec::DeltaContact { .. }) => {}
        Some(InteractionSpec::SampledKernel { .. }) => {
            return Err(Error::InvalidInteraction("boundary flux does not support sampled kernels".into()))
        }
    }
    let one_body = nodal_stiffness(n_cells).add_scaled(1.0, &nodal_potential(n_cells, v)?);
    let full = evaluate_on_tensor_grid(pair.psi, basis, &system.orbitals.nodal);
    Ok(TraceData { n_cells, n_particles, full, one_body, mass: nodal_overlap(n_cells) })
}

fn face_node(face: Face, n_cells: usize, offset: usize) -> usize {
    match face {
        Face::Left => offset,
        Face::Right => n_cells - offset,
    }
}

fn extension(face: Face, n_cells: usize, ext: Extension) -> Vec<f64> {
    let mut beta = vec![0.0; n_cells + 1];
    beta[face_node(face, n_cells, 0)] = 1.0;
    if ext == Extension::TwoCell {
        beta[face_node(face, n_cells, 1)] = 0.5;
    }
    beta
}

/// `a(Ψ, F) − λ⟨Ψ, F⟩` with `F = β(x₁) f(x′)`. For `N = 1`, `f` is a
/// single value; for `N = 2`, it holds nodal values along the face and
/// must vanish at both ends.
pub fn neumann_trace_weak(pair: &Eigenpair, face: Face, f: &[f64], ext: Extension) -> Result<f64> {
    let d = trace_data(pair, f)?;
    let beta = extension(face, d.n_cells, ext);
    let (a_beta, m_beta) = (d.one_body.matvec(&beta), d.mass.matvec(&beta));
    let lam = pair.eigenvalue;
    if d.n_particles == 1 {
        return Ok(f[0] * (dot(&d.full, &a_beta) - lam * dot(&d.full, &m_beta)));
    }
    let n_nodes = d.n_cells + 1;
    let (a_f, m_f) = (d.one_body.matvec(f), d.mass.matvec(f));
    // Ψ as an n_nodes × n_nodes matrix U; ⟨Ψ, β⊗f⟩_B = Σ β̃_i U_ij f̃_j.
    let bilinear = |left: &[f64], right: &[f64]| -> f64 {
        (0..n_nodes).map(|i| left[i] * dot(&d.full[i * n_nodes..(i + 1) * n_nodes], right)).sum()
    };
    Ok(bilinear(&a_beta, &m_f) + bilinear(&m_beta, &a_f) - lam * bilinear(&m_beta, &m_f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLimit {
    /// Intercept of the linear fit in `ε`.
    pub estimate: f64,
    pub slope: f64,
    /// `(ε, −⟨γ_ε Ψ, f⟩ / ε)` per offset.
    pub samples: Vec<(f64, f64)>,
    /// Root-mean-square residual of the fit.
    pub fit_residual: f64,
}

/// Linear extrapolation to `ε = 0` of `−⟨γ_ε Ψ, f⟩ / ε` for `ε = m h`,
/// `m ∈ eps_cells`. `Ψ` must vanish on the face.
pub fn neumann_trace_limit(pair: &Eigenpair, face: Face, f: &[f64], eps_cells: &[usize]) -> Result<TraceLimit> {
    let d = trace_data(pair, f)?;
    let n_nodes = d.n_cells + 1;
    if eps_cells.len() < 2 || eps_cells.iter().any(|&m| m == 0 || m >= d.n_cells) {
        return Err(Error::InvalidArgument(format!("need at least two offsets in 1..{}, got {eps_cells:?}", d.n_cells)));
    }
    let slice = |i: usize| -> &[f64] {
        if d.n_particles == 1 {
            &d.full[i..i + 1]
        } else {
            &d.full[i * n_nodes..(i + 1) * n_nodes]
        }
    };
    let weights = if d.n_particles == 1 { f.to_vec() } else { d.mass.matvec(f) };
    let scale = d.full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let on_face = slice(face_node(face, d.n_cells, 0)).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if on_face > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!("eigenfunction does not vanish on the face: trace {on_face:e}")));
    }
    let h = 1.0 / d.n_cells as f64;
    let samples: Vec<(f64, f64)> = eps_cells
        .iter()
        .map(|&m| {
            let eps = m as f64 * h;
            (eps, -dot(slice(face_node(face, d.n_cells, m)), &weights) / eps)
        })
        .collect();
    let k = samples.len() as f64;
    let (mx, my) = (samples.iter().map(|s| s.0).sum::<f64>() / k, samples.iter().map(|s| s.1).sum::<f64>() / k);
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let estimate = my - slope * mx;
    let fit_residual = (samples.iter().map(|s| (s.1 - estimate - slope * s.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(TraceLimit { estimate, slope, samples, fit_residual })
}
