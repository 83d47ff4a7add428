//! Single-particle P1 finite-element basis on a uniform grid of `I = (0, 1)`
//! together with overlap, stiffness and potential assembly.
//!
//! Boundary conditions are encoded in the degrees of freedom: each dof is a
//! weighted sum of nodal hat functions, and its trace pair
//! `(value at 0, value at 1)` lies in the admissible boundary subspace.
//! Assembly works on the full nodal (free) basis and is projected onto the
//! dofs afterwards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Admissible boundary subspace `L ⊂ ℝ²` for the trace pair `(ψ(0), ψ(1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    DirichletBoth,
    /// `ψ(0) = 0`, free at 1.
    DirichletLeft,
    /// `ψ(1) = 0`, free at 0.
    DirichletRight,
    Free,
    /// `ψ(0) = α ψ(1)`.
    QuasiPeriodic { alpha: f64 },
    /// `L = span{(a, b)}`.
    Line { a: f64, b: f64 },
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundarySpec::QuasiPeriodic { alpha } => {
                if !alpha.is_finite() || alpha == 0.0 {
                    return Err(Error::InvalidBoundary("alpha must be nonzero and finite".into()));
                }
            }
            BoundarySpec::Line { a, b } => {
                if !a.is_finite() || !b.is_finite() || (a == 0.0 && b == 0.0) {
                    return Err(Error::InvalidBoundary("line direction must be a finite nonzero vector".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Weights `(w0, w1)` of the coupled boundary dof, when there is one.
    fn coupled_weights(&self) -> Option<(f64, f64)> {
        match *self {
            BoundarySpec::QuasiPeriodic { alpha } => Some((alpha, 1.0)),
            BoundarySpec::Line { a, b } if a != 0.0 && b != 0.0 => Some((a, b)),
            _ => None,
        }
    }

    /// Whether the left (resp. right) endpoint carries an independent dof.
    fn free_ends(&self) -> (bool, bool) {
        match *self {
            BoundarySpec::DirichletBoth => (false, false),
            BoundarySpec::DirichletLeft => (false, true),
            BoundarySpec::DirichletRight => (true, false),
            BoundarySpec::Free => (true, true),
            BoundarySpec::QuasiPeriodic { .. } => (false, false),
            BoundarySpec::Line { a, b } => {
                if a != 0.0 && b != 0.0 {
                    (false, false)
                } else {
                    (a != 0.0, b != 0.0)
                }
            }
        }
    }

    /// The quasi-periodicity factor `α` when `L = {β₀ = α β₁}` with `α ≠ 0`.
    pub fn quasi_alpha(&self) -> Option<f64> {
        match *self {
            BoundarySpec::QuasiPeriodic { alpha } => Some(alpha),
            BoundarySpec::Line { a, b } if a != 0.0 && b != 0.0 => Some(a / b),
            _ => None,
        }
    }

    /// One of the four local (separable) subspaces `{0}×ℝ`, `ℝ×{0}`, `{0}`, `ℝ²`.
    pub fn is_separable(&self) -> bool {
        self.quasi_alpha().is_none()
    }

    /// Whether constants lie in `H¹_L`, i.e. `(1, 1) ∈ L`.
    pub fn admits_constants(&self) -> bool {
        match *self {
            BoundarySpec::Free => true,
            _ => self.quasi_alpha() == Some(1.0),
        }
    }
}

/// One basis function: a weighted sum of nodal hats.
#[derive(Debug, Clone, PartialEq)]
pub struct Dof {
    pub nodes: Vec<(usize, f64)>,
    /// `(φ(0), φ(1))`.
    pub trace: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBasis {
    n_cells: usize,
    h: f64,
    bc: BoundarySpec,
    dofs: Vec<Dof>,
    /// For each node, the dofs that contain it with their weights.
    node_dofs: Vec<Vec<(usize, f64)>>,
}

pub fn build_grid_basis(n_cells: usize, bc: BoundarySpec) -> Result<GridBasis> {
    GridBasis::new(n_cells, bc)
}

impl GridBasis {
    pub fn new(n_cells: usize, bc: BoundarySpec) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::TooFewCells(n_cells));
        }
        bc.validate()?;
        let mut dofs = Vec::with_capacity(n_cells + 1);
        if let Some((w0, w1)) = bc.coupled_weights() {
            dofs.push(Dof { nodes: vec![(0, w0), (n_cells, w1)], trace: (w0, w1) });
        }
        let (left, right) = bc.free_ends();
        if left {
            dofs.push(Dof { nodes: vec![(0, 1.0)], trace: (1.0, 0.0) });
        }
        for i in 1..n_cells {
            dofs.push(Dof { nodes: vec![(i, 1.0)], trace: (0.0, 0.0) });
        }
        if right {
            dofs.push(Dof { nodes: vec![(n_cells, 1.0)], trace: (0.0, 1.0) });
        }
        let mut node_dofs = vec![Vec::new(); n_cells + 1];
        for (d, dof) in dofs.iter().enumerate() {
            for &(node, w) in &dof.nodes {
                node_dofs[node].push((d, w));
            }
        }
        Ok(Self { n_cells, h: 1.0 / n_cells as f64, bc, dofs, node_dofs })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bc(&self) -> BoundarySpec {
        self.bc
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node_x(i)).collect()
    }

    /// Nodal values of `Σ_d c_d φ_d`.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n_dofs());
        let mut u = vec![0.0; self.n_nodes()];
        for (dof, &c) in self.dofs.iter().zip(coeffs) {
            for &(node, w) in &dof.nodes {
                u[node] += w * c;
            }
        }
        u
    }

    /// `Eᵀ u`: pairs nodal data with each dof.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        assert_eq!(nodal.len(), self.n_nodes());
        self.dofs
            .iter()
            .map(|dof| dof.nodes.iter().map(|&(node, w)| w * nodal[node]).sum())
            .collect()
    }

    /// Cell index and local coordinate `t ∈ [0, 1]` of `x ∈ [0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = x / self.h;
        let c = (s.floor() as usize).min(self.n_cells - 1);
        (c, s - c as f64)
    }

    /// Values of the nodal hats at `x`: `[(node, value)]` on its cell.
    pub fn hat_values(&self, x: f64) -> [(usize, f64); 2] {
        let (c, t) = self.locate(x);
        [(c, 1.0 - t), (c + 1, t)]
    }

    pub fn eval_dof(&self, d: usize, x: f64) -> f64 {
        let hats = self.hat_values(x);
        self.dofs[d]
            .nodes
            .iter()
            .map(|&(node, w)| hats.iter().filter(|(n, _)| *n == node).map(|(_, v)| w * v).sum::<f64>())
            .sum()
    }

    /// Derivative of dof `d` on the cell containing `x`.
    pub fn eval_dof_derivative(&self, d: usize, x: f64) -> f64 {
        let (c, _) = self.locate(x);
        self.dofs[d]
            .nodes
            .iter()
            .map(|&(node, w)| {
                if node == c {
                    -w / self.h
                } else if node == c + 1 {
                    w / self.h
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Projects a tridiagonal nodal matrix onto the dofs: `Eᵀ A E`.
    pub fn project(&self, nodal: &SymMatrix) -> SymMatrix {
        assert_eq!(nodal.dim(), self.n_nodes());
        let n = self.n_dofs();
        // Dofs q ≤ p that share or neighbour a node of p.
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, dof) in self.dofs.iter().enumerate() {
            let mut qs = Vec::new();
            for &(node, _) in &dof.nodes {
                let lo = node.saturating_sub(nodal.bandwidth());
                let hi = (node + nodal.bandwidth()).min(self.n_cells);
                for m in lo..=hi {
                    for &(q, _) in &self.node_dofs[m] {
                        if q <= p {
                            qs.push(q);
                        }
                    }
                }
            }
            qs.sort_unstable();
            qs.dedup();
            neighbours[p] = qs;
        }
        let first = neighbours.iter().enumerate().map(|(p, qs)| qs.first().copied().unwrap_or(p)).collect();
        let mut out = SymMatrix::with_profile(first);
        for p in 0..n {
            for &q in &neighbours[p] {
                let mut s = 0.0;
                for &(i, wi) in &self.dofs[p].nodes {
                    for &(j, wj) in &self.dofs[q].nodes {
                        s += wi * wj * nodal.get(i, j);
                    }
                }
                out.set(p, q, s);
            }
        }
        out
    }
}

/// External potential `v ∈ H⁻¹(I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `strength · δ(x - x0)`, `x0 ∈ [0, 1]`.
    Delta { x0: f64, strength: f64 },
    /// Nodal values of a piecewise-linear multiplicative potential.
    Sampled { values: Vec<f64> },
    /// `v(φ) = alpha ∫φ + Σ_c V_c ∫_c φ′` with per-cell `V`.
    HMinusOnePair { alpha: f64, cell_values: Vec<f64> },
}

impl PotentialSpec {
    pub fn sampled_from_fn(n_cells: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..=n_cells).map(|i| f(i as f64 / n_cells as f64)).collect();
        PotentialSpec::Sampled { values }
    }

    /// Re-expresses grid-bound data on a uniform grid with `n_cells` cells by
    /// linear interpolation (node data) or averaging (cell data).
    pub fn resample(&self, n_cells: usize) -> PotentialSpec {
        match self {
            PotentialSpec::Sampled { values } if values.len() != n_cells + 1 && values.len() >= 2 => {
                let m = values.len() - 1;
                PotentialSpec::sampled_from_fn(n_cells, |x| interpolate_nodal(values, m, x))
            }
            PotentialSpec::HMinusOnePair { alpha, cell_values }
                if cell_values.len() != n_cells && !cell_values.is_empty() =>
            {
                let m = cell_values.len();
                let cell_values = (0..n_cells)
                    .map(|c| {
                        let x = (c as f64 + 0.5) / n_cells as f64;
                        cell_values[((x * m as f64) as usize).min(m - 1)]
                    })
                    .collect();
                PotentialSpec::HMinusOnePair { alpha: *alpha, cell_values }
            }
            other => other.clone(),
        }
    }

    pub fn validate(&self, n_cells: usize) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Delta { x0, strength } => {
                if !(0.0..=1.0).contains(x0) {
                    return Err(Error::InvalidPotential(format!("delta position {x0} outside [0, 1]")));
                }
                if !strength.is_finite() {
                    return Err(Error::InvalidPotential("delta strength must be finite".into()));
                }
                Ok(())
            }
            PotentialSpec::Sampled { values } => {
                if values.len() != n_cells + 1 {
                    return Err(Error::InvalidPotential(format!(
                        "sampled potential has {} values, grid has {} nodes",
                        values.len(),
                        n_cells + 1
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidPotential("sampled values must be finite".into()));
                }
                Ok(())
            }
            PotentialSpec::HMinusOnePair { alpha, cell_values } => {
                if cell_values.len() != n_cells {
                    return Err(Error::InvalidPotential(format!(
                        "H^-1 pair has {} cell values, grid has {} cells",
                        cell_values.len(),
                        n_cells
                    )));
                }
                if !alpha.is_finite() || cell_values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidPotential("H^-1 pair data must be finite".into()));
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn interpolate_nodal(values: &[f64], m: usize, x: f64) -> f64 {
    let s = (x * m as f64).clamp(0.0, m as f64);
    let c = (s.floor() as usize).min(m - 1);
    let t = s - c as f64;
    values[c] * (1.0 - t) + values[c + 1] * t
}

// ∫₀¹ ℓ_a ℓ_b ℓ_c dt for the local linear shape functions ℓ₀ = 1 - t, ℓ₁ = t.
fn triple_integral(a: usize, b: usize, c: usize) -> f64 {
    match a + b + c {
        0 | 3 => 0.25,
        _ => 1.0 / 12.0,
    }
}

/// Mass matrix of the full nodal basis.
pub fn nodal_overlap(n_cells: usize) -> SymMatrix {
    let h = 1.0 / n_cells as f64;
    let mut m = SymMatrix::banded(n_cells + 1, 1);
    for c in 0..n_cells {
        m.add(c, c, h / 3.0);
        m.add(c + 1, c + 1, h / 3.0);
        m.add(c + 1, c, h / 6.0);
    }
    m
}

/// Stiffness matrix of the full nodal basis.
pub fn nodal_stiffness(n_cells: usize) -> SymMatrix {
    let inv_h = n_cells as f64;
    let mut k = SymMatrix::banded(n_cells + 1, 1);
    for c in 0..n_cells {
        k.add(c, c, inv_h);
        k.add(c + 1, c + 1, inv_h);
        k.add(c + 1, c, -inv_h);
    }
    k
}

/// Potential matrix `v(φ_i φ_j)` of the full nodal basis.
pub fn nodal_potential(n_cells: usize, v: &PotentialSpec) -> Result<SymMatrix> {
    v.validate(n_cells)?;
    let h = 1.0 / n_cells as f64;
    let mut p = SymMatrix::banded(n_cells + 1, 1);
    match v {
        PotentialSpec::Zero => {}
        PotentialSpec::Delta { x0, strength } => {
            let s = x0 * n_cells as f64;
            let c = (s.floor() as usize).min(n_cells - 1);
            let t = s - c as f64;
            let e = [(c, 1.0 - t), (c + 1, t)];
            for (a, &(i, ei)) in e.iter().enumerate() {
                for &(j, ej) in &e[..=a] {
                    p.add(i, j, strength * ei * ej);
                }
            }
        }
        PotentialSpec::Sampled { values } => {
            for c in 0..n_cells {
                let vc = [values[c], values[c + 1]];
                for a in 0..2 {
                    for b in 0..=a {
                        let s: f64 = (0..2).map(|k| vc[k] * triple_integral(a, b, k)).sum();
                        p.add(c + a, c + b, h * s);
                    }
                }
            }
        }
        PotentialSpec::HMinusOnePair { alpha, cell_values } => {
            let m = nodal_overlap(n_cells);
            p = m.scaled(*alpha);
            // ∫_c (φ_i φ_j)′ = [φ_i φ_j] at the cell ends.
            for (c, &vc) in cell_values.iter().enumerate() {
                p.add(c, c, -vc);
                p.add(c + 1, c + 1, vc);
            }
        }
    }
    Ok(p)
}

pub fn assemble_overlap(basis: &GridBasis) -> SymMatrix {
    basis.project(&nodal_overlap(basis.n_cells()))
}

pub fn assemble_stiffness(basis: &GridBasis) -> SymMatrix {
    basis.project(&nodal_stiffness(basis.n_cells()))
}

pub fn assemble_potential(basis: &GridBasis, v: &PotentialSpec) -> Result<SymMatrix> {
    Ok(basis.project(&nodal_potential(basis.n_cells(), v)?))
}

/// Sampled estimate of the form bound constant `C` in
/// `|v(|ψ|²)| ≤ ε‖ψ‖²_{H¹} + C‖ψ‖²_{L²}`.
///
/// Trial vectors are random coefficient vectors smoothed by a random number
/// of neighbour-averaging passes, so both rough and smooth functions occur.
pub fn estimate_form_bound(basis: &GridBasis, v: &PotentialSpec, epsilon: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if trials < 100 {
        return Err(Error::InvalidArgument("at least 100 trials are required".into()));
    }
    let m = assemble_overlap(basis);
    let k = assemble_stiffness(basis);
    let p = assemble_potential(basis, v)?;
    let h1 = k.add_scaled(1.0, &m);
    let n = basis.n_dofs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: f64 = 0.0;
    for _ in 0..trials {
        let mut psi: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let passes = rng.gen_range(0..=n.min(64));
        for _ in 0..passes {
            let prev = psi.clone();
            for i in 0..n {
                let l = if i > 0 { prev[i - 1] } else { prev[i] };
                let r = if i + 1 < n { prev[i + 1] } else { prev[i] };
                psi[i] = 0.25 * l + 0.5 * prev[i] + 0.25 * r;
            }
        }
        let l2 = m.quadratic(&psi);
        if l2 <= 0.0 {
            continue;
        }
        let ratio = (p.quadratic(&psi).abs() - epsilon * h1.quadratic(&psi)) / l2;
        c = c.max(ratio);
    }
    Ok(c)
}
