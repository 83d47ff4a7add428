//! Grid functions on the ordered simplex `S_N = {x₁ < … < x_N}` and on the
//! cube `I_N`, the antisymmetric extension `T` and its inverse, and discrete
//! norms and forms on the Kuhn triangulation of the tensor grid.
//!
//! Each grid cube is split into `N!` simplices by the order of the local
//! coordinates. The split is invariant under coordinate permutations, and
//! `S_N` is a union of whole simplices, so `T` is an exact isometry of the
//! piecewise-linear norms.

use super::permutation::Permutation;
use crate::error::{Error, Result};
use crate::manybody::{enumerate_slater_basis_capped, SlaterBasis};

/// Row-major index of a multi-index, first coordinate slowest.
pub fn flat_index(idx: &[usize], n_nodes: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n_nodes + i)
}

pub(crate) fn unflatten(mut flat: usize, n_nodes: usize, dim: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    for slot in (0..dim).rev() {
        out[slot] = flat % n_nodes;
        flat /= n_nodes;
    }
    out
}

/// Nodal values on the closed simplex grid: all non-decreasing node
/// multi-indices `i₁ ≤ … ≤ i_N`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFunction {
    n_cells: usize,
    n_particles: usize,
    values: Vec<f64>,
    // Non-decreasing tuples i correspond to increasing tuples i_k + k.
    shifted: SlaterBasis,
}

impl SimplexFunction {
    pub fn zeros(n_cells: usize, n_particles: usize) -> Result<Self> {
        let shifted = enumerate_slater_basis_capped(n_cells + n_particles, n_particles, usize::MAX)?;
        Ok(Self { n_cells, n_particles, values: vec![0.0; shifted.len()], shifted })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// The `k`-th non-decreasing node multi-index.
    pub fn index(&self, k: usize) -> Vec<usize> {
        self.shifted.tuple(k).iter().enumerate().map(|(slot, &t)| t - slot).collect()
    }

    pub fn position(&self, idx: &[usize]) -> Option<usize> {
        let shifted: Vec<usize> = idx.iter().enumerate().map(|(slot, &i)| i + slot).collect();
        self.shifted.rank(&shifted)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.position(idx).map_or(0.0, |k| self.values[k])
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.position(idx).expect("non-decreasing multi-index within the grid");
        self.values[k] = v;
    }

    pub fn is_tied(idx: &[usize]) -> bool {
        idx.windows(2).any(|w| w[0] == w[1])
    }
}

/// `TΨ`: the antisymmetric function on `I_N` with `(Tψ)(σx) = sgn(σ) ψ(x) / √N!`,
/// as a full nodal tensor. Tied nodes of the input must vanish.
pub fn extend_from_simplex(psi: &SimplexFunction) -> Result<Vec<f64>> {
    let (n_nodes, dim) = (psi.n_cells + 1, psi.n_particles);
    let perms = Permutation::all(dim);
    let scale = 1.0 / crate::manybody::wave::factorial(dim).sqrt();
    let mut full = vec![0.0; n_nodes.pow(dim as u32)];
    for k in 0..psi.len() {
        let v = psi.values[k];
        if v == 0.0 {
            continue;
        }
        let idx = psi.index(k);
        if SimplexFunction::is_tied(&idx) {
            return Err(Error::InvalidArgument(format!("nonzero value {v} at tied node {idx:?}")));
        }
        for p in &perms {
            full[flat_index(&p.permute(&idx), n_nodes)] = p.sign() * v * scale;
        }
    }
    Ok(full)
}

/// `T⁻¹Ψ = √N! Ψ|_{S_N}` on the closed simplex grid. Tied nodes lie on
/// the coincidence set and are set to zero.
pub fn restrict_full_to_simplex(full: &[f64], n_cells: usize, n_particles: usize) -> Result<SimplexFunction> {
    let n_nodes = n_cells + 1;
    if full.len() != n_nodes.pow(n_particles as u32) {
        return Err(Error::DimensionMismatch(format!("tensor has {} entries for {} nodes per axis", full.len(), n_nodes)));
    }
    let mut out = SimplexFunction::zeros(n_cells, n_particles)?;
    let scale = crate::manybody::wave::factorial(n_particles).sqrt();
    for k in 0..out.len() {
        let idx = out.index(k);
        if !SimplexFunction::is_tied(&idx) {
            out.values[k] = scale * full[flat_index(&idx, n_nodes)];
        }
    }
    Ok(out)
}

/// Largest `|Ψ(σx) − sgn(σ)Ψ(x)|` over the grid.
pub fn antisymmetry_defect(full: &[f64], n_nodes: usize, n_particles: usize) -> f64 {
    let perms = Permutation::all(n_particles);
    let mut worst: f64 = 0.0;
    for (flat, &v) in full.iter().enumerate() {
        let idx = unflatten(flat, n_nodes, n_particles);
        for p in &perms {
            let w = full[flat_index(&p.permute(&idx), n_nodes)];
            worst = worst.max((w - p.sign() * v).abs());
        }
    }
    worst
}

/// Mass, kinetic and potential parts of a quadratic form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FormParts {
    /// `‖u‖²_{L²}`.
    pub mass: f64,
    /// `‖∇u‖²_{L²}`.
    pub kinetic: f64,
    /// `∫ V u²` with vertex-lumped quadrature.
    pub potential: f64,
}

impl FormParts {
    pub fn h1_sq(&self) -> f64 {
        self.mass + self.kinetic
    }

    pub fn energy(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn rayleigh_quotient(&self) -> f64 {
        self.energy() / self.mass
    }
}

/// Integrates over all Kuhn simplices whose base corner is yielded by
/// `bases`, keeping only simplices inside `S_N` when `sorted_only`.
fn kuhn_integrate(
    n_cells: usize,
    dim: usize,
    bases: &mut dyn Iterator<Item = Vec<usize>>,
    sorted_only: bool,
    value: &dyn Fn(&[usize]) -> f64,
    potential: Option<&dyn Fn(&[usize]) -> f64>,
) -> FormParts {
    let h = 1.0 / n_cells as f64;
    let perms = Permutation::all(dim);
    let vol = h.powi(dim as i32) / crate::manybody::wave::factorial(dim);
    let mass_factor = vol / ((dim + 1) * (dim + 2)) as f64;
    let lump = vol / (dim + 1) as f64;
    let mut out = FormParts::default();
    let mut verts = vec![vec![0usize; dim]; dim + 1];
    let mut u = vec![0.0; dim + 1];
    for base in bases {
        for p in &perms {
            verts[0].copy_from_slice(&base);
            for k in 0..dim {
                let (head, tail) = verts.split_at_mut(k + 1);
                tail[0].copy_from_slice(&head[k]);
                tail[0][p.apply(k)] += 1;
            }
            if sorted_only {
                // Centroid (times dim + 1) strictly increasing.
                let c: Vec<usize> = (0..dim).map(|a| verts.iter().map(|v| v[a]).sum()).collect();
                if c.windows(2).any(|w| w[0] >= w[1]) {
                    continue;
                }
            }
            for (uk, v) in u.iter_mut().zip(&verts) {
                *uk = value(v);
            }
            let s: f64 = u.iter().sum();
            let s2: f64 = u.iter().map(|x| x * x).sum();
            out.mass += mass_factor * (s2 + s * s);
            let g2: f64 = u.windows(2).map(|w| (w[1] - w[0]) / h).map(|d| d * d).sum();
            out.kinetic += vol * g2;
            if let Some(pot) = potential {
                out.potential += lump * verts.iter().zip(&u).map(|(v, uk)| pot(v) * uk * uk).sum::<f64>();
            }
        }
    }
    out
}

fn all_bases(n_cells: usize, dim: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n_cells.pow(dim as u32)).map(move |f| unflatten(f, n_cells, dim))
}

/// Norms and form of a full nodal tensor over the cube `I_N`.
pub fn cube_form(full: &[f64], n_cells: usize, n_particles: usize, potential: Option<&dyn Fn(&[usize]) -> f64>) -> FormParts {
    let n_nodes = n_cells + 1;
    assert_eq!(full.len(), n_nodes.pow(n_particles as u32));
    let value = |v: &[usize]| full[flat_index(v, n_nodes)];
    kuhn_integrate(n_cells, n_particles, &mut all_bases(n_cells, n_particles), false, &value, potential)
}

/// Norms and form of simplex data over `S_N`.
pub fn simplex_form(psi: &SimplexFunction, potential: Option<&dyn Fn(&[usize]) -> f64>) -> FormParts {
    let (n_cells, dim) = (psi.n_cells, psi.n_particles);
    let value = |v: &[usize]| psi.get(v);
    // Only non-decreasing base corners carry simplices inside S_N.
    let mut bases = all_bases(n_cells, dim).filter(|b| b.windows(2).all(|w| w[0] <= w[1]));
    kuhn_integrate(n_cells, dim, &mut bases, true, &value, potential)
}

/// Relative defect of `Ψ(0, x′) = (−1)^{N−1} α Ψ(x′, 1)` over boundary nodes.
pub fn quasi_periodic_trace_defect(full: &[f64], n_cells: usize, n_particles: usize, alpha: f64) -> f64 {
    let n_nodes = n_cells + 1;
    let factor = if n_particles % 2 == 1 { alpha } else { -alpha };
    let scale = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for f in 0..n_nodes.pow(n_particles as u32 - 1) {
        let rest = unflatten(f, n_nodes, n_particles - 1);
        let mut left = vec![0];
        left.extend(&rest);
        let mut right = rest.clone();
        right.push(n_cells);
        let d = full[flat_index(&left, n_nodes)] - factor * full[flat_index(&right, n_nodes)];
        worst = worst.max(d.abs());
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_antisymmetrization() {
        let mut f = SimplexFunction::zeros(4, 2).unwrap();
        f.set(&[1, 3], 2.0);
        let full = extend_from_simplex(&f).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((full[flat_index(&[1, 3], 5)] - 2.0 * r).abs() < 1e-15);
        assert!((full[flat_index(&[3, 1], 5)] + 2.0 * r).abs() < 1e-15);
        assert_eq!(full.iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn zero_maps_to_zero_and_ties_rejected() {
        let f = SimplexFunction::zeros(3, 3).unwrap();
        assert!(extend_from_simplex(&f).unwrap().iter().all(|v| *v == 0.0));
        let mut g = f.clone();
        g.set(&[1, 1, 2], 1.0);
        assert!(extend_from_simplex(&g).is_err());
    }

    #[test]
    fn closed_grid_indexing() {
        let f = SimplexFunction::zeros(3, 2).unwrap();
        // C(5, 2) non-decreasing pairs over 4 nodes.
        assert_eq!(f.len(), 10);
        for k in 0..f.len() {
            let idx = f.index(k);
            assert!(idx.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(f.position(&idx), Some(k));
        }
    }

    #[test]
    fn cube_volume_and_constant_gradient() {
        // u = x₁ + 2x₂ on the unit square.
        let n = 4;
        let full: Vec<f64> = (0..25).map(|f| {
            let i = unflatten(f, 5, 2);
            (i[0] as f64 + 2.0 * i[1] as f64) / n as f64
        }).collect();
        let parts = cube_form(&full, n, 2, Some(&|_| 1.0));
        assert!((parts.kinetic - 5.0).abs() < 1e-12);
        // ∫(x + 2y)² = 1/3 + 4/3 + 1 = 8/3.
        assert!((parts.mass - 8.0 / 3.0).abs() < 1e-12);
    }
}
