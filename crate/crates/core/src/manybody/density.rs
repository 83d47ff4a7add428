//! One- and two-particle reduced densities of a determinant expansion,
//! sampled at grid nodes and cell midpoints.
//!
//! Both densities are piecewise polynomial of degree two per cell and
//! coordinate, so composite Simpson weights on these points integrate them
//! exactly.

use super::orbitals::Orbitals;
use super::slater::{enumerate_slater_basis_capped, SlaterBasis};
use super::wave::WaveVector;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// Nodes and midpoints, `2 n_cells + 1` points.
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDensityProfile {
    pub points: Vec<f64>,
    /// `values[(p, q)] = ρ₂(points[p], points[q])`.
    pub values: Matrix,
}

fn sample_points(n_cells: usize) -> Vec<f64> {
    let m = 2 * n_cells;
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

fn simpson_weights(n_cells: usize) -> Vec<f64> {
    let h = 1.0 / n_cells as f64;
    let mut w = vec![0.0; 2 * n_cells + 1];
    for c in 0..n_cells {
        w[2 * c] += h / 6.0;
        w[2 * c + 1] += 4.0 * h / 6.0;
        w[2 * c + 2] += h / 6.0;
    }
    w
}

impl DensityProfile {
    pub fn integral(&self) -> f64 {
        let w = simpson_weights((self.points.len() - 1) / 2);
        w.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Values at the grid nodes only.
    pub fn at_nodes(&self) -> Vec<f64> {
        self.values.iter().step_by(2).copied().collect()
    }
}

impl PairDensityProfile {
    pub fn integral(&self) -> f64 {
        let w = simpson_weights((self.points.len() - 1) / 2);
        let mut s = 0.0;
        for (p, wp) in w.iter().enumerate() {
            for (q, wq) in w.iter().enumerate() {
                s += wp * wq * self.values[(p, q)];
            }
        }
        s
    }

    pub fn symmetry_defect(&self) -> f64 {
        let v = &self.values;
        v.max_abs_diff(&v.transpose())
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.points.len()).map(|p| self.values[(p, p)]).fold(f64::INFINITY, f64::min)
    }

    /// Node-by-node values.
    pub fn at_nodes(&self) -> Matrix {
        let n = (self.points.len() + 1) / 2;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.values[(2 * i, 2 * j)];
            }
        }
        m
    }
}

/// Index of `r`-subsets of the orbitals; the empty set has index 0.
struct SubsetIndex(Option<SlaterBasis>);

impl SubsetIndex {
    fn new(n: usize, r: usize) -> Result<Self> {
        Ok(SubsetIndex(if r == 0 { None } else { Some(enumerate_slater_basis_capped(n, r, usize::MAX)?) }))
    }

    fn len(&self) -> usize {
        self.0.as_ref().map_or(1, |b| b.len())
    }

    fn rank(&self, t: &[usize]) -> usize {
        self.0.as_ref().map_or(0, |b| b.rank(t).expect("subset of a basis tuple"))
    }
}

fn check(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals) -> Result<()> {
    if psi.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!("wave vector has {} entries, basis {}", psi.len(), basis.len())));
    }
    if orbitals.len() != basis.n_orbitals() {
        return Err(Error::DimensionMismatch(format!(
            "{} orbitals supplied, basis uses {}",
            orbitals.len(),
            basis.n_orbitals()
        )));
    }
    Ok(())
}

/// One-particle reduced density matrix `γ_ab` in the orbital basis,
/// normalized to trace `N`.
pub fn density_matrix(psi: &WaveVector, basis: &SlaterBasis) -> Result<Matrix> {
    let (n, k) = (basis.n_orbitals(), basis.n_particles());
    let idx = SubsetIndex::new(n, k - 1)?;
    // b[K][a] = Σ c_I (−1)^{pos of a in I} over I = K ∪ {a}.
    let mut b = Matrix::zeros(idx.len(), n);
    let mut rest = Vec::with_capacity(k);
    for (c, t) in psi.coeffs.iter().zip(basis.tuples()) {
        for (pos, &a) in t.iter().enumerate() {
            rest.clear();
            rest.extend(t.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, &x)| x));
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            b[(idx.rank(&rest), a)] += sign * c;
        }
    }
    Ok(b.transpose().matmul(&b))
}

pub fn reduced_density(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals) -> Result<DensityProfile> {
    check(psi, basis, orbitals)?;
    let gamma = density_matrix(psi, basis)?;
    let points = sample_points(orbitals.n_cells());
    let f = orbitals.values_at_points(&points);
    let fg = f.matmul(&gamma);
    let values = (0..points.len()).map(|p| crate::linalg::dot(fg.row(p), f.row(p))).collect();
    Ok(DensityProfile { points, values })
}

pub fn reduced_pair_density(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals) -> Result<PairDensityProfile> {
    check(psi, basis, orbitals)?;
    let (n, k) = (basis.n_orbitals(), basis.n_particles());
    if k < 2 {
        return Err(Error::InvalidArgument("pair density needs at least two particles".into()));
    }
    let idx = SubsetIndex::new(n, k - 2)?;
    // a[L][(a, b)]: antisymmetric amplitude matrices over (N−2)-subsets L.
    let mut amps = vec![Matrix::zeros(n, n); idx.len()];
    let mut rest = Vec::with_capacity(k);
    for (c, t) in psi.coeffs.iter().zip(basis.tuples()) {
        for i in 0..k {
            for j in i + 1..k {
                rest.clear();
                rest.extend(t.iter().enumerate().filter(|(p, _)| *p != i && *p != j).map(|(_, &x)| x));
                let sign = if (i + j + 1) % 2 == 0 { 1.0 } else { -1.0 };
                let m = &mut amps[idx.rank(&rest)];
                m[(t[i], t[j])] += sign * c;
                m[(t[j], t[i])] -= sign * c;
            }
        }
    }
    let points = sample_points(orbitals.n_cells());
    let f = orbitals.values_at_points(&points);
    let ft = f.transpose();
    let np = points.len();
    let mut values = Matrix::zeros(np, np);
    for a in &amps {
        let g = f.matmul(a).matmul(&ft);
        for (v, gv) in values.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *v += gv * gv;
        }
    }
    Ok(PairDensityProfile { points, values })
}
