//! Orthonormal single-particle orbitals built on a grid basis.

use crate::basis::GridBasis;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Cholesky, Matrix, SymMatrix};

/// `R = L⁻ᵀ` from `M = LLᵀ`, so that `RᵀMR = I`.
pub fn orthonormalize_orbitals(m: &SymMatrix) -> Result<Matrix> {
    Ok(Cholesky::factor(m)?.inverse_transpose())
}

/// `RᵀAR`.
pub fn transform_one_body(a: &SymMatrix, r: &Matrix) -> Result<SymMatrix> {
    if r.rows() != a.dim() {
        return Err(Error::DimensionMismatch(format!("operator is {}, transform has {} rows", a.dim(), r.rows())));
    }
    Ok(a.congruence(r))
}

/// `M`-orthonormal orbitals with their nodal values on the grid.
#[derive(Debug, Clone)]
pub struct Orbitals {
    /// Dof coefficients, one column per orbital.
    pub coeffs: Matrix,
    /// Nodal values, `n_nodes × n_orbitals`.
    pub nodal: Matrix,
    n_cells: usize,
}

impl Orbitals {
    pub fn new(basis: &GridBasis, coeffs: Matrix) -> Result<Self> {
        if coeffs.rows() != basis.n_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "orbital coefficients have {} rows, basis has {} dofs",
                coeffs.rows(),
                basis.n_dofs()
            )));
        }
        let mut nodal = Matrix::zeros(basis.n_nodes(), coeffs.cols());
        for (d, dof) in basis.dofs().iter().enumerate() {
            for &(node, w) in &dof.nodes {
                for a in 0..coeffs.cols() {
                    nodal[(node, a)] += w * coeffs[(d, a)];
                }
            }
        }
        Ok(Self { coeffs, nodal, n_cells: basis.n_cells() })
    }

    pub fn len(&self) -> usize {
        self.coeffs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let s = x * self.n_cells as f64;
        let c = (s.floor().max(0.0) as usize).min(self.n_cells - 1);
        (c, s - c as f64)
    }

    /// All orbital values at `x`.
    pub fn values_at(&self, x: f64) -> Vec<f64> {
        let (c, t) = self.locate(x);
        let (lo, hi) = (self.nodal.row(c), self.nodal.row(c + 1));
        lo.iter().zip(hi).map(|(a, b)| a * (1.0 - t) + b * t).collect()
    }

    /// All orbital derivatives on the cell containing `x`.
    pub fn derivatives_at(&self, x: f64) -> Vec<f64> {
        let (c, _) = self.locate(x);
        let n = self.n_cells as f64;
        let (lo, hi) = (self.nodal.row(c), self.nodal.row(c + 1));
        lo.iter().zip(hi).map(|(a, b)| (b - a) * n).collect()
    }

    /// Orbital values at each point, `points.len() × n_orbitals`.
    pub fn values_at_points(&self, points: &[f64]) -> Matrix {
        let mut out = Matrix::zeros(points.len(), self.len());
        for (p, &x) in points.iter().enumerate() {
            out.row_mut(p).copy_from_slice(&self.values_at(x));
        }
        out
    }
}

/// Factorization orbitals `L⁻ᵀ` of the overlap.
pub fn cholesky_orbitals(basis: &GridBasis, m: &SymMatrix) -> Result<Orbitals> {
    Orbitals::new(basis, orthonormalize_orbitals(m)?)
}

/// Eigenfunctions of the one-body operator `a` as orbitals, with their
/// energies in ascending order. The one-body matrix is diagonal in them.
pub fn eigen_orbitals(basis: &GridBasis, a: &SymMatrix, m: &SymMatrix) -> Result<(Orbitals, Vec<f64>)> {
    let r = orthonormalize_orbitals(m)?;
    let h = transform_one_body(a, &r)?;
    let eig = symmetric_eigen(&h)?;
    Ok((Orbitals::new(basis, r.matmul(&eig.vectors))?, eig.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{assemble_overlap, build_grid_basis, BoundarySpec};

    #[test]
    fn identity_and_diagonal() {
        let r = orthonormalize_orbitals(&SymMatrix::identity(3)).unwrap();
        assert_eq!(r, Matrix::identity(3));
        let r = orthonormalize_orbitals(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(r[(0, 0)], 0.5);
        assert!((r[(1, 1)] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(r[(0, 1)], 0.0);
    }

    #[test]
    fn mass_matrix_becomes_identity() {
        for bc in [BoundarySpec::DirichletBoth, BoundarySpec::Free, BoundarySpec::QuasiPeriodic { alpha: -1.0 }] {
            let b = build_grid_basis(8, bc).unwrap();
            let m = assemble_overlap(&b);
            let r = orthonormalize_orbitals(&m).unwrap();
            let i = transform_one_body(&m, &r).unwrap();
            assert!(i.max_abs_diff(&SymMatrix::identity(b.n_dofs())) <= 1e-12);
        }
    }

    #[test]
    fn rejects_mismatch() {
        assert!(transform_one_body(&SymMatrix::identity(3), &Matrix::identity(4)).is_err());
    }
}
