//! Slater–Condon assembly of the many-body Hamiltonian
//! `H = Σᵢ h(xᵢ) + Σ_{i≠j} W(xᵢ, xⱼ)` on a determinant basis of orthonormal
//! orbitals.

use rayon::prelude::*;

use super::interaction::{InteractionSpec, TwoBodyTensor};
use super::slater::{position, replace, SlaterBasis};
use crate::basis::{BoundarySpec, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator, SymMatrix};

/// Largest dimension stored densely.
pub const DENSE_STORAGE_LIMIT: usize = 6000;

#[derive(Debug, Clone)]
pub enum ManyBodyMatrix {
    Dense(SymMatrix),
    Sparse(CsrMatrix),
}

impl ManyBodyMatrix {
    pub fn dim(&self) -> usize {
        match self {
            ManyBodyMatrix::Dense(m) => m.dim(),
            ManyBodyMatrix::Sparse(m) => m.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            ManyBodyMatrix::Dense(m) => m.get(i, j),
            ManyBodyMatrix::Sparse(m) => m.get(i, j),
        }
    }

    pub fn norm1(&self) -> f64 {
        match self {
            ManyBodyMatrix::Dense(m) => m.norm1(),
            ManyBodyMatrix::Sparse(m) => m.norm1(),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// Largest entrywise difference; `O(dim²)`.
    pub fn max_abs_diff(&self, other: &ManyBodyMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                m = m.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        m
    }
}

impl LinearOperator for ManyBodyMatrix {
    fn dim(&self) -> usize {
        ManyBodyMatrix::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            ManyBodyMatrix::Dense(m) => m.matvec_into(x, y),
            ManyBodyMatrix::Sparse(m) => m.matvec_into(x, y),
        }
    }
}

/// Problem data an operator was built from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorOrigin {
    pub potential: Option<PotentialSpec>,
    pub interaction: Option<InteractionSpec>,
    pub bc: Option<BoundarySpec>,
    pub n_cells: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub h: ManyBodyMatrix,
    pub basis: SlaterBasis,
    pub origin: OperatorOrigin,
}

impl ManyBodyOperator {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

pub fn assemble_manybody(one_body: &SymMatrix, two_body: &TwoBodyTensor, basis: &SlaterBasis) -> Result<ManyBodyOperator> {
    assemble_manybody_with_limit(one_body, two_body, basis, DENSE_STORAGE_LIMIT)
}

/// As [`assemble_manybody`], storing densely only up to `dense_limit`.
pub fn assemble_manybody_with_limit(
    one_body: &SymMatrix,
    two_body: &TwoBodyTensor,
    basis: &SlaterBasis,
    dense_limit: usize,
) -> Result<ManyBodyOperator> {
    let n = basis.n_orbitals();
    if one_body.dim() != n || two_body.n_orbitals() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis has {n} orbitals, one-body {} and two-body {}",
            one_body.dim(),
            two_body.n_orbitals()
        )));
    }
    let h = one_body.to_dense();
    let has_offdiag = (0..n).any(|p| (0..p).any(|q| h[(p, q)] != 0.0));
    let exchange = !two_body.antisymmetric_part_vanishes();

    let rows: Vec<Vec<(usize, usize, f64)>> = (0..basis.len())
        .into_par_iter()
        .map(|row| {
            let t = basis.tuple(row);
            let mut out = Vec::new();
            let mut diag: f64 = t.iter().map(|&a| h[(a, a)]).sum();
            if exchange {
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        diag += 2.0 * two_body.antisymmetrized(a, b, a, b);
                    }
                }
            }
            out.push((row, row, diag));
            if !(has_offdiag || exchange) {
                return out;
            }
            let mut j_tuple = Vec::with_capacity(t.len());
            // Single excitations p → q.
            for (i, &p) in t.iter().enumerate() {
                for q in 0..n {
                    if position(t, q).is_some() {
                        continue;
                    }
                    let j_pos = replace(t, p, q, &mut j_tuple);
                    let col = basis.rank(&j_tuple).expect("excited tuple lies in the basis");
                    if col <= row {
                        continue;
                    }
                    let mut v = h[(p, q)];
                    if exchange {
                        for &b in t {
                            if b != p {
                                v += 2.0 * two_body.antisymmetrized(p, b, q, b);
                            }
                        }
                    }
                    if v != 0.0 {
                        let sign = if (i + j_pos) % 2 == 0 { 1.0 } else { -1.0 };
                        out.push((row, col, sign * v));
                    }
                }
            }
            if !exchange || t.len() < 2 {
                return out;
            }
            // Double excitations (p1, p2) → (q1, q2).
            let holes: Vec<usize> = (0..n).filter(|q| position(t, *q).is_none()).collect();
            let mut tmp = Vec::with_capacity(t.len());
            for i1 in 0..t.len() {
                for i2 in i1 + 1..t.len() {
                    let (p1, p2) = (t[i1], t[i2]);
                    for (k1, &q1) in holes.iter().enumerate() {
                        for &q2 in &holes[k1 + 1..] {
                            replace(t, p1, q1, &mut tmp);
                            replace(&tmp, p2, q2, &mut j_tuple);
                            let col = basis.rank(&j_tuple).expect("excited tuple lies in the basis");
                            if col <= row {
                                continue;
                            }
                            let v = 2.0 * two_body.antisymmetrized(p1, p2, q1, q2);
                            if v != 0.0 {
                                let j1 = position(&j_tuple, q1).unwrap();
                                let j2 = position(&j_tuple, q2).unwrap();
                                let sign = if (i1 + i2 + j1 + j2) % 2 == 0 { 1.0 } else { -1.0 };
                                out.push((row, col, sign * v));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();

    let dim = basis.len();
    let h = if dim <= dense_limit {
        let mut m = SymMatrix::dense(dim);
        for &(i, j, v) in rows.iter().flatten() {
            m.set(j, i, v);
        }
        ManyBodyMatrix::Dense(m)
    } else {
        let triplets: Vec<(usize, usize, f64)> = rows.into_iter().flatten().collect();
        ManyBodyMatrix::Sparse(CsrMatrix::from_upper_triplets(dim, &triplets))
    };
    Ok(ManyBodyOperator { h, basis: basis.clone(), origin: OperatorOrigin::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::slater::enumerate_slater_basis;

    #[test]
    fn noninteracting_diagonal() {
        let eps = [0.5, 1.0, 2.5, 4.0, 7.0];
        let basis = enumerate_slater_basis(5, 2).unwrap();
        let op = assemble_manybody(&SymMatrix::from_diagonal(&eps), &TwoBodyTensor::Zero { n: 5 }, &basis).unwrap();
        for (i, t) in basis.tuples().iter().enumerate() {
            assert_eq!(op.h.get(i, i), eps[t[0]] + eps[t[1]]);
            for j in 0..i {
                assert_eq!(op.h.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn triple_excitations_vanish() {
        let n = 7;
        let mut data = vec![0.0; n * n * n * n];
        for (k, v) in data.iter_mut().enumerate() {
            *v = ((k * 7919) % 101) as f64 / 101.0;
        }
        // Symmetrize to a valid real kernel tensor.
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut sym = data.clone();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        sym[idx(a, b, c, d)] = 0.25
                            * (data[idx(a, b, c, d)] + data[idx(b, a, d, c)] + data[idx(c, d, a, b)] + data[idx(d, c, b, a)]);
                    }
                }
            }
        }
        let tensor = TwoBodyTensor::Dense { n, data: sym };
        let mut one = SymMatrix::dense(n);
        for p in 0..n {
            for q in 0..=p {
                one.set(p, q, 1.0 / (1.0 + p as f64 + q as f64));
            }
        }
        let basis = enumerate_slater_basis(n, 3).unwrap();
        let op = assemble_manybody(&one, &tensor, &basis).unwrap();
        let i = basis.rank(&[0, 1, 2]).unwrap();
        let j = basis.rank(&[3, 4, 5]).unwrap();
        assert_eq!(op.h.get(i, j), 0.0);
        let k = basis.rank(&[0, 4, 5]).unwrap();
        assert_ne!(op.h.get(i, k), 0.0);
    }

    #[test]
    fn sparse_and_dense_storage_agree() {
        let n = 6;
        let mut one = SymMatrix::dense(n);
        for p in 0..n {
            for q in 0..=p {
                one.set(p, q, ((p * 3 + q) % 5) as f64 - 2.0);
            }
        }
        let basis = enumerate_slater_basis(n, 3).unwrap();
        let zero = TwoBodyTensor::Zero { n };
        let dense = assemble_manybody_with_limit(&one, &zero, &basis, usize::MAX).unwrap();
        let sparse = assemble_manybody_with_limit(&one, &zero, &basis, 0).unwrap();
        assert!(matches!(sparse.h, ManyBodyMatrix::Sparse(_)));
        assert_eq!(dense.h.max_abs_diff(&sparse.h), 0.0);
    }
}
