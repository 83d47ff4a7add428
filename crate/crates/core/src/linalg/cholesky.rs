use super::dense::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Cholesky factor `A = L Lᵀ` kept in the profile of `A` (no fill outside
/// the envelope).
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: SymMatrix,
}

impl Cholesky {
    pub fn factor(a: &SymMatrix) -> Result<Self> {
        let n = a.dim();
        let mut l = a.clone();
        for i in 0..n {
            let fi = l.first_column(i);
            for j in fi..=i {
                let fj = l.first_column(j);
                let start = fi.max(fj);
                let mut s = l.get(i, j);
                if start < j {
                    let ri = &l.row_profile(i)[start - fi..j - fi];
                    let rj = &l.row_profile(j)[start - fj..j - fj];
                    s -= super::dense::dot(ri, rj);
                }
                if j < i {
                    let d = l.get(j, j);
                    l.set(i, j, s / d);
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l.set(i, i, s.sqrt());
                }
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    /// Diagonal of `L`.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.l.get(i, i)).collect()
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        for i in 0..self.dim() {
            let f = self.l.first_column(i);
            let row = self.l.row_profile(i);
            let (off, diag) = row.split_at(row.len() - 1);
            let s = super::dense::dot(off, &b[f..i]);
            b[i] = (b[i] - s) / diag[0];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [f64]) {
        for i in (0..self.dim()).rev() {
            let f = self.l.first_column(i);
            let row = self.l.row_profile(i);
            let (off, diag) = row.split_at(row.len() - 1);
            y[i] /= diag[0];
            let xi = y[i];
            for (k, &a) in off.iter().enumerate() {
                y[f + k] -= a * xi;
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.solve_lower_in_place(b);
        self.solve_upper_in_place(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn lower(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let f = self.l.first_column(i);
            for (k, &a) in self.l.row_profile(i).iter().enumerate() {
                m[(i, f + k)] = a;
            }
        }
        m
    }

    /// `L⁻ᵀ`, the upper-triangular map with `L⁻¹ A L⁻ᵀ = I`.
    pub fn inverse_transpose(&self) -> Matrix {
        let n = self.dim();
        let mut r = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            // Column j of L⁻ᵀ solves Lᵀ x = e_j.
            self.solve_upper_in_place(&mut e);
            for i in 0..n {
                r[(i, j)] = e[i];
            }
        }
        r
    }

    /// `L⁻¹ A L⁻ᵀ` for a symmetric `A`, as a dense symmetric matrix.
    pub fn reduce(&self, a: &SymMatrix) -> SymMatrix {
        let n = self.dim();
        assert_eq!(a.dim(), n);
        // Y = L⁻¹ A (column by column), then C = L⁻¹ Yᵀ.
        let ad = a.to_dense();
        let mut yt = Matrix::zeros(n, n);
        for j in 0..n {
            let mut col = ad.row(j).to_vec();
            self.solve_lower_in_place(&mut col);
            yt.row_mut(j).copy_from_slice(&col);
        }
        // yt is Yᵀ (rows are columns of Y); column j of C = L⁻¹ (row j of Y).
        let mut c = SymMatrix::dense(n);
        let mut colbuf = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                colbuf[i] = yt[(i, j)];
            }
            self.solve_lower_in_place(&mut colbuf);
            for i in j..n {
                c.set(i, j, colbuf[i]);
            }
        }
        c
    }
}

/// Diagonal pivots of an unpivoted `L D Lᵀ` factorization in the profile of
/// `a`. Intended for positive semi-definite input, where the number of
/// near-zero pivots equals the kernel dimension.
pub fn ldl_pivots(a: &SymMatrix) -> Vec<f64> {
    let n = a.dim();
    // Work with W = L D (row profile), W_ij = a_ij - Σ_k W_ik L_jk.
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    for i in 0..n {
        let fi = w.first_column(i);
        for j in fi..=i {
            let fj = w.first_column(j);
            let mut s = w.get(i, j);
            for k in fi.max(fj)..j {
                if d[k] != 0.0 {
                    s -= w.get(i, k) * w.get(j, k) / d[k];
                }
            }
            w.set(i, j, s);
        }
        d[i] = w.get(i, i);
    }
    d
}
