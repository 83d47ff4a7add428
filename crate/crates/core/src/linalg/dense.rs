use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Computes `selfᵀ x`.
    pub fn matvec_transposed(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut y);
            }
        }
        y
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric matrix in lower-triangular profile (envelope) storage.
///
/// Row `i` stores columns `first[i]..=i`. Each unordered pair `{i, j}` has a
/// single slot, so `get(i, j) == get(j, i)` holds bit for bit. A dense matrix
/// is the special case `first[i] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl SymMatrix {
    pub fn dense(n: usize) -> Self {
        Self::with_profile(vec![0; n])
    }

    /// Banded storage with `bandwidth` sub-diagonals.
    pub fn banded(n: usize, bandwidth: usize) -> Self {
        Self::with_profile((0..n).map(|i| i.saturating_sub(bandwidth)).collect())
    }

    /// Storage with an explicit first stored column per row.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "profile start beyond diagonal");
            offsets.push(total);
            total += i - f + 1;
        }
        offsets.push(total);
        Self { n, first, offsets, values: vec![0.0; total] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::banded(n, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::banded(diag.len(), 0);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Symmetric matrix from a dense square matrix; uses the lower triangle.
    pub fn from_dense_lower(a: &Matrix) -> Self {
        assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let mut m = Self::dense(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, a[(i, j)]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Largest distance from the diagonal of any stored entry.
    pub fn bandwidth(&self) -> usize {
        (0..self.n).map(|i| i - self.first[i]).max().unwrap_or(0)
    }

    pub fn first_column(&self, i: usize) -> usize {
        self.first[i]
    }

    /// Stored lower-triangle entries of row `i`, starting at `first_column(i)`.
    pub fn row_profile(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if c < self.first[r] {
            None
        } else {
            Some(self.offsets[r] + c - self.first[r])
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside stored profile"));
        self.values[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside stored profile"));
        self.values[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let f = self.first[i];
            let row = self.row_profile(i);
            let (off, diag) = row.split_at(row.len() - 1);
            let xi = x[i];
            let mut acc = diag[0] * xi;
            for (k, &a) in off.iter().enumerate() {
                acc += a * x[f + k];
                y[f + k] += a * xi;
            }
            y[i] += acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let f = self.first[i];
            for (k, &a) in self.row_profile(i).iter().enumerate() {
                m[(i, f + k)] = a;
                m[(f + k, i)] = a;
            }
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut colsum = vec![0.0; self.n];
        for i in 0..self.n {
            let f = self.first[i];
            for (k, &a) in self.row_profile(i).iter().enumerate() {
                let j = f + k;
                colsum[j] += a.abs();
                if j != i {
                    colsum[i] += a.abs();
                }
            }
        }
        colsum.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let f = self.first[i].min(other.first[i]);
            for j in f..=i {
                m = m.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        m
    }

    /// `self + s * other`, with the union of both profiles.
    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let first = (0..self.n).map(|i| self.first[i].min(other.first[i])).collect();
        let mut out = SymMatrix::with_profile(first);
        for i in 0..self.n {
            for j in out.first[i]..=i {
                out.set(i, j, self.get(i, j) + s * other.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Congruence `Tᵀ A T` for a dense transform, returned densely.
    pub fn congruence(&self, t: &Matrix) -> SymMatrix {
        assert_eq!(t.rows(), self.n);
        let m = t.cols();
        // AT column by column, then Tᵀ(AT).
        let mut at = Matrix::zeros(self.n, m);
        for j in 0..m {
            let col = self.matvec(&t.column(j));
            for i in 0..self.n {
                at[(i, j)] = col[i];
            }
        }
        let mut out = SymMatrix::dense(m);
        for a in 0..m {
            for b in 0..=a {
                let mut s = 0.0;
                for i in 0..self.n {
                    s += t[(i, a)] * at[(i, b)];
                }
                out.set(a, b, s);
            }
        }
        out
    }

    /// Entries of the lower profile, row by row.
    pub fn profile_values(&self) -> &[f64] {
        &self.values
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators let the compiler vectorize the reduction.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn scale(x: &mut [f64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_storage_is_symmetric() {
        let mut a = SymMatrix::with_profile(vec![0, 0, 1, 0]);
        a.set(3, 0, 2.5);
        a.set(2, 1, -1.0);
        assert_eq!(a.get(0, 3), 2.5);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(2, 0), 0.0);
        assert_eq!(a.bandwidth(), 3);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut a = SymMatrix::banded(5, 1);
        for i in 0..5 {
            a.set(i, i, 2.0 + i as f64);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        let x = [1.0, -2.0, 0.5, 3.0, -1.0];
        let y = a.matvec(&x);
        let yd = a.to_dense().matvec(&x);
        for (p, q) in y.iter().zip(&yd) {
            assert!((p - q).abs() < 1e-15);
        }
        assert_eq!(a.norm1(), 7.0);
    }

    #[test]
    fn congruence_with_identity_is_noop() {
        let mut a = SymMatrix::dense(3);
        a.set(0, 0, 1.0);
        a.set(1, 0, 0.5);
        a.set(2, 2, 3.0);
        let c = a.congruence(&Matrix::identity(3));
        assert_eq!(c.max_abs_diff(&a), 0.0);
    }
}
