/// Compressed-row matrix holding both triangles of a symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the full symmetric matrix from upper-triangle entries `(i, j, v)`
    /// with `i <= j`; the mirror of every off-diagonal entry is inserted.
    pub fn from_upper_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n];
        for &(i, j, _) in triplets {
            debug_assert!(i <= j);
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for c in &counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut cols = vec![0; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr[..n].to_vec();
        for &(i, j, v) in triplets {
            cols[fill[i]] = j;
            values[fill[i]] = v;
            fill[i] += 1;
            if i != j {
                cols[fill[j]] = i;
                values[fill[j]] = v;
                fill[j] += 1;
            }
        }
        // Sort each row by column for deterministic traversal.
        for r in 0..n {
            let (s, e) = (row_ptr[r], row_ptr[r + 1]);
            let mut idx: Vec<usize> = (s..e).collect();
            idx.sort_by_key(|&k| cols[k]);
            let c: Vec<usize> = idx.iter().map(|&k| cols[k]).collect();
            let v: Vec<f64> = idx.iter().map(|&k| values[k]).collect();
            cols[s..e].copy_from_slice(&c);
            values[s..e].copy_from_slice(&v);
        }
        Self { n, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[s..e].binary_search(&j) {
            Ok(k) => self.values[s + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|r| self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_entries() {
        let m = CsrMatrix::from_upper_triplets(3, &[(0, 0, 1.0), (0, 2, 4.0), (1, 1, 2.0), (2, 2, 3.0)]);
        assert_eq!(m.get(2, 0), 4.0);
        assert_eq!(m.get(1, 0), 0.0);
        let mut y = vec![0.0; 3];
        m.matvec_into(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![5.0, 2.0, 7.0]);
        assert_eq!(m.nnz(), 5);
    }
}
