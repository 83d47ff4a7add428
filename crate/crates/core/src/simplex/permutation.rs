use serde::{Deserialize, Serialize};

/// A permutation `σ` of `{0, …, N−1}` stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Validates that `images` lists each of `0..len` exactly once.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation(images))
    }

    /// All `N!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation(p.clone()));
            // Next lexicographic permutation.
            let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
            p.swap(i - 1, j);
            p[i..].reverse();
        }
    }

    /// The permutation that sorts `x` ascending: `x[σ(0)] ≤ x[σ(1)] ≤ …`.
    /// Ties keep index order.
    pub fn sorting(x: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        Permutation(idx)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &s) in self.0.iter().enumerate() {
            inv[s] = i;
        }
        Permutation(inv)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    /// `+1` for even, `−1` for odd permutations.
    pub fn sign(&self) -> f64 {
        let mut seen = vec![false; self.0.len()];
        let mut transpositions = 0;
        for start in 0..self.0.len() {
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            if len > 0 {
                transpositions += len - 1;
            }
        }
        if transpositions % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Coordinate action `(σx)_k = x_{σ(k)}`.
    pub fn permute<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| x[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_and_signs() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        let signs: Vec<f64> = all.iter().map(|p| p.sign()).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0, 1.0, -1.0]);
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::all(4).iter().map(|p| p.sign()).sum::<f64>(), 0.0);
    }

    #[test]
    fn inverse_and_composition() {
        let p = Permutation::from_images(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(4));
        assert_eq!(p.inverse().compose(&p), Permutation::identity(4));
        assert_eq!(p.sign(), p.inverse().sign());
        assert!(Permutation::from_images(vec![0, 0, 1]).is_none());
    }

    #[test]
    fn sorting_sorts() {
        let x = [0.7, 0.1, 0.4];
        let s = Permutation::sorting(&x);
        assert_eq!(s.permute(&x), vec![0.1, 0.4, 0.7]);
    }
}
