//! Enumeration and ranking of Slater determinants: strictly increasing
//! orbital index tuples in lexicographic order.

use crate::error::{Error, Result};

pub const DEFAULT_BASIS_CAP: usize = 100_000;

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Determinants over `n_orbitals` orbitals with `n_particles` electrons.
/// Tuples are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterBasis {
    n_orbitals: usize,
    n_particles: usize,
    tuples: Vec<Vec<usize>>,
    // binom[m][r] = C(m, r) for m ≤ n_orbitals, r ≤ n_particles.
    binom: Vec<Vec<usize>>,
}

pub fn enumerate_slater_basis(n_orbitals: usize, n_particles: usize) -> Result<SlaterBasis> {
    enumerate_slater_basis_capped(n_orbitals, n_particles, DEFAULT_BASIS_CAP)
}

pub fn enumerate_slater_basis_capped(n_orbitals: usize, n_particles: usize, cap: usize) -> Result<SlaterBasis> {
    if n_particles == 0 || n_particles > n_orbitals {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= N <= n_orbitals, got N = {n_particles}, n_orbitals = {n_orbitals}"
        )));
    }
    let size = binomial(n_orbitals, n_particles).unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let mut tuples = Vec::with_capacity(size);
    let mut t: Vec<usize> = (0..n_particles).collect();
    loop {
        tuples.push(t.clone());
        // Advance to the lexicographic successor.
        let mut i = n_particles;
        loop {
            if i == 0 {
                let binom = binomial_table(n_orbitals, n_particles);
                return Ok(SlaterBasis { n_orbitals, n_particles, tuples, binom });
            }
            i -= 1;
            if t[i] < n_orbitals - n_particles + i {
                break;
            }
        }
        t[i] += 1;
        for j in i + 1..n_particles {
            t[j] = t[j - 1] + 1;
        }
    }
}

fn binomial_table(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut b = vec![vec![0usize; k + 1]; n + 1];
    for m in 0..=n {
        b[m][0] = 1;
        for r in 1..=k.min(m) {
            b[m][r] = b[m - 1][r - 1] + if r <= m - 1 { b[m - 1][r] } else { 0 };
        }
    }
    b
}

impl SlaterBasis {
    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i]
    }

    /// Tuple `i` with 1-based orbital labels.
    pub fn tuple_one_based(&self, i: usize) -> Vec<usize> {
        self.tuples[i].iter().map(|a| a + 1).collect()
    }

    /// Lexicographic index of a strictly increasing tuple.
    pub fn rank(&self, tuple: &[usize]) -> Option<usize> {
        let (n, k) = (self.n_orbitals, self.n_particles);
        if tuple.len() != k {
            return None;
        }
        let mut r = 0;
        let mut lo = 0;
        for (i, &c) in tuple.iter().enumerate() {
            if c < lo || c >= n {
                return None;
            }
            // Tuples that agree so far but carry a smaller entry at slot i.
            for j in lo..c {
                r += self.binom[n - 1 - j][k - 1 - i];
            }
            lo = c + 1;
        }
        Some(r)
    }
}

/// Position of `a` in a sorted tuple.
pub(crate) fn position(tuple: &[usize], a: usize) -> Option<usize> {
    tuple.binary_search(&a).ok()
}

/// `tuple` with `p` removed and `q` inserted, plus the insertion position.
pub(crate) fn replace(tuple: &[usize], p: usize, q: usize, out: &mut Vec<usize>) -> usize {
    out.clear();
    let mut pos_q = 0;
    let mut placed = false;
    for &a in tuple {
        if a == p {
            continue;
        }
        if !placed && q < a {
            pos_q = out.len();
            out.push(q);
            placed = true;
        }
        out.push(a);
    }
    if !placed {
        pos_q = out.len();
        out.push(q);
    }
    pos_q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let b = enumerate_slater_basis(4, 2).unwrap();
        let one_based: Vec<Vec<usize>> = (0..b.len()).map(|i| b.tuple_one_based(i)).collect();
        assert_eq!(one_based, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        let b = enumerate_slater_basis(3, 3).unwrap();
        assert_eq!(b.tuples(), &[vec![0, 1, 2]]);
        assert_eq!(enumerate_slater_basis(30, 3).unwrap().len(), 4060);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(enumerate_slater_basis(3, 4).is_err());
        assert!(enumerate_slater_basis(3, 0).is_err());
        assert_eq!(
            enumerate_slater_basis(100, 4).unwrap_err(),
            Error::BasisTooLarge { size: 3_921_225, cap: DEFAULT_BASIS_CAP }
        );
    }

    #[test]
    fn rank_inverts_enumeration() {
        let b = enumerate_slater_basis(9, 4).unwrap();
        for (i, t) in b.tuples().iter().enumerate() {
            assert_eq!(b.rank(t), Some(i));
        }
        assert_eq!(b.rank(&[3, 2, 5, 7]), None);
    }

    #[test]
    fn replace_keeps_order() {
        let mut out = Vec::new();
        assert_eq!(replace(&[1, 4, 6], 4, 7, &mut out), 2);
        assert_eq!(out, vec![1, 6, 7]);
        assert_eq!(replace(&[1, 4, 6], 6, 0, &mut out), 0);
        assert_eq!(out, vec![0, 1, 4]);
    }
}
