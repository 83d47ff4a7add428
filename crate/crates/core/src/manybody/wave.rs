//! Many-body wavefunctions as coefficient vectors over a determinant basis,
//! and their pointwise evaluation `Ψ(x) = Σ_I c_I det[φ_{I_k}(x_l)] / √N!`.

use super::slater::SlaterBasis;
use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::simplex::Permutation;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector {
    pub coeffs: Vec<f64>,
    /// Set when `‖coeffs‖₂ = 1` within `1e−12`.
    pub normalized: bool,
}

impl WaveVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("wave vector has non-finite entries".into()));
        }
        let normalized = (norm2(&coeffs) - 1.0).abs() <= 1e-12;
        Ok(Self { coeffs, normalized })
    }

    /// Scales to unit norm.
    pub fn normalized(mut coeffs: Vec<f64>) -> Result<Self> {
        let n = norm2(&coeffs);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        coeffs.iter_mut().for_each(|c| *c /= n);
        Self::new(coeffs)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// `Ψ(x₁, …, x_N)` given orbital values `phi[k][a] = φ_a(x_k)`.
pub fn evaluate_with_values(psi: &WaveVector, basis: &SlaterBasis, phi: &[Vec<f64>]) -> f64 {
    let n = basis.n_particles();
    assert_eq!(phi.len(), n);
    let mut s = 0.0;
    for (c, t) in psi.coeffs.iter().zip(basis.tuples()) {
        if *c == 0.0 {
            continue;
        }
        let m: Vec<Vec<f64>> = (0..n).map(|k| t.iter().map(|&a| phi[k][a]).collect()).collect();
        s += c * determinant(m);
    }
    s / factorial(n).sqrt()
}

/// Fully antisymmetric coefficient tensor `C[a₁…a_N]` with
/// `C[σ(I)] = sgn(σ) c_I`, flattened row-major over `n_orbitals^N`.
pub fn antisymmetric_tensor(psi: &WaveVector, basis: &SlaterBasis) -> Vec<f64> {
    let (n, k) = (basis.n_orbitals(), basis.n_particles());
    let perms = Permutation::all(k);
    let mut c = vec![0.0; n.pow(k as u32)];
    for (coef, t) in psi.coeffs.iter().zip(basis.tuples()) {
        for p in &perms {
            let idx = p.permute(t).iter().fold(0, |acc, &a| acc * n + a);
            c[idx] = p.sign() * coef;
        }
    }
    c
}

/// `Ψ` on the tensor grid `{y_p}^N` from orbital values `values[(p, a)]`.
/// The result is row-major over `P^N`, first coordinate slowest.
pub fn evaluate_on_tensor_grid(psi: &WaveVector, basis: &SlaterBasis, values: &Matrix) -> Vec<f64> {
    let (n, k) = (basis.n_orbitals(), basis.n_particles());
    assert_eq!(values.cols(), n);
    let p = values.rows();
    let mut t = antisymmetric_tensor(psi, basis);
    // Contract mode by mode; shape is (left, n or P, right).
    let mut dims = vec![n; k];
    for mode in 0..k {
        let left: usize = dims[..mode].iter().product();
        let right: usize = dims[mode + 1..].iter().product();
        let mut out = vec![0.0; left * p * right];
        for l in 0..left {
            for a in 0..n {
                let src = &t[(l * n + a) * right..(l * n + a + 1) * right];
                if src.iter().all(|v| *v == 0.0) {
                    continue;
                }
                for q in 0..p {
                    let f = values[(q, a)];
                    if f == 0.0 {
                        continue;
                    }
                    let dst = &mut out[(l * p + q) * right..(l * p + q + 1) * right];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += f * s;
                    }
                }
            }
        }
        t = out;
        dims[mode] = p;
    }
    let scale = 1.0 / factorial(k).sqrt();
    t.iter_mut().for_each(|v| *v *= scale);
    t
}
