//! Two-body interactions and their four-index integrals in orthonormal
//! orbitals, in physicist ordering `⟨ab|cd⟩ = ∫∫ φa(x)φb(y) w(x,y) φc(x)φd(y)`.

use serde::{Deserialize, Serialize};

use super::orbitals::Orbitals;
use crate::basis::GridBasis;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest orbital count for which the dense four-index tensor is built.
pub const DENSE_TENSOR_MAX_ORBITALS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionSpec {
    #[serde(rename = "none")]
    NoInteraction,
    /// `w(ρ₂) = g ∫ ρ₂(x, x) dx`.
    DeltaContact { g: f64 },
    /// Nodal values `W(x_i, x_j)` of a piecewise-bilinear kernel,
    /// `w(ρ₂) = ∫∫ W ρ₂`.
    SampledKernel { values: Vec<Vec<f64>> },
}

impl InteractionSpec {
    pub fn sampled_from_fn(n_cells: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = 1.0 / n_cells as f64;
        let values = (0..=n_cells)
            .map(|i| (0..=n_cells).map(|j| f(i as f64 * h, j as f64 * h)).collect())
            .collect();
        InteractionSpec::SampledKernel { values }
    }

    pub fn validate(&self, n_cells: usize) -> Result<()> {
        match self {
            InteractionSpec::NoInteraction => Ok(()),
            InteractionSpec::DeltaContact { g } => {
                if g.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInteraction("contact strength must be finite".into()))
                }
            }
            InteractionSpec::SampledKernel { values } => {
                let n = n_cells + 1;
                if values.len() != n || values.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInteraction(format!("kernel must be {n} x {n} nodal values")));
                }
                let scale = values.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
                for i in 0..n {
                    for j in 0..i {
                        let (a, b) = (values[i][j], values[j][i]);
                        if !a.is_finite() || (a - b).abs() > 1e-14 * scale {
                            return Err(Error::InvalidInteraction(format!("kernel not symmetric at ({i}, {j})")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Kernel data re-expressed on a grid of `n_cells` cells by bilinear
    /// interpolation.
    pub fn resample(&self, n_cells: usize) -> InteractionSpec {
        match self {
            InteractionSpec::SampledKernel { values } if values.len() != n_cells + 1 && values.len() >= 2 => {
                let m = values.len() - 1;
                InteractionSpec::sampled_from_fn(n_cells, |x, y| bilinear(values, m, x, y))
            }
            other => other.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InteractionSpec::NoInteraction => true,
            InteractionSpec::DeltaContact { g } => *g == 0.0,
            InteractionSpec::SampledKernel { values } => values.iter().flatten().all(|v| *v == 0.0),
        }
    }
}

fn bilinear(values: &[Vec<f64>], m: usize, x: f64, y: f64) -> f64 {
    let split = |s: f64| {
        let s = (s * m as f64).clamp(0.0, m as f64);
        let c = (s.floor() as usize).min(m - 1);
        (c, s - c as f64)
    };
    let ((i, s), (j, t)) = (split(x), split(y));
    values[i][j] * (1.0 - s) * (1.0 - t)
        + values[i + 1][j] * s * (1.0 - t)
        + values[i][j + 1] * (1.0 - s) * t
        + values[i + 1][j + 1] * s * t
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w): (Vec<f64>, Vec<f64>) = match order {
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt();
            let a = (3.0 / 7.0 - 2.0 / 7.0 * s).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * s).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => panic!("unsupported Gauss order {order}"),
    };
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Gauss points over all cells with their weights.
pub(crate) fn composite_gauss(n_cells: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_unit(order);
    let h = 1.0 / n_cells as f64;
    let mut xs = Vec::with_capacity(n_cells * order);
    let mut ws = Vec::with_capacity(n_cells * order);
    for c in 0..n_cells {
        for (ti, wi) in t.iter().zip(&w) {
            xs.push((c as f64 + ti) * h);
            ws.push(wi * h);
        }
    }
    (xs, ws)
}

/// Four-index integrals `⟨ab|cd⟩` of an interaction.
#[derive(Debug, Clone)]
pub enum TwoBodyTensor {
    Zero { n: usize },
    /// `⟨ab|cd⟩ = Σ_q w_q v_qa v_qb v_qc v_qd`, exact for P1 orbitals.
    Contact { n: usize, weights: Vec<f64>, values: Matrix },
    /// Row-major `n⁴` array indexed by `((a n + b) n + c) n + d`.
    Dense { n: usize, data: Vec<f64> },
}

impl TwoBodyTensor {
    pub fn n_orbitals(&self) -> usize {
        match self {
            TwoBodyTensor::Zero { n } | TwoBodyTensor::Contact { n, .. } | TwoBodyTensor::Dense { n, .. } => *n,
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match self {
            TwoBodyTensor::Zero { .. } => 0.0,
            TwoBodyTensor::Contact { weights, values, .. } => weights
                .iter()
                .enumerate()
                .map(|(q, w)| {
                    let v = values.row(q);
                    w * (v[a] * v[b]) * (v[c] * v[d])
                })
                .sum(),
            TwoBodyTensor::Dense { n, data } => data[((a * n + b) * n + c) * n + d],
        }
    }

    /// `⟨ab|cd⟩ − ⟨ab|dc⟩`.
    pub fn antisymmetrized(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match self {
            // The contact integrand is symmetric in all four orbitals.
            TwoBodyTensor::Zero { .. } | TwoBodyTensor::Contact { .. } => 0.0,
            TwoBodyTensor::Dense { .. } => self.get(a, b, c, d) - self.get(a, b, d, c),
        }
    }

    /// Whether every antisymmetrized element is identically zero, i.e. the
    /// interaction is invisible on the antisymmetric sector.
    pub fn antisymmetric_part_vanishes(&self) -> bool {
        matches!(self, TwoBodyTensor::Zero { .. } | TwoBodyTensor::Contact { .. })
    }
}

pub fn transform_two_body(w: &InteractionSpec, basis: &GridBasis, orbitals: &Orbitals) -> Result<TwoBodyTensor> {
    if orbitals.nodal.rows() != basis.n_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "orbitals sampled on {} nodes, basis has {}",
            orbitals.nodal.rows(),
            basis.n_nodes()
        )));
    }
    w.validate(basis.n_cells())?;
    let n = orbitals.len();
    match w {
        InteractionSpec::NoInteraction => Ok(TwoBodyTensor::Zero { n }),
        InteractionSpec::DeltaContact { g } if *g == 0.0 => Ok(TwoBodyTensor::Zero { n }),
        InteractionSpec::DeltaContact { g } => {
            // Three Gauss points per cell integrate the quartic products exactly.
            let (xs, ws) = composite_gauss(basis.n_cells(), 3);
            let values = orbitals.values_at_points(&xs);
            Ok(TwoBodyTensor::Contact { n, weights: ws.iter().map(|w| g * w).collect(), values })
        }
        InteractionSpec::SampledKernel { values: kernel } => {
            if n > DENSE_TENSOR_MAX_ORBITALS {
                return Err(Error::BasisTooLarge { size: n, cap: DENSE_TENSOR_MAX_ORBITALS });
            }
            let m = basis.n_cells();
            let (xs, ws) = composite_gauss(m, 4);
            let phi = orbitals.values_at_points(&xs);
            let p = xs.len();
            // X[(a,c), q] = w_q φa(x_q) φc(x_q).
            let mut x = Matrix::zeros(n * n, p);
            for a in 0..n {
                for c in 0..n {
                    let row = x.row_mut(a * n + c);
                    for q in 0..p {
                        row[q] = ws[q] * phi[(q, a)] * phi[(q, c)];
                    }
                }
            }
            let mut k = Matrix::zeros(p, p);
            for q in 0..p {
                for r in 0..p {
                    k[(q, r)] = bilinear(kernel, m, xs[q], xs[r]);
                }
            }
            let t = x.matmul(&k).matmul(&x.transpose());
            let mut data = vec![0.0; n * n * n * n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            data[((a * n + b) * n + c) * n + d] = t[(a * n + c, b * n + d)];
                        }
                    }
                }
            }
            Ok(TwoBodyTensor::Dense { n, data })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for (order, degree) in [(3, 5), (4, 7)] {
            let (x, w) = gauss_unit(order);
            for k in 0..=degree {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
                assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "order {order}, degree {k}");
            }
        }
    }

    #[test]
    fn kernel_validation() {
        assert!(InteractionSpec::sampled_from_fn(4, |x, y| x * y).validate(4).is_ok());
        assert!(InteractionSpec::sampled_from_fn(4, |x, y| x - y).validate(4).is_err());
        assert!(InteractionSpec::sampled_from_fn(4, |x, y| x * y).validate(5).is_err());
    }

    #[test]
    fn resampling_preserves_bilinear_kernels() {
        let coarse = InteractionSpec::sampled_from_fn(4, |x, y| 1.0 + x + y + 3.0 * x * y);
        let fine = coarse.resample(12);
        let exact = InteractionSpec::sampled_from_fn(12, |x, y| 1.0 + x + y + 3.0 * x * y);
        let (InteractionSpec::SampledKernel { values: a }, InteractionSpec::SampledKernel { values: b }) = (fine, exact) else {
            unreachable!()
        };
        for (ra, rb) in a.iter().zip(&b) {
            for (p, q) in ra.iter().zip(rb) {
                assert!((p - q).abs() < 1e-14);
            }
        }
    }
}
