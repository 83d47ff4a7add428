//! Lowest eigenpairs of the single-particle pencil `(K + P, M)` and the gap
//! pattern checks for quasi-periodic and separable boundary conditions.

use serde::{Deserialize, Serialize};

use crate::basis::BoundarySpec;
use crate::error::{Error, Result};
use crate::linalg::{lobpcg, norm2, symmetric_eigen, Cholesky, LobpcgOptions, Preconditioner, SymMatrix};

/// Above this dimension the dense reduction is replaced by LOBPCG.
pub const DENSE_LIMIT: usize = 1000;

/// Default relative tolerance below which a single-grid gap is a degeneracy.
pub const DEFAULT_DEG_TOL: f64 = 1e-6;

const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal coefficient vectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖(K+P)x − λMx‖₂`.
    pub residuals: Vec<f64>,
    pub k_requested: usize,
}

impl SpectralResult {
    /// Largest violation of the residual and orthonormality invariants,
    /// as `(max scaled residual, max |xᵢᵀMxⱼ − δᵢⱼ|)`.
    pub fn invariant_errors(&self, a: &SymMatrix, m: &SymMatrix) -> (f64, f64) {
        let scale_a = a.norm1();
        let scale_m = m.norm1();
        let mut res: f64 = 0.0;
        for (lam, x) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let r = residual(a, m, *lam, x);
            res = res.max(r / (scale_a + lam.abs() * scale_m));
        }
        let mut orth: f64 = 0.0;
        for (i, xi) in self.eigenvectors.iter().enumerate() {
            let mxi = m.matvec(xi);
            for (j, xj) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                orth = orth.max((crate::linalg::dot(xj, &mxi) - target).abs());
            }
        }
        (res, orth)
    }
}

fn residual(a: &SymMatrix, m: &SymMatrix, lam: f64, x: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let mx = m.matvec(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lam * q).collect();
    norm2(&r)
}

struct CholeskyPreconditioner(Cholesky);

impl Preconditioner for CholeskyPreconditioner {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        self.0.solve_in_place(out);
    }
}

/// Lowest `k` eigenpairs of `(K + P) x = λ M x`.
pub fn solve_sp_eig(k_mat: &SymMatrix, p_mat: &SymMatrix, m_mat: &SymMatrix, k: usize) -> Result<SpectralResult> {
    let n = m_mat.dim();
    if k_mat.dim() != n || p_mat.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "K is {}, P is {}, M is {}",
            k_mat.dim(),
            p_mat.dim(),
            n
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let a = k_mat.add_scaled(1.0, p_mat);
    let chol = Cholesky::factor(m_mat)?;
    let block = (k + 4).min(n / 3);
    let (eigenvalues, eigenvectors) = if n <= DENSE_LIMIT || block < k {
        let eig = symmetric_eigen(&chol.reduce(&a))?;
        let vecs = (0..k)
            .map(|j| {
                let mut x = eig.vectors.column(j);
                chol.solve_upper_in_place(&mut x);
                x
            })
            .collect();
        (eig.values[..k].to_vec(), vecs)
    } else {
        let shifted = k_mat.add_scaled(1.0, m_mat);
        let prec = CholeskyPreconditioner(Cholesky::factor(&shifted)?);
        let opts = LobpcgOptions {
            block,
            tol: 1e-3 * RESIDUAL_TOL,
            fallback_tol: RESIDUAL_TOL,
            scale: a.norm1(),
            b_scale: m_mat.norm1(),
            max_iter: 5000,
            seed: 0x5eed,
        };
        let res = lobpcg(&a, Some(m_mat), &prec, k, &opts)?;
        (res.values, res.vectors)
    };
    let residuals = eigenvalues.iter().zip(&eigenvectors).map(|(l, x)| residual(&a, m_mat, *l, x)).collect();
    Ok(SpectralResult { eigenvalues, eigenvectors, residuals, k_requested: k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVerdict {
    Strict,
    /// Within tolerance and not required to be strict.
    Degenerate,
    /// Required to be strict but within tolerance.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    /// 1-based index `i` of the gap `λ_{i+1} − λ_i`.
    pub lower: usize,
    pub gap: f64,
    /// Gaps at or below this value count as degenerate.
    pub threshold: f64,
    pub required_strict: bool,
    pub verdict: GapVerdict,
}

impl GapEntry {
    fn new(lower: usize, gap: f64, threshold: f64, required_strict: bool) -> Self {
        let verdict = classify_gap(gap, threshold, required_strict);
        Self { lower, gap, threshold, required_strict, verdict }
    }
}

fn classify_gap(gap: f64, threshold: f64, required_strict: bool) -> GapVerdict {
    if gap > threshold {
        GapVerdict::Strict
    } else if required_strict {
        GapVerdict::Violation
    } else {
        GapVerdict::Degenerate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    /// Relative tolerance used for the thresholds.
    pub tolerance: f64,
}

impl GapReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| e.verdict == GapVerdict::Violation).count()
    }

    pub fn verdict(&self, lower: usize) -> Option<GapVerdict> {
        self.entries.iter().find(|e| e.lower == lower).map(|e| e.verdict)
    }

    /// Recomputes every verdict from the stored gaps and thresholds.
    pub fn is_consistent(&self) -> bool {
        self.entries.iter().all(|e| classify_gap(e.gap, e.threshold, e.required_strict) == e.verdict)
    }
}

/// Whether the gap `λ_{i+1} − λ_i` (1-based `i`) must be strict under `bc`.
pub fn gap_required_strict(bc: &BoundarySpec, i: usize) -> bool {
    match bc.quasi_alpha() {
        None => true,
        Some(alpha) if alpha > 0.0 => i % 2 == 1,
        Some(_) => i % 2 == 0,
    }
}

pub fn gap_report(result: &SpectralResult, bc: &BoundarySpec, deg_tol: f64) -> GapReport {
    let ev = &result.eigenvalues;
    let entries = (1..ev.len())
        .map(|i| {
            let (lo, hi) = (ev[i - 1], ev[i]);
            let threshold = deg_tol * lo.abs().max(hi.abs()).max(1.0);
            GapEntry::new(i, hi - lo, threshold, gap_required_strict(bc, i))
        })
        .collect();
    GapReport { entries, tolerance: deg_tol }
}

/// Gap report on the finer of two grids: a gap is strict only when it also
/// exceeds four times the observed discretization drift of its endpoints.
pub fn gap_report_refined(coarse: &SpectralResult, fine: &SpectralResult, bc: &BoundarySpec, deg_tol: f64) -> GapReport {
    let m = coarse.eigenvalues.len().min(fine.eigenvalues.len());
    let (c, f) = (&coarse.eigenvalues, &fine.eigenvalues);
    let entries = (1..m)
        .map(|i| {
            let drift = (c[i - 1] - f[i - 1]).abs().max((c[i] - f[i]).abs());
            let floor = deg_tol * f[i - 1].abs().max(f[i].abs()).max(1.0);
            GapEntry::new(i, f[i] - f[i - 1], floor.max(4.0 * drift), gap_required_strict(bc, i))
        })
        .collect();
    GapReport { entries, tolerance: deg_tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(values: Vec<f64>) -> SpectralResult {
        let k = values.len();
        SpectralResult { eigenvalues: values, eigenvectors: vec![], residuals: vec![0.0; k], k_requested: k }
    }

    #[test]
    fn periodic_pattern() {
        let p2 = PI * PI;
        let r = synthetic(vec![0.0, 4.0 * p2, 4.0 * p2, 16.0 * p2, 16.0 * p2]);
        let g = gap_report(&r, &BoundarySpec::QuasiPeriodic { alpha: 1.0 }, DEFAULT_DEG_TOL);
        assert_eq!(g.verdict(1), Some(GapVerdict::Strict));
        assert_eq!(g.verdict(2), Some(GapVerdict::Degenerate));
        assert_eq!(g.verdict(3), Some(GapVerdict::Strict));
        assert_eq!(g.verdict(4), Some(GapVerdict::Degenerate));
        assert_eq!(g.violations(), 0);
        assert!(g.is_consistent());
    }

    #[test]
    fn antiperiodic_pattern() {
        let p2 = PI * PI;
        let r = synthetic(vec![p2, p2, 9.0 * p2, 9.0 * p2]);
        let g = gap_report(&r, &BoundarySpec::QuasiPeriodic { alpha: -1.0 }, DEFAULT_DEG_TOL);
        assert_eq!(g.verdict(1), Some(GapVerdict::Degenerate));
        assert_eq!(g.verdict(2), Some(GapVerdict::Strict));
        assert_eq!(g.violations(), 0);
    }

    #[test]
    fn separable_requires_all_gaps() {
        let r = synthetic((1..=6).map(|k| (k * k) as f64 * PI * PI).collect());
        let g = gap_report(&r, &BoundarySpec::DirichletBoth, DEFAULT_DEG_TOL);
        assert!(g.entries.iter().all(|e| e.verdict == GapVerdict::Strict));
        let bad = synthetic(vec![1.0, 1.0, 2.0]);
        let g = gap_report(&bad, &BoundarySpec::Free, DEFAULT_DEG_TOL);
        assert_eq!(g.verdict(1), Some(GapVerdict::Violation));
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let a = SymMatrix::identity(4);
        let b = SymMatrix::identity(5);
        assert!(matches!(solve_sp_eig(&a, &a, &b, 1), Err(Error::DimensionMismatch(_))));
        assert!(matches!(solve_sp_eig(&a, &a, &a, 5), Err(Error::InvalidArgument(_))));
        let neg = SymMatrix::from_diagonal(&[1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(solve_sp_eig(&a, &a, &neg, 1), Err(Error::NotPositiveDefinite { .. })));
    }
}
