//! Point samples of `√N! Ψ` on the ordered simplex, region tags, and the
//! positivity and nodal-volume statistics built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kuhn::{restrict_full_to_simplex, SimplexFunction};
use super::permutation::Permutation;
use crate::error::{Error, Result};
use crate::manybody::{evaluate_on_tensor_grid, evaluate_with_values, Orbitals, SlaterBasis, WaveVector};

/// Minimum number of points for a nodal-volume estimate.
pub const MIN_NODAL_SAMPLE: usize = 1000;

/// Default relative exclusion threshold for positivity statistics.
pub const DEFAULT_EPS_POS: f64 = 1e-6;

/// `σ` with `σ⁻¹x` non-decreasing, where `(σx)_k = x_{σ(k)}`, and the
/// smallest consecutive gap of the sorted coordinates. Ties give margin 0.
pub fn locate_cell(x: &[f64]) -> (Permutation, f64) {
    let sorter = Permutation::sorting(x);
    let sorted = sorter.permute(x);
    let margin = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (sorter.inverse(), margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionTag {
    Interior,
    /// Within `h` of the coincidence set `x_k = x_{k+1}`.
    NearInterface,
    /// Within `h` of the outer faces `x₁ = 0` or `x_N = 1`.
    NearBoundary,
}

/// Tag of a sorted point for grid spacing `h`.
pub fn region_tag(sorted: &[f64], h: f64) -> RegionTag {
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap / std::f64::consts::SQRT_2 < h {
        return RegionTag::NearInterface;
    }
    let outer = sorted[0].min(1.0 - sorted[sorted.len() - 1]);
    if outer < h {
        RegionTag::NearBoundary
    } else {
        RegionTag::Interior
    }
}

/// Values of `√N! Ψ` at sorted points of `I_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSample {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub tags: Vec<RegionTag>,
    /// Band width used for tagging.
    pub h: f64,
}

impl SimplexSample {
    /// Tags each point with band width `h`; points are sorted in place.
    pub fn new(mut points: Vec<Vec<f64>>, values: Vec<f64>, h: f64) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch(format!("{} points, {} values", points.len(), values.len())));
        }
        for p in &mut points {
            p.sort_by(f64::total_cmp);
        }
        let tags = points.iter().map(|p| region_tag(p, h)).collect();
        Ok(Self { points, values, tags, h })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interior_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.tags).filter(|(_, t)| **t == RegionTag::Interior).map(|(v, _)| *v)
    }

    /// Strictly sorted nodes of simplex grid data.
    pub fn from_simplex_function(f: &SimplexFunction) -> Self {
        let h = 1.0 / f.n_cells() as f64;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for k in 0..f.len() {
            let idx = f.index(k);
            if SimplexFunction::is_tied(&idx) {
                continue;
            }
            points.push(idx.iter().map(|&i| i as f64 * h).collect());
            values.push(f.values()[k]);
        }
        Self::new(points, values, h).expect("matching lengths")
    }
}

/// `T⁻¹Ψ = √N! Ψ|_{S_N}` on the closed simplex grid of the orbitals.
pub fn restrict_to_simplex_function(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals) -> Result<SimplexFunction> {
    if psi.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} determinants", psi.len(), basis.len())));
    }
    let full = evaluate_on_tensor_grid(psi, basis, &orbitals.nodal);
    restrict_full_to_simplex(&full, orbitals.n_cells(), basis.n_particles())
}

/// Values of `√N! Ψ` at the strictly sorted grid nodes, tagged.
pub fn restrict_to_simplex(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals) -> Result<SimplexSample> {
    Ok(SimplexSample::from_simplex_function(&restrict_to_simplex_function(psi, basis, orbitals)?))
}

/// `count` uniform random points of `S_N` with exact values of `√N! Ψ`.
pub fn random_simplex_sample(psi: &WaveVector, basis: &SlaterBasis, orbitals: &Orbitals, count: usize, seed: u64) -> Result<SimplexSample> {
    if psi.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} determinants", psi.len(), basis.len())));
    }
    let n = basis.n_particles();
    let scale = crate::manybody::wave::factorial(n).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        x.sort_by(f64::total_cmp);
        let phi: Vec<Vec<f64>> = x.iter().map(|&xk| orbitals.values_at(xk)).collect();
        values.push(scale * evaluate_with_values(psi, basis, &phi));
        points.push(x);
    }
    SimplexSample::new(points, values, 1.0 / orbitals.n_cells() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    /// Fraction of retained interior points sharing the reference sign;
    /// 1 when nothing is retained.
    pub sign_consistency: f64,
    /// Fraction of interior points with `|value| ≤ ε·max`.
    pub excluded: f64,
    /// Number of interior points.
    pub interior: usize,
    /// Sign of the largest-magnitude point.
    pub reference_sign: f64,
}

pub fn positivity_report(sample: &SimplexSample, eps_pos: f64) -> PositivityReport {
    let (mut reference, mut best) = (1.0, 0.0);
    for &v in &sample.values {
        if v.abs() > best {
            best = v.abs();
            reference = v.signum();
        }
    }
    let cut = eps_pos * best;
    let (mut interior, mut excluded, mut agree) = (0usize, 0usize, 0usize);
    for v in sample.interior_values() {
        interior += 1;
        if v.abs() <= cut {
            excluded += 1;
        } else if v * reference > 0.0 {
            agree += 1;
        }
    }
    let retained = interior - excluded;
    PositivityReport {
        sign_consistency: if retained == 0 { 1.0 } else { agree as f64 / retained as f64 },
        excluded: if interior == 0 { 0.0 } else { excluded as f64 / interior as f64 },
        interior,
        reference_sign: reference,
    }
}

/// Fraction of interior points with `|value| ≤ t·max` for each threshold `t`.
pub fn nodal_volume_estimate(sample: &SimplexSample, thresholds: &[f64]) -> Result<Vec<f64>> {
    if sample.len() < MIN_NODAL_SAMPLE {
        return Err(Error::InvalidArgument(format!(
            "nodal volume needs at least {MIN_NODAL_SAMPLE} points, got {}",
            sample.len()
        )));
    }
    if thresholds.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("thresholds must be descending".into()));
    }
    let max = sample.max_abs();
    let interior: Vec<f64> = sample.interior_values().map(f64::abs).collect();
    if interior.is_empty() {
        return Err(Error::InvalidArgument("sample has no interior points".into()));
    }
    Ok(thresholds
        .iter()
        .map(|t| interior.iter().filter(|v| **v <= t * max).count() as f64 / interior.len() as f64)
        .collect())
}
