//! Determinantal and Poisson baselines.

use crate::error::{Error, Result};
use crate::kernels::StateSpace;
use crate::numerics::{bisect_monotone, sym_eig, RealMatrix, RealSymMatrix};
use crate::rng::RngStream;

/// Eigenvalues below this are treated as exactly zero (never selected).
const DPP_EIG_ZERO: f64 = 1e-12;
/// Eigenvalues may dip this far below zero before the kernel is rejected.
const DPP_EIG_TOL: f64 = 1e-9;

/// Spectral L-ensemble sampler: subsets are drawn with probability
/// `det(K_S) / det(K + I)`.
pub struct DppSampler {
    eigenvalues: Vec<f64>,
    vectors: RealMatrix,
    m: usize,
}

impl DppSampler {
    pub fn new(kernel: &RealSymMatrix) -> Result<Self> {
        let spec = sym_eig(kernel)?;
        let min = spec.values.last().copied().unwrap_or(0.0);
        if min < -DPP_EIG_TOL {
            return Err(Error::SpectralPrecondition(format!(
                "DPP kernel is not positive semidefinite: min eigenvalue {min:e}"
            )));
        }
        let eigenvalues: Vec<f64> =
            spec.values.iter().map(|&l| if l < DPP_EIG_ZERO { 0.0 } else { l }).collect();
        Ok(Self { eigenvalues, vectors: spec.vectors, m: kernel.dim() })
    }

    /// Expected subset size `sum lambda / (1 + lambda)`.
    pub fn expected_size(&self) -> f64 {
        self.eigenvalues.iter().map(|&l| l / (1.0 + l)).sum()
    }

    /// Draws one subset, ascending indices.
    pub fn sample(&self, rng: &mut RngStream) -> Result<Vec<usize>> {
        // phase 1: pick the elementary DPP by independent eigenvector coin flips
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l > 0.0 && rng.uniform() < l / (1.0 + l) {
                cols.push(self.vectors.col(k));
            }
        }
        // phase 2: sequential point selection from the projection kernel
        let mut out = Vec::with_capacity(cols.len());
        while !cols.is_empty() {
            let weights: Vec<f64> = (0..self.m)
                .map(|i| cols.iter().map(|v| v[i] * v[i]).sum())
                .collect();
            let Some(i) = rng.weighted_index(&weights) else {
                return Err(Error::NumericalFailure(
                    "projection kernel collapsed before all points were drawn".into(),
                ));
            };
            out.push(i);
            // deflate the direction that can see coordinate i
            let pivot_col = (0..cols.len())
                .max_by(|&a, &b| cols[a][i].abs().partial_cmp(&cols[b][i].abs()).unwrap())
                .unwrap();
            let pivot = cols.swap_remove(pivot_col);
            if cols.is_empty() {
                break;
            }
            let pi = pivot[i];
            for col in cols.iter_mut() {
                let f = col[i] / pi;
                if f != 0.0 {
                    for (c, p) in col.iter_mut().zip(&pivot) {
                        *c -= f * p;
                    }
                }
            }
            // re-orthonormalize by modified Gram-Schmidt
            for c in 0..cols.len() {
                for prev in 0..c {
                    let dot: f64 = cols[c].iter().zip(&cols[prev]).map(|(a, b)| a * b).sum();
                    if dot != 0.0 {
                        let prev_col = cols[prev].clone();
                        for (x, p) in cols[c].iter_mut().zip(&prev_col) {
                            *x -= dot * p;
                        }
                    }
                }
                let norm: f64 = cols[c].iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-9 {
                    return Err(Error::NumericalFailure(
                        "degenerate projection basis in DPP sampling".into(),
                    ));
                }
                for x in cols[c].iter_mut() {
                    *x /= norm;
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Draws one DPP subset from a PSD kernel.
pub fn sample_dpp(kernel: &RealSymMatrix, rng: &mut RngStream) -> Result<Vec<usize>> {
    DppSampler::new(kernel)?.sample(rng)
}

/// Expected DPP subset size for a rescaled kernel `cK`.
pub fn dpp_mean(lambdas: &[f64], c: f64) -> f64 {
    lambdas.iter().map(|&l| (c * l).max(0.0)).map(|t| t / (1.0 + t)).sum()
}

/// Solves `dpp_mean(lambdas, c) == target` for `c`.
///
/// The mean saturates at the number of positive eigenvalues, so the target
/// must stay strictly below it.
pub fn solve_dpp_scale(lambdas: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidInput(format!("target mean must be positive, got {target}")));
    }
    let n_pos = lambdas.iter().filter(|&&l| l > DPP_EIG_ZERO).count() as f64;
    if target >= n_pos {
        return Err(Error::InvalidInput(format!(
            "DPP mean saturates at {n_pos} positive eigenvalues; target {target} unreachable"
        )));
    }
    let mut hi = 1.0;
    while dpp_mean(lambdas, hi) <= target {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(Error::Unbracketed { target, lo: 0.0, hi });
        }
    }
    bisect_monotone(|c| dpp_mean(lambdas, c), target, 0.0, hi, 1e-9)
}

/// Homogeneous Poisson point process: the count is Poisson with the given
/// mean, truncated at the space size, and the indices are uniform without
/// replacement.
pub fn sample_ppp(space: &StateSpace, mean_points: f64, rng: &mut RngStream) -> Result<Vec<usize>> {
    let m = space.len();
    if !(mean_points >= 0.0) || mean_points > m as f64 {
        return Err(Error::InvalidInput(format!(
            "PPP mean must lie in [0, {m}], got {mean_points}"
        )));
    }
    let n = loop {
        let n = rng.poisson(mean_points) as usize;
        if n <= m {
            break n;
        }
    };
    Ok(rng.distinct_indices(m, n))
}
