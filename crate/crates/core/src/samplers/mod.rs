//! Samplers and probability evaluators for the five point processes.
//!
//! Threshold (TPP) and photon-counting (HPP) processes are driven by a
//! [`GaussianState`]; the permanental process is the quantum-inspired
//! classical sampler for thermal and squashed states; DPP and PPP are the
//! baselines. Exact pattern probabilities and small-instance enumerations
//! back every sampler as test oracles.

mod chain;
mod classical;
mod discrete;
mod hpp_enum;

pub use chain::{sample_tpp, tpp_prefix_marginal, TppChainSampler};
pub use classical::{sample_classical, ClassicalSampler};
pub use discrete::{dpp_mean, sample_dpp, sample_ppp, solve_dpp_scale, DppSampler};
pub use hpp_enum::{sample_hpp_exact, HppEnumeration};

use num_complex::Complex64;

use crate::encoding::{block_kernel, GaussianState, InputFlavor};
use crate::error::{Error, Result};
use crate::matrixfn::{hafnian, permanent, reduce, torontonian};
use crate::numerics::ComplexMatrix;

/// Mode cap for full distribution enumeration.
pub const ENUMERATE_MODE_CAP: usize = 12;

/// Click outcome of threshold detection: one bit per mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdPattern {
    clicks: Vec<u8>,
}

impl ThresholdPattern {
    pub fn new(clicks: Vec<u8>) -> Result<Self> {
        if clicks.iter().any(|&c| c > 1) {
            return Err(Error::InvalidInput("threshold pattern entries must be 0 or 1".into()));
        }
        Ok(Self { clicks })
    }

    pub fn from_indices(m: usize, selected: &[usize]) -> Result<Self> {
        let mut clicks = vec![0u8; m];
        for &i in selected {
            if i >= m {
                return Err(Error::InvalidInput(format!("index {i} out of range for {m} modes")));
            }
            clicks[i] = 1;
        }
        Ok(Self { clicks })
    }

    pub fn len(&self) -> usize {
        self.clicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    pub fn clicks(&self) -> &[u8] {
        &self.clicks
    }

    pub fn count(&self) -> usize {
        self.clicks.iter().filter(|&&c| c == 1).count()
    }

    pub fn selected(&self) -> Vec<usize> {
        self.clicks
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == 1).then_some(i))
            .collect()
    }

    pub(crate) fn as_counts(&self) -> Vec<u32> {
        self.clicks.iter().map(|&c| c as u32).collect()
    }

    /// Pattern index with mode `i` on bit `i`.
    pub fn bitmask(&self) -> usize {
        self.clicks
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &c)| acc | ((c as usize) << i))
    }

    pub fn from_bitmask(m: usize, mask: usize) -> Self {
        Self { clicks: (0..m).map(|i| ((mask >> i) & 1) as u8).collect() }
    }
}

/// Photon-number outcome: a count per mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotonPattern {
    counts: Vec<u32>,
}

impl PhotonPattern {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Collapses counts to clicks.
    pub fn threshold(&self) -> ThresholdPattern {
        ThresholdPattern { clicks: self.counts.iter().map(|&c| (c > 0) as u8).collect() }
    }
}

/// Threshold-detection probability of a click pattern:
/// `det(sigma_Q)^{-1/2} Tor(O_S)` with `O = I - sigma_Q^{-1}` and `O_S` the
/// doubled reduction by the pattern.
pub fn tpp_probability(state: &GaussianState, pattern: &ThresholdPattern) -> Result<f64> {
    let o = threshold_kernel(state)?;
    tpp_probability_with_kernel(state, &o, pattern)
}

/// `O = X K = I - sigma_Q^{-1}`, the Torontonian input of a state.
pub(crate) fn threshold_kernel(state: &GaussianState) -> Result<ComplexMatrix> {
    let inv = state.sigma_q().invert()?;
    Ok(ComplexMatrix::identity(inv.rows()).sub(&inv))
}

pub(crate) fn tpp_probability_with_kernel(
    state: &GaussianState,
    o: &ComplexMatrix,
    pattern: &ThresholdPattern,
) -> Result<f64> {
    if pattern.len() != state.modes() {
        return Err(Error::DimensionMismatch(format!(
            "pattern of length {} for {} modes",
            pattern.len(),
            state.modes()
        )));
    }
    let os = reduce(o, &pattern.as_counts(), true)?;
    let tor = torontonian(&os)?;
    Ok(state.vacuum_probability() * tor)
}

/// Photon-counting probability of a pattern.
///
/// Evaluates the flavor's specialized matrix function on the reduced kernel
/// block: `|Haf((cB)_S)|^2` for squeezed inputs, `per((cC)_S)` for thermal,
/// and the hafnian of the doubled block reduction for squashed, each divided
/// by `prod s_i!` and `sqrt(det sigma_Q)`. Squeezed states put zero mass on
/// odd photon totals; that emerges from the odd-dimension hafnian convention.
pub fn hpp_probability(state: &GaussianState, pattern: &PhotonPattern) -> Result<f64> {
    if pattern.len() != state.modes() {
        return Err(Error::DimensionMismatch(format!(
            "pattern of length {} for {} modes",
            pattern.len(),
            state.modes()
        )));
    }
    let counts = pattern.counts();
    let block = ComplexMatrix::from_real_sym(state.scaled_kernel());
    let weight = match state.flavor() {
        InputFlavor::Squeezed => {
            let sub = reduce(&block, counts, false)?;
            hafnian(&sub)?.norm_sqr()
        }
        InputFlavor::Thermal => {
            let sub = reduce(&block, counts, false)?;
            permanent(&sub)?.re
        }
        InputFlavor::Squashed => {
            let doubled = block_kernel(InputFlavor::Squashed, state.scaled_kernel());
            let sub = reduce(&doubled, counts, true)?;
            hafnian(&sub)?.re
        }
    };
    let mut denom = 1.0;
    for &s in counts {
        for k in 2..=s {
            denom *= k as f64;
        }
    }
    Ok(state.vacuum_probability() * weight / denom)
}

/// Exact TPP distribution over all `2^m` click patterns, indexed by
/// [`ThresholdPattern::bitmask`].
pub fn enumerate_tpp(state: &GaussianState) -> Result<Vec<f64>> {
    let m = state.modes();
    if m > ENUMERATE_MODE_CAP {
        return Err(Error::CapExceeded { what: "tpp enumeration", dim: m, cap: ENUMERATE_MODE_CAP });
    }
    let o = threshold_kernel(state)?;
    (0..(1usize << m))
        .map(|mask| {
            tpp_probability_with_kernel(state, &o, &ThresholdPattern::from_bitmask(m, mask))
        })
        .collect()
}

/// Matrix function used by [`correlation_fn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationProcess {
    Hpp,
    Dpp,
}

/// Unnormalized n-point correlation function: the process's matrix function
/// evaluated on the kernel submatrix indexed by `indices`.
pub fn correlation_fn(
    kernel: &crate::numerics::RealSymMatrix,
    indices: &[usize],
    process: CorrelationProcess,
) -> Result<f64> {
    let m = kernel.dim();
    for (i, &a) in indices.iter().enumerate() {
        if a >= m {
            return Err(Error::InvalidInput(format!("index {a} out of range for {m} points")));
        }
        if indices[..i].contains(&a) {
            return Err(Error::InvalidInput(format!("duplicate index {a} in correlation query")));
        }
    }
    let sub = ComplexMatrix::from_fn(indices.len(), indices.len(), |i, j| {
        Complex64::new(kernel.get(indices[i], indices[j]), 0.0)
    });
    let v = match process {
        CorrelationProcess::Hpp => hafnian(&sub)?,
        CorrelationProcess::Dpp => sub.determinant()?,
    };
    Ok(v.re)
}
