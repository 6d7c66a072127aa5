//! Desk-scale exact photon-pattern sampling by cutoff enumeration.

use crate::encoding::GaussianState;
use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::{hpp_probability, PhotonPattern};

/// Default bound on the probability mass the cutoff may discard.
pub const DEFAULT_TRUNCATED_MASS_BOUND: f64 = 1e-3;
/// Refuse enumerations beyond this many patterns.
const PATTERN_BUDGET: f64 = 2_000_000.0;

/// Exact HPP distribution over all patterns with total count at most the
/// cutoff, renormalized for sampling.
#[derive(Debug)]
pub struct HppEnumeration {
    patterns: Vec<PhotonPattern>,
    probs: Vec<f64>,
    truncated_mass: f64,
    cumulative: Vec<f64>,
}

impl HppEnumeration {
    pub fn new(state: &GaussianState, cutoff: u32) -> Result<Self> {
        Self::with_mass_bound(state, cutoff, DEFAULT_TRUNCATED_MASS_BOUND)
    }

    pub fn with_mass_bound(state: &GaussianState, cutoff: u32, bound: f64) -> Result<Self> {
        let m = state.modes();
        // C(cutoff + m, m) patterns; refuse before allocating
        let mut count = 1.0_f64;
        for i in 1..=m {
            count *= (cutoff as f64 + i as f64) / i as f64;
        }
        if count > PATTERN_BUDGET {
            return Err(Error::CapExceeded {
                what: "hpp enumeration",
                dim: count as usize,
                cap: PATTERN_BUDGET as usize,
            });
        }

        let mut patterns = Vec::with_capacity(count as usize);
        let mut current = vec![0u32; m];
        gen_patterns(&mut current, 0, cutoff, &mut patterns);

        let probs: Vec<f64> = patterns
            .iter()
            .map(|p| hpp_probability(state, p))
            .collect::<Result<_>>()?;
        let total: f64 = probs.iter().sum();
        let truncated_mass = (1.0 - total).max(0.0);
        if truncated_mass > bound {
            return Err(Error::TruncatedMass { mass: truncated_mass, bound });
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p / total;
            cumulative.push(acc);
        }
        Ok(Self { patterns, probs, truncated_mass, cumulative })
    }

    /// Probability mass beyond the cutoff, `1 - sum(enumerated)`.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn patterns(&self) -> &[PhotonPattern] {
        &self.patterns
    }

    /// Exact (pre-normalization) probabilities aligned with [`Self::patterns`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Categorical draw from the renormalized enumeration.
    pub fn sample(&self, rng: &mut RngStream) -> PhotonPattern {
        let u = rng.uniform();
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.patterns.len() - 1);
        self.patterns[idx].clone()
    }
}

fn gen_patterns(current: &mut Vec<u32>, mode: usize, left: u32, out: &mut Vec<PhotonPattern>) {
    if mode == current.len() {
        out.push(PhotonPattern::new(current.clone()));
        return;
    }
    for s in 0..=left {
        current[mode] = s;
        gen_patterns(current, mode + 1, left - s, out);
    }
    current[mode] = 0;
}

/// Draws one photon pattern by cutoff enumeration.
pub fn sample_hpp_exact(
    state: &GaussianState,
    cutoff: u32,
    rng: &mut RngStream,
) -> Result<PhotonPattern> {
    Ok(HppEnumeration::new(state, cutoff)?.sample(rng))
}
