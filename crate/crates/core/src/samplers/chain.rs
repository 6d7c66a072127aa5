//! Exact mode-by-mode threshold sampling.
//!
//! The sampler walks the modes in order and draws each click from the exact
//! conditional given the prefix. Prefix marginals factor into
//!
//! ```text
//! M(prefix) = det(sigma_Q^(U))^(-1/2) * sum over Z in clicked set of
//!             (-1)^|Z| det(W_(Z))^(-1/2)
//! ```
//!
//! where `U` is the set of no-click modes so far and `W` is the Schur
//! complement of `sigma_Q` after eliminating `U`'s index pairs: conditioning
//! a threshold "no click" is a vacuum projection, which keeps the state
//! Gaussian. Eliminations cost `O(r^2)` each, and the inclusion-exclusion
//! over clicked modes costs `2^clicks` small determinants, so the sampler
//! stays exact while scaling to hundreds of modes at thin click counts.
//!
//! The marginals agree with the reduced-state Torontonian route
//! ([`tpp_prefix_marginal`]), which serves as the independent oracle.

use num_complex::Complex64;

use crate::encoding::GaussianState;
use crate::error::{Error, Result};
use crate::matrixfn::{reduce, torontonian};
use crate::numerics::ComplexMatrix;
use crate::rng::RngStream;

use super::ThresholdPattern;

/// Default cap on the number of clicks the chain sampler will track; each
/// additional click doubles the inclusion-exclusion work.
pub const CHAIN_CLICK_CAP: usize = 24;

/// Slack accepted on conditionals before declaring numerical failure.
const CONDITIONAL_SLACK: f64 = 1e-9;

/// Exact threshold-pattern sampler over a Gaussian state.
pub struct TppChainSampler<'a> {
    state: &'a GaussianState,
    max_clicks: usize,
}

impl<'a> TppChainSampler<'a> {
    pub fn new(state: &'a GaussianState) -> Self {
        Self { state, max_clicks: CHAIN_CLICK_CAP }
    }

    pub fn with_max_clicks(mut self, cap: usize) -> Self {
        self.max_clicks = cap;
        self
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<ThresholdPattern> {
        self.sample_with_ln_prob(rng).map(|(p, _)| p)
    }

    /// Draws one pattern; the accumulated marginal of the full pattern is
    /// returned as its exact log-probability.
    pub fn sample_with_ln_prob(&self, rng: &mut RngStream) -> Result<(ThresholdPattern, f64)> {
        let m = self.state.modes();
        let mut w = self.state.sigma_q().clone();
        let mut alive: Vec<usize> = (0..m).collect();
        let mut clicked: Vec<usize> = Vec::new();
        let mut clicks = vec![0u8; m];
        let mut ln_det_u = 0.0_f64;

        for mode in 0..m {
            let r = alive.len();
            let cpos: Vec<usize> = clicked
                .iter()
                .map(|id| alive.iter().position(|x| x == id).expect("clicked mode alive"))
                .collect();
            let jpos = alive.iter().position(|&x| x == mode).expect("mode alive");

            let denom = alternating_sum(&w, r, &cpos, None)?;
            let numer = alternating_sum(&w, r, &cpos, Some(jpos))?;
            let q0 = numer / denom;
            if !q0.is_finite() || q0 < -CONDITIONAL_SLACK || q0 > 1.0 + CONDITIONAL_SLACK {
                return Err(Error::NumericalFailure(format!(
                    "no-click conditional {q0} outside [0, 1] at mode {mode}"
                )));
            }
            let q0 = q0.clamp(0.0, 1.0);

            if rng.uniform() < q0 {
                ln_det_u += eliminate_pair(&mut w, r, jpos)?;
                alive.remove(jpos);
            } else {
                clicks[mode] = 1;
                clicked.push(mode);
                if clicked.len() > self.max_clicks {
                    return Err(Error::CapExceeded {
                        what: "chain-sampler clicks",
                        dim: clicked.len(),
                        cap: self.max_clicks,
                    });
                }
            }
        }

        let r = alive.len();
        let cpos: Vec<usize> = (0..r).collect();
        let tail = alternating_sum(&w, r, &cpos, None)?;
        if !(tail > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "final pattern weight {tail} not positive"
            )));
        }
        let ln_p = -0.5 * ln_det_u + tail.ln();
        Ok((ThresholdPattern::new(clicks)?, ln_p))
    }
}

/// Draws one exact TPP sample.
pub fn sample_tpp(state: &GaussianState, rng: &mut RngStream) -> Result<ThresholdPattern> {
    TppChainSampler::new(state).sample(rng)
}

/// `sum over Z subsets of cpos of (-1)^|Z| det(W_(Z + extra))^(-1/2)` where
/// `(A)` selects index pairs `{a, a+r}`.
fn alternating_sum(
    w: &ComplexMatrix,
    r: usize,
    cpos: &[usize],
    extra: Option<usize>,
) -> Result<f64> {
    let c = cpos.len();
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut idx: Vec<usize> = Vec::with_capacity(2 * (c + 1));
    for z in 0u64..(1u64 << c) {
        idx.clear();
        for (b, &p) in cpos.iter().enumerate() {
            if z & (1 << b) != 0 {
                idx.push(p);
            }
        }
        if let Some(e) = extra {
            idx.push(e);
        }
        let k = idx.len();
        for i in 0..k {
            idx.push(idx[i] + r);
        }
        let sub = w.select(&idx, &idx);
        let Some(det) = sub.ldl_det_hermitian() else {
            return Err(Error::InvalidState(
                "conditioned sigma_Q submatrix not positive definite".into(),
            ));
        };
        let sign = if z.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign / det.sqrt();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Schur-eliminates the index pair `{j, j+r}` from the Hermitian `2r x 2r`
/// matrix in pair layout, returning `ln det` of the 2x2 pivot block.
fn eliminate_pair(w: &mut ComplexMatrix, r: usize, j: usize) -> Result<f64> {
    let (j0, j1) = (j, j + r);
    let p00 = w.get(j0, j0);
    let p01 = w.get(j0, j1);
    let p10 = w.get(j1, j0);
    let p11 = w.get(j1, j1);
    let det = p00 * p11 - p01 * p10;
    if !(det.re > 0.0) || det.im.abs() > 1e-9 * det.re {
        return Err(Error::InvalidState(format!(
            "vacuum-conditioning pivot determinant {det} not positive"
        )));
    }
    let inv = det.inv();
    // P^{-1} entries
    let q00 = p11 * inv;
    let q01 = -p01 * inv;
    let q10 = -p10 * inv;
    let q11 = p00 * inv;

    let half = r - 1;
    let old = |idx: usize| -> usize {
        let (block, p) = if idx < half { (0, idx) } else { (1, idx - half) };
        let shifted = if p < j { p } else { p + 1 };
        shifted + block * r
    };
    let next = ComplexMatrix::from_fn(2 * half, 2 * half, |a, b| {
        let (oa, ob) = (old(a), old(b));
        let ra0 = w.get(oa, j0);
        let ra1 = w.get(oa, j1);
        let c0 = w.get(j0, ob);
        let c1 = w.get(j1, ob);
        let corr = ra0 * (q00 * c0 + q01 * c1) + ra1 * (q10 * c0 + q11 * c1);
        w.get(oa, ob) - corr
    });
    *w = next.hermitian_part();
    Ok(det.re.ln())
}

/// Marginal probability of a click prefix on the first `prefix.len()` modes,
/// evaluated through the reduced-state Torontonian route: delete the
/// traced-out modes from `Sigma`, rebuild `sigma_Q`, and apply the threshold
/// distribution of the reduced state.
pub fn tpp_prefix_marginal(state: &GaussianState, prefix: &[u8]) -> Result<f64> {
    let m = state.modes();
    let k = prefix.len();
    if k > m {
        return Err(Error::DimensionMismatch(format!("prefix of length {k} for {m} modes")));
    }
    if prefix.iter().any(|&c| c > 1) {
        return Err(Error::InvalidInput("prefix entries must be 0 or 1".into()));
    }
    let idx: Vec<usize> = (0..k).chain(m..m + k).collect();
    let sigma_red = state.sigma().select(&idx, &idx);
    let mut sigma_q_red = sigma_red;
    for i in 0..2 * k {
        let v = sigma_q_red.get(i, i);
        sigma_q_red.set(i, i, v + Complex64::new(0.5, 0.0));
    }
    let det = sigma_q_red.determinant()?;
    if k > 0 && (!(det.re > 0.0) || det.im.abs() > 1e-9 * det.re) {
        return Err(Error::InvalidState(format!("reduced det(sigma_Q) = {det} not positive")));
    }
    let o_red = if k == 0 {
        ComplexMatrix::zeros(0, 0)
    } else {
        ComplexMatrix::identity(2 * k).sub(&sigma_q_red.invert()?)
    };
    let counts: Vec<u32> = prefix.iter().map(|&c| c as u32).collect();
    let o_s = reduce(&o_red, &counts, true)?;
    let tor = torontonian(&o_s)?;
    Ok(tor / det.re.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode, InputFlavor};
    use crate::kernels::{grid_space, rbf_kernel};
    use crate::numerics::RealSymMatrix;
    use crate::samplers::{enumerate_tpp, tpp_probability};

    fn kernel1(v: f64) -> RealSymMatrix {
        let mut k = RealSymMatrix::zeros(1);
        k.set_sym(0, 0, v);
        k
    }

    #[test]
    fn vacuum_always_empty() {
        let state = encode(&kernel1(1.0), InputFlavor::Thermal, 1e-13).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..200 {
            let p = sample_tpp(&state, &mut rng).unwrap();
            assert_eq!(p.count(), 0);
        }
    }

    #[test]
    fn single_thermal_mode_click_frequency() {
        let state = encode(&kernel1(1.0), InputFlavor::Thermal, 0.5).unwrap();
        let mut rng = RngStream::new(2, 0);
        let n = 20_000;
        let mut clicks = 0usize;
        for _ in 0..n {
            clicks += sample_tpp(&state, &mut rng).unwrap().count();
        }
        let freq = clicks as f64 / n as f64;
        let se = (0.25_f64 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * se, "freq {freq}");
    }

    #[test]
    fn prefix_marginals_are_consistent_and_match_tor_route() {
        let space = grid_space(2, 2, 1.0).unwrap();
        let kernel = rbf_kernel(&space, 1.0).unwrap();
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            let state = encode(&kernel, flavor, 0.2).unwrap();
            // additivity of the Tor-route marginals
            for k in 1..=4usize {
                for mask in 0..(1usize << (k - 1)) {
                    let parent: Vec<u8> = (0..k - 1).map(|i| ((mask >> i) & 1) as u8).collect();
                    let mp = tpp_prefix_marginal(&state, &parent).unwrap();
                    let mut extended = 0.0;
                    for s in 0..=1u8 {
                        let mut child = parent.clone();
                        child.push(s);
                        extended += tpp_prefix_marginal(&state, &child).unwrap();
                    }
                    assert!(
                        (extended - mp).abs() <= 1e-9,
                        "{flavor} prefix {parent:?}: {extended} vs {mp}"
                    );
                }
            }
            // the full-prefix marginal is the pattern probability
            let dist = enumerate_tpp(&state).unwrap();
            for mask in 0..16usize {
                let prefix: Vec<u8> = (0..4).map(|i| ((mask >> i) & 1) as u8).collect();
                let m1 = tpp_prefix_marginal(&state, &prefix).unwrap();
                assert!((m1 - dist[mask]).abs() <= 1e-9, "{flavor} mask {mask}");
            }
        }
    }

    #[test]
    fn sampler_ln_prob_matches_exact_probability() {
        let space = grid_space(2, 2, 1.0).unwrap();
        let kernel = rbf_kernel(&space, 1.0).unwrap();
        let state = encode(&kernel, InputFlavor::Thermal, 0.22).unwrap();
        let mut rng = RngStream::new(9, 4);
        for _ in 0..50 {
            let (pattern, ln_p) =
                TppChainSampler::new(&state).sample_with_ln_prob(&mut rng).unwrap();
            let exact = tpp_probability(&state, &pattern).unwrap();
            assert!(
                (ln_p.exp() - exact).abs() <= 1e-9 * exact.max(1e-12),
                "pattern {:?}: {} vs {exact}",
                pattern.clicks(),
                ln_p.exp()
            );
        }
    }

    #[test]
    fn sampler_distribution_close_to_enumeration() {
        let space = grid_space(3, 1, 1.0).unwrap();
        let kernel = rbf_kernel(&space, 1.0).unwrap();
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            let state = encode(&kernel, flavor, 0.25).unwrap();
            let dist = enumerate_tpp(&state).unwrap();
            let mut rng = RngStream::new(31, 0);
            let n = 20_000usize;
            let mut counts = vec![0usize; dist.len()];
            for _ in 0..n {
                counts[sample_tpp(&state, &mut rng).unwrap().bitmask()] += 1;
            }
            let tvd: f64 = dist
                .iter()
                .zip(&counts)
                .map(|(p, &c)| (p - c as f64 / n as f64).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tvd < 0.03, "{flavor}: tvd {tvd}");
        }
    }

    #[test]
    fn click_cap_is_enforced() {
        let kernel = RealSymMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.2 });
        let state = encode(&kernel, InputFlavor::Thermal, 0.6).unwrap();
        let mut rng = RngStream::new(4, 0);
        let mut hit_cap = false;
        for _ in 0..500 {
            match TppChainSampler::new(&state).with_max_clicks(1).sample(&mut rng) {
                Err(Error::CapExceeded { what, .. }) => {
                    assert_eq!(what, "chain-sampler clicks");
                    hit_cap = true;
                }
                Ok(p) => assert!(p.count() <= 1),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(hit_cap);
    }
}
