//! Quantum-inspired classical sampling for states with a positive P
//! representation.
//!
//! Thermal and squashed inputs are mixtures of coherent states, so a photon
//! pattern can be drawn in three steps: draw each input amplitude from its
//! Gaussian P function, push the amplitudes through the interferometer
//! (`beta_i = sum_j U_ji alpha_j`), then draw each count from
//! `Poisson(|beta_i|^2)`. After setup the per-sample cost is the `O(m^2)`
//! matrix-vector product; this is the permanental point process sampler.

use num_complex::Complex64;

use crate::encoding::{classical_params, clipped_psd_spectrum, GaussianState, InputFlavor};
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, ComplexMatrix, RealSymMatrix};
use crate::rng::RngStream;

use super::PhotonPattern;

/// Prepared per-mode amplitude distributions plus the interferometer.
pub struct ClassicalSampler {
    flavor: InputFlavor,
    unitary: ComplexMatrix,
    /// Standard deviation of each Gaussian amplitude component: both
    /// quadratures for thermal modes, the imaginary part alone for squashed.
    alpha_std: Vec<f64>,
}

impl ClassicalSampler {
    /// Builds the sampler for an encoded thermal or squashed state.
    pub fn from_state(state: &GaussianState) -> Result<Self> {
        match state.flavor() {
            InputFlavor::Thermal | InputFlavor::Squashed => Self::from_parts(
                state.flavor(),
                state.unitary().clone(),
                state.mode_params().to_vec(),
            ),
            other => Err(Error::WrongFlavor { expected: "thermal or squashed", actual: other.name() }),
        }
    }

    /// Builds the sampler straight from a PSD kernel without constructing the
    /// `2m`-dimensional covariance matrices.
    pub fn from_kernel(kernel: &RealSymMatrix, flavor: InputFlavor, scale_c: f64) -> Result<Self> {
        if !(scale_c > 0.0) || !scale_c.is_finite() {
            return Err(Error::InvalidInput(format!("scale_c must be positive, got {scale_c}")));
        }
        let spectrum = sym_eig(kernel)?;
        let clipped = clipped_psd_spectrum(&spectrum.values, flavor.name())?;
        let params = classical_params(&clipped, flavor, scale_c)?;
        Self::from_parts(flavor, ComplexMatrix::from_real(&spectrum.vectors), params)
    }

    /// Builds the sampler from explicit mode data: the interferometer unitary
    /// and the per-mode parameters (`nbar_i` for thermal, the squash `tanh`
    /// parameter in `[0, 1)` for squashed).
    pub fn from_parts(
        flavor: InputFlavor,
        unitary: ComplexMatrix,
        mode_params: Vec<f64>,
    ) -> Result<Self> {
        let m = mode_params.len();
        if unitary.rows() != m || unitary.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} mode parameters with a {}x{} unitary",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let alpha_std: Vec<f64> = match flavor {
            InputFlavor::Thermal => {
                if mode_params.iter().any(|&n| n < 0.0 || !n.is_finite()) {
                    return Err(Error::InvalidInput("thermal nbar must be finite and >= 0".into()));
                }
                mode_params.iter().map(|&n| (n / 2.0).sqrt()).collect()
            }
            InputFlavor::Squashed => {
                if mode_params.iter().any(|&t| !(0.0..1.0).contains(&t)) {
                    return Err(Error::InvalidInput(
                        "squash parameters must lie in [0, 1)".into(),
                    ));
                }
                // variance (e^{2r} - 1)/4 with tanh r = t
                mode_params.iter().map(|&t| (t / (2.0 * (1.0 - t))).sqrt()).collect()
            }
            InputFlavor::Squeezed => {
                return Err(Error::WrongFlavor { expected: "thermal or squashed", actual: "squeezed" })
            }
        };
        Ok(Self { flavor, unitary, alpha_std })
    }

    pub fn modes(&self) -> usize {
        self.alpha_std.len()
    }

    /// Expected total photon number of the prepared state.
    pub fn mean_photons(&self) -> f64 {
        let per_component = match self.flavor {
            InputFlavor::Thermal => 2.0,
            _ => 1.0,
        };
        self.alpha_std.iter().map(|s| per_component * s * s).sum()
    }

    /// Draws one photon pattern; `O(m^2)` per call.
    pub fn sample(&self, rng: &mut RngStream) -> PhotonPattern {
        let m = self.modes();
        let mut alpha = vec![Complex64::ZERO; m];
        for (a, &s) in alpha.iter_mut().zip(&self.alpha_std) {
            if s > 0.0 {
                *a = match self.flavor {
                    InputFlavor::Thermal => Complex64::new(s * rng.normal(), s * rng.normal()),
                    _ => Complex64::new(0.0, s * rng.normal()),
                };
            }
        }
        let mut beta = vec![Complex64::ZERO; m];
        for (j, &a) in alpha.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            for (b, &u) in beta.iter_mut().zip(self.unitary.row(j)) {
                *b += u * a;
            }
        }
        let counts: Vec<u32> = beta.iter().map(|b| rng.poisson(b.norm_sqr())).collect();
        PhotonPattern::new(counts)
    }
}

/// Draws one photon pattern from a thermal or squashed state.
pub fn sample_classical(state: &GaussianState, rng: &mut RngStream) -> Result<PhotonPattern> {
    Ok(ClassicalSampler::from_state(state)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::encode;
    use crate::samplers::hpp_probability;

    fn kernel1(v: f64) -> RealSymMatrix {
        let mut k = RealSymMatrix::zeros(1);
        k.set_sym(0, 0, v);
        k
    }

    #[test]
    fn vacuum_input_always_empty() {
        let sampler = ClassicalSampler::from_parts(
            InputFlavor::Thermal,
            ComplexMatrix::identity(3),
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        let mut rng = RngStream::new(8, 0);
        for _ in 0..100 {
            assert_eq!(sampler.sample(&mut rng).total(), 0);
        }
    }

    #[test]
    fn squeezed_flavor_is_rejected() {
        let state = encode(&kernel1(1.0), InputFlavor::Squeezed, 0.5).unwrap();
        assert!(matches!(
            sample_classical(&state, &mut RngStream::new(0, 0)),
            Err(Error::WrongFlavor { .. })
        ));
    }

    #[test]
    fn single_thermal_mode_is_geometric() {
        let state = encode(&kernel1(1.0), InputFlavor::Thermal, 0.5).unwrap();
        let sampler = ClassicalSampler::from_state(&state).unwrap();
        let mut rng = RngStream::new(21, 0);
        let n = 40_000usize;
        let mut counts = [0usize; 12];
        for _ in 0..n {
            let s = sampler.sample(&mut rng).total() as usize;
            if s < counts.len() {
                counts[s] += 1;
            }
        }
        for s in 0..8usize {
            let p = 0.5_f64.powi(s as i32 + 1);
            let freq = counts[s] as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * se, "s={s}: freq {freq} vs {p}");
        }
    }

    #[test]
    fn thermal_two_modes_match_permanent_probabilities() {
        let kernel = RealSymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let state = encode(&kernel, InputFlavor::Thermal, 0.3).unwrap();
        let sampler = ClassicalSampler::from_state(&state).unwrap();
        let mut rng = RngStream::new(33, 0);
        let n = 40_000usize;
        let mut freq = std::collections::HashMap::new();
        for _ in 0..n {
            let s = sampler.sample(&mut rng);
            *freq.entry((s.counts()[0], s.counts()[1])).or_insert(0usize) += 1;
        }
        for s0 in 0..=3u32 {
            for s1 in 0..=(3 - s0) {
                let p = hpp_probability(&state, &PhotonPattern::new(vec![s0, s1])).unwrap();
                let f = *freq.get(&(s0, s1)).unwrap_or(&0) as f64 / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!(
                    (f - p).abs() <= 3.0 * se + 1e-9,
                    "pattern ({s0},{s1}): freq {f} vs {p}"
                );
            }
        }
    }

    #[test]
    fn squashed_two_modes_match_hafnian_probabilities() {
        let kernel = RealSymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let state = encode(&kernel, InputFlavor::Squashed, 0.22).unwrap();
        let sampler = ClassicalSampler::from_state(&state).unwrap();
        let mut rng = RngStream::new(55, 0);
        let n = 40_000usize;
        let mut freq = std::collections::HashMap::new();
        for _ in 0..n {
            let s = sampler.sample(&mut rng);
            *freq.entry((s.counts()[0], s.counts()[1])).or_insert(0usize) += 1;
        }
        for s0 in 0..=2u32 {
            for s1 in 0..=(2 - s0) {
                let p = hpp_probability(&state, &PhotonPattern::new(vec![s0, s1])).unwrap();
                let f = *freq.get(&(s0, s1)).unwrap_or(&0) as f64 / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!(
                    (f - p).abs() <= 3.5 * se + 1e-9,
                    "pattern ({s0},{s1}): freq {f} vs {p}"
                );
            }
        }
    }

    #[test]
    fn squashed_mean_photons_formula() {
        // one squashed mode: mean photons (e^{2r} - 1)/4 with tanh r = t
        let t: f64 = 0.4;
        let sampler = ClassicalSampler::from_parts(
            InputFlavor::Squashed,
            ComplexMatrix::identity(1),
            vec![t],
        )
        .unwrap();
        let e2r = (1.0 + t) / (1.0 - t);
        assert!((sampler.mean_photons() - (e2r - 1.0) / 4.0).abs() < 1e-12);
        let mut rng = RngStream::new(3, 3);
        let n = 60_000usize;
        let total: u64 = (0..n).map(|_| sampler.sample(&mut rng).total() as u64).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - sampler.mean_photons()).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn from_kernel_agrees_with_from_state() {
        let kernel = RealSymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let state = encode(&kernel, InputFlavor::Thermal, 0.3).unwrap();
        let a = ClassicalSampler::from_state(&state).unwrap();
        let b = ClassicalSampler::from_kernel(&kernel, InputFlavor::Thermal, 0.3).unwrap();
        let mut r1 = RngStream::new(77, 0);
        let mut r2 = RngStream::new(77, 0);
        for _ in 0..50 {
            assert_eq!(a.sample(&mut r1).counts(), b.sample(&mut r2).counts());
        }
    }
}
