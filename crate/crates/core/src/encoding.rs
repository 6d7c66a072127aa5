//! Embedding of kernel matrices into Gaussian states.
//!
//! A kernel `K` plus an input flavor and a scale `c` determine a Gaussian
//! state through its block kernel matrix:
//!
//! ```text
//! squeezed:  [[cB, 0 ], [0,  cB]]      B any real symmetric, c*svmax(B) < 1
//! thermal:   [[0,  cC], [cC, 0 ]]      C PSD,  c*eigmax(C) < 1
//! squashed:  [[cC, cC], [cC, cC]]      C PSD, 2c*eigmax(C) < 1
//! ```
//!
//! with `sigma_Q^{-1} = I - X K`, `Sigma = sigma_Q - I/2` and
//! `X = [[0, I], [I, 0]]`. The first `m` indices are the unstarred block.
//!
//! The average photon number is controlled by rescaling: `mean_points` gives
//! `E(N)` as a function of the kernel spectrum and `solve_scale` inverts it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    bisect_monotone, sym_eig, takagi_real, ComplexMatrix, RealSymMatrix, Spectrum,
};

/// Eigenvalue tolerance below zero accepted (and clipped) on PSD kernels.
const PSD_TOL: f64 = 1e-9;
/// Tolerance of the `solve_scale` bisection on `|E(N) - target|`.
const SCALE_TOL: f64 = 1e-9;

/// Single-mode input state family behind the kernel embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFlavor {
    Squeezed,
    Thermal,
    Squashed,
}

impl InputFlavor {
    pub fn name(&self) -> &'static str {
        match self {
            InputFlavor::Squeezed => "squeezed",
            InputFlavor::Thermal => "thermal",
            InputFlavor::Squashed => "squashed",
        }
    }
}

impl std::fmt::Display for InputFlavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InputFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squeezed" => Ok(InputFlavor::Squeezed),
            "thermal" => Ok(InputFlavor::Thermal),
            "squashed" => Ok(InputFlavor::Squashed),
            other => Err(Error::InvalidInput(format!("unknown flavor {other:?}"))),
        }
    }
}

/// A zero-mean Gaussian state encoding a kernel matrix.
///
/// Immutable after construction; all fields are plain data, so sharing across
/// threads is safe.
#[derive(Debug, Clone)]
pub struct GaussianState {
    flavor: InputFlavor,
    scale_c: f64,
    modes: usize,
    /// Per-mode parameter: `tanh r_i` (squeezed), `nbar_i` (thermal) or the
    /// effective squash `tanh` parameter `2 c lambda_i` (squashed).
    mode_params: Vec<f64>,
    /// Kernel-basis unitary: Takagi factor for squeezed inputs, the real
    /// orthogonal eigenbasis otherwise.
    unitary: ComplexMatrix,
    /// The scaled kernel block `cB` / `cC` (after PSD clipping, if any).
    scaled_kernel: RealSymMatrix,
    sigma: ComplexMatrix,
    sigma_q: ComplexMatrix,
    det_sigma_q: f64,
}

impl GaussianState {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn flavor(&self) -> InputFlavor {
        self.flavor
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    pub fn mode_params(&self) -> &[f64] {
        &self.mode_params
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// The scaled `m x m` kernel block (`cB` for squeezed, `cC` otherwise).
    pub fn scaled_kernel(&self) -> &RealSymMatrix {
        &self.scaled_kernel
    }

    /// Complex covariance `Sigma`, `2m x 2m`.
    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    /// `sigma_Q = Sigma + I/2`, `2m x 2m`.
    pub fn sigma_q(&self) -> &ComplexMatrix {
        &self.sigma_q
    }

    pub fn det_sigma_q(&self) -> f64 {
        self.det_sigma_q
    }

    /// Probability of the all-vacuum outcome, `det(sigma_Q)^{-1/2}`.
    pub fn vacuum_probability(&self) -> f64 {
        1.0 / self.det_sigma_q.sqrt()
    }

    /// Expected number of photons of the encoded state.
    pub fn mean_photons(&self) -> f64 {
        match self.flavor {
            InputFlavor::Squeezed => {
                self.mode_params.iter().map(|t| t * t / (1.0 - t * t)).sum()
            }
            InputFlavor::Thermal => self.mode_params.iter().sum(),
            InputFlavor::Squashed => {
                // tanh parameter t = 2 c lambda; mean photons t / (2 (1 - t))
                self.mode_params.iter().map(|t| t / (2.0 * (1.0 - t))).sum()
            }
        }
    }

    /// Smallest eigenvalue of `Sigma + Z/2` with `Z = diag(I, -I)`.
    ///
    /// Non-negative (up to roundoff) exactly when the state satisfies the
    /// uncertainty relation. Computed through the real embedding of the
    /// Hermitian form, so it costs a `4m`-dimensional eigendecomposition.
    pub fn uncertainty_defect(&self) -> Result<f64> {
        let n = 2 * self.modes;
        let mut h = self.sigma.clone();
        for i in 0..n {
            let z = if i < self.modes { 0.5 } else { -0.5 };
            h.set(i, i, h.get(i, i) + Complex64::new(z, 0.0));
        }
        let h = h.hermitian_part();
        let embed = RealSymMatrix::from_fn(2 * n, |i, j| {
            let (bi, ii) = (i / n, i % n);
            let (bj, jj) = (j / n, j % n);
            let v = h.get(ii, jj);
            match (bi, bj) {
                (0, 0) | (1, 1) => v.re,
                (0, 1) => -v.im,
                _ => v.im,
            }
        });
        let spec = sym_eig(&embed)?;
        Ok(spec.values.last().copied().unwrap_or(0.0))
    }
}

/// `X = [[0, I], [I, 0]]` applied on the left: swaps the two row blocks.
fn swap_row_blocks(k: &ComplexMatrix) -> ComplexMatrix {
    let n = k.rows() / 2;
    ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let src = if i < n { i + n } else { i - n };
        k.get(src, j)
    })
}

/// Assembles the `2m x 2m` block kernel for a flavor from the scaled block.
pub(crate) fn block_kernel(flavor: InputFlavor, ck: &RealSymMatrix) -> ComplexMatrix {
    let m = ck.dim();
    ComplexMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let (bi, bj) = (i / m, j / m);
        let v = Complex64::new(ck.get(i % m, j % m), 0.0);
        match flavor {
            InputFlavor::Squeezed => {
                // real B, so the conjugate block equals B
                if bi == bj {
                    v
                } else {
                    Complex64::ZERO
                }
            }
            InputFlavor::Thermal => {
                if bi != bj {
                    v
                } else {
                    Complex64::ZERO
                }
            }
            InputFlavor::Squashed => v,
        }
    })
}

/// Per-mode parameters for the classical flavors from a clipped PSD
/// spectrum: `nbar_i = c mu_i / (1 - c mu_i)` for thermal inputs and the
/// effective squash parameter `2 c lambda_i` otherwise.
pub(crate) fn classical_params(
    clipped: &[f64],
    flavor: InputFlavor,
    scale_c: f64,
) -> Result<Vec<f64>> {
    let lmax = clipped.first().copied().unwrap_or(0.0);
    let (factor, label) = match flavor {
        InputFlavor::Thermal => (scale_c, "c * max eigenvalue"),
        InputFlavor::Squashed => (2.0 * scale_c, "2c * max eigenvalue"),
        InputFlavor::Squeezed => {
            return Err(Error::InvalidInput("classical parameters need thermal or squashed".into()))
        }
    };
    if factor * lmax >= 1.0 {
        return Err(Error::SpectralPrecondition(format!(
            "{} encoding needs {label} < 1, got {}",
            flavor.name(),
            factor * lmax
        )));
    }
    Ok(match flavor {
        InputFlavor::Thermal => {
            clipped.iter().map(|&mu| scale_c * mu / (1.0 - scale_c * mu)).collect()
        }
        _ => clipped.iter().map(|&l| 2.0 * scale_c * l).collect(),
    })
}

/// Clips slightly negative eigenvalues of a PSD-expected spectrum, erring on
/// values below the tolerance.
pub(crate) fn clipped_psd_spectrum(values: &[f64], what: &str) -> Result<Vec<f64>> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::SpectralPrecondition(format!(
            "{what} kernel is not positive semidefinite: min eigenvalue {min:e}"
        )));
    }
    if min < 0.0 {
        log::warn!("clipping {what} kernel eigenvalues as low as {min:e} to zero");
    }
    Ok(values.iter().map(|&v| v.max(0.0)).collect())
}

/// Encodes a kernel matrix into a Gaussian state.
///
/// Builds the flavor's block kernel, then `sigma_Q^{-1} = I - X K`, `sigma_Q`
/// by inversion and `Sigma = sigma_Q - I/2`. Mode parameters come from the
/// kernel spectrum. The spectral preconditions checked here are exactly the
/// conditions under which the state satisfies the uncertainty relation; see
/// [`GaussianState::uncertainty_defect`] for the direct check.
pub fn encode(kernel: &RealSymMatrix, flavor: InputFlavor, scale_c: f64) -> Result<GaussianState> {
    if !(scale_c > 0.0) || !scale_c.is_finite() {
        return Err(Error::InvalidInput(format!("scale_c must be positive, got {scale_c}")));
    }
    let m = kernel.dim();
    let spectrum = sym_eig(kernel)?;

    let (mode_params, unitary, effective_kernel) = match flavor {
        InputFlavor::Squeezed => {
            let (lambdas, u) = takagi_real(kernel)?;
            let tmax = scale_c * lambdas.first().copied().unwrap_or(0.0);
            if tmax >= 1.0 {
                return Err(Error::SpectralPrecondition(format!(
                    "squeezed encoding needs c * max singular value < 1, got {tmax}"
                )));
            }
            let params: Vec<f64> = lambdas.iter().map(|l| scale_c * l).collect();
            (params, u, kernel.clone())
        }
        InputFlavor::Thermal | InputFlavor::Squashed => {
            let clipped = clipped_psd_spectrum(&spectrum.values, flavor.name())?;
            let params = classical_params(&clipped, flavor, scale_c)?;
            let was_clipped = clipped.iter().zip(&spectrum.values).any(|(a, b)| a != b);
            let effective = if was_clipped {
                RealSymMatrix::from_fn(m, |i, j| {
                    (0..m)
                        .map(|k| {
                            spectrum.vectors.get(i, k) * clipped[k] * spectrum.vectors.get(j, k)
                        })
                        .sum()
                })
            } else {
                kernel.clone()
            };
            let u = ComplexMatrix::from_real(&spectrum.vectors);
            (params, u, effective)
        }
    };

    let scaled_kernel = effective_kernel.scaled(scale_c);
    let k_block = block_kernel(flavor, &scaled_kernel);
    let sigma_q_inv = ComplexMatrix::identity(2 * m).sub(&swap_row_blocks(&k_block));
    let sigma_q = sigma_q_inv
        .invert()
        .map_err(|e| Error::InvalidState(format!("sigma_Q not invertible: {e}")))?;
    let half = ComplexMatrix::identity(2 * m).scaled(Complex64::new(0.5, 0.0));
    let sigma = sigma_q.sub(&half);
    let det = sigma_q.determinant()?;
    if !(det.re > 0.0) || det.im.abs() > 1e-9 * det.re {
        return Err(Error::InvalidState(format!("det(sigma_Q) = {det} not positive")));
    }

    Ok(GaussianState {
        flavor,
        scale_c,
        modes: m,
        mode_params,
        unitary,
        scaled_kernel,
        sigma,
        sigma_q,
        det_sigma_q: det.re,
    })
}

/// Average number of points `E(N)` for a kernel spectrum under a flavor and
/// scale:
///
/// ```text
/// squeezed:  sum (c l_i)^2 / (1 - (c l_i)^2)
/// thermal:   sum c l_i / (1 - c l_i)
/// squashed:  sum c l_i / (1 - 2 c l_i)
/// ```
pub fn mean_points(lambdas: &[f64], flavor: InputFlavor, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidInput(format!("scale must be non-negative, got {c}")));
    }
    let lambdas = clipped_psd_spectrum(lambdas, flavor.name())?;
    let mut total = 0.0;
    for &l in &lambdas {
        let t = c * l;
        let term = match flavor {
            InputFlavor::Squeezed => {
                if t >= 1.0 {
                    return Err(Error::SpectralPrecondition(format!(
                        "squeezed mean needs c*lambda < 1, got {t}"
                    )));
                }
                t * t / (1.0 - t * t)
            }
            InputFlavor::Thermal => {
                if t >= 1.0 {
                    return Err(Error::SpectralPrecondition(format!(
                        "thermal mean needs c*lambda < 1, got {t}"
                    )));
                }
                t / (1.0 - t)
            }
            InputFlavor::Squashed => {
                if 2.0 * t >= 1.0 {
                    return Err(Error::SpectralPrecondition(format!(
                        "squashed mean needs 2c*lambda < 1, got {}",
                        2.0 * t
                    )));
                }
                t / (1.0 - 2.0 * t)
            }
        };
        total += term;
    }
    Ok(total)
}

/// Solves `mean_points(lambdas, flavor, c) == target` for the scale `c`.
pub fn solve_scale(lambdas: &[f64], flavor: InputFlavor, target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidInput(format!("target mean must be positive, got {target}")));
    }
    let lmax = lambdas.iter().cloned().fold(0.0_f64, f64::max);
    if lmax <= 0.0 {
        return Err(Error::InvalidInput("kernel spectrum has no positive eigenvalue".into()));
    }
    let hi = match flavor {
        InputFlavor::Squeezed | InputFlavor::Thermal => 1.0 / lmax,
        InputFlavor::Squashed => 0.5 / lmax,
    };
    bisect_monotone(
        |c| mean_points(lambdas, flavor, c).unwrap_or(f64::INFINITY),
        target,
        0.0,
        hi,
        SCALE_TOL,
    )
}

/// Expected number of clicks of a thermal-encoded kernel under threshold
/// detection.
///
/// Tracing a thermal Gaussian state down to one mode leaves a thermal mode
/// with occupation `nbar_i = sum_k U_ik^2 nbar_k`, so each mode clicks with
/// probability `nbar_i / (1 + nbar_i)` and the means add.
pub fn thermal_mean_clicks(spectrum: &Spectrum, c: f64) -> Result<f64> {
    let clipped = clipped_psd_spectrum(&spectrum.values, "thermal")?;
    let nbar = classical_params(&clipped, InputFlavor::Thermal, c)?;
    let m = clipped.len();
    let mut total = 0.0;
    for i in 0..m {
        let reduced: f64 =
            (0..m).map(|k| spectrum.vectors.get(i, k).powi(2) * nbar[k]).sum();
        total += reduced / (1.0 + reduced);
    }
    Ok(total)
}

/// Solves `thermal_mean_clicks(spectrum, c) == target` for the scale `c`.
///
/// The click mean saturates strictly below the mode count, so the target
/// must stay below it.
pub fn solve_thermal_click_scale(spectrum: &Spectrum, target: f64) -> Result<f64> {
    if !(target > 0.0) || target >= spectrum.values.len() as f64 {
        return Err(Error::InvalidInput(format!(
            "click target must lie in (0, {}), got {target}",
            spectrum.values.len()
        )));
    }
    let lmax = spectrum.values.iter().cloned().fold(0.0_f64, f64::max);
    if lmax <= 0.0 {
        return Err(Error::InvalidInput("kernel spectrum has no positive eigenvalue".into()));
    }
    bisect_monotone(
        |c| thermal_mean_clicks(spectrum, c).unwrap_or(f64::INFINITY),
        target,
        0.0,
        1.0 / lmax,
        SCALE_TOL,
    )
}

/// Recovers the block kernel `X (I - sigma_Q^{-1})` from a state.
///
/// Round-trips the encoding and doubles as the Torontonian input via
/// `O = X K`.
pub fn recover_kernel(state: &GaussianState) -> Result<ComplexMatrix> {
    let inv = state.sigma_q().invert()?;
    let n = inv.rows();
    let diff = ComplexMatrix::identity(n).sub(&inv);
    Ok(swap_row_blocks(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel1(v: f64) -> RealSymMatrix {
        let mut k = RealSymMatrix::zeros(1);
        k.set_sym(0, 0, v);
        k
    }

    #[test]
    fn thermal_single_mode() {
        let state = encode(&kernel1(1.0), InputFlavor::Thermal, 0.5).unwrap();
        assert!((state.mode_params()[0] - 1.0).abs() < 1e-12, "nbar");
        assert!((state.sigma_q().get(0, 0).re - 2.0).abs() < 1e-9);
        assert!((state.sigma_q().get(1, 1).re - 2.0).abs() < 1e-9);
        assert!(state.sigma_q().get(0, 1).norm() < 1e-12);
        assert!((state.det_sigma_q() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn squeezed_single_mode() {
        let state = encode(&kernel1(1.0), InputFlavor::Squeezed, 0.5).unwrap();
        assert!((state.mode_params()[0] - 0.5).abs() < 1e-12, "tanh r");
        let sqrt_det = state.det_sigma_q().sqrt();
        let cosh = 1.0 / (1.0 - 0.25_f64).sqrt();
        assert!((sqrt_det - cosh).abs() < 1e-9, "sqrt det {sqrt_det}");
        assert!((sqrt_det - 1.15470).abs() < 1e-4);
    }

    #[test]
    fn zero_scale_limit_is_vacuum() {
        let k = RealSymMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.3 });
        let state = encode(&k, InputFlavor::Thermal, 1e-12).unwrap();
        // vacuum: sigma_Q = I (so Sigma = I/2), kernel block 0, P(vacuum) = 1
        let defect = state.sigma_q().max_abs_diff(&ComplexMatrix::identity(6));
        assert!(defect < 1e-9, "sigma_Q defect {defect}");
        assert!(recover_kernel(&state).unwrap().max_abs() < 1e-9);
        assert!((state.vacuum_probability() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_precondition_errors_name_value() {
        let e = encode(&kernel1(1.0), InputFlavor::Thermal, 1.5);
        assert!(matches!(e, Err(Error::SpectralPrecondition(_))));
        let e = encode(&kernel1(1.0), InputFlavor::Squashed, 0.5);
        assert!(matches!(e, Err(Error::SpectralPrecondition(_))));
        let e = encode(&kernel1(-1.0), InputFlavor::Thermal, 0.1);
        assert!(matches!(e, Err(Error::SpectralPrecondition(_))));
    }

    #[test]
    fn mean_points_examples() {
        let en = mean_points(&[1.0], InputFlavor::Squeezed, 1.0 / 2.0_f64.sqrt()).unwrap();
        assert!((en - 1.0).abs() < 1e-12);
        let en = mean_points(&[0.5], InputFlavor::Thermal, 1.0).unwrap();
        assert!((en - 1.0).abs() < 1e-12);
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            assert_eq!(mean_points(&[0.4, 0.2], flavor, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn squashed_mean_matches_state_mean() {
        // cross-route check: spectrum formula vs per-mode parameters
        let k = RealSymMatrix::from_fn(2, |i, j| if i == j { 0.8 } else { 0.2 });
        let spec = sym_eig(&k).unwrap();
        let c = 0.3;
        let by_formula = mean_points(&spec.values, InputFlavor::Squashed, c).unwrap();
        let state = encode(&k, InputFlavor::Squashed, c).unwrap();
        assert!((by_formula - state.mean_photons()).abs() < 1e-12);
    }

    #[test]
    fn solve_scale_examples() {
        let c = solve_scale(&[0.5, 0.5], InputFlavor::Squeezed, 2.0).unwrap();
        assert!((c - 2.0_f64.sqrt()).abs() < 1e-6, "c = {c}");
        let c = solve_scale(&[1.0], InputFlavor::Thermal, 1.0).unwrap();
        assert!((c - 0.5).abs() < 1e-6);
        let c = solve_scale(&[1.0], InputFlavor::Thermal, 1e-6).unwrap();
        assert!(c < 1e-5 && c > 0.0);
        assert!(solve_scale(&[0.0, 0.0], InputFlavor::Thermal, 1.0).is_err());
    }

    #[test]
    fn solve_scale_forward_checks() {
        let lambdas = [0.9, 0.4, 0.1];
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            for target in [0.5, 2.0, 7.5] {
                let c = solve_scale(&lambdas, flavor, target).unwrap();
                let back = mean_points(&lambdas, flavor, c).unwrap();
                assert!((back - target).abs() <= 1e-9, "{flavor} {target} -> {back}");
            }
        }
    }

    #[test]
    fn recover_kernel_round_trips() {
        let k = RealSymMatrix::from_fn(3, |i, j| {
            if i == j {
                1.0
            } else {
                0.25 / (1.0 + (i as f64 - j as f64).abs())
            }
        });
        let c = 0.4;
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            let state = encode(&k, flavor, c).unwrap();
            let rec = recover_kernel(&state).unwrap();
            let expect = block_kernel(flavor, &k.scaled(c));
            let defect = rec.max_abs_diff(&expect);
            assert!(defect < 1e-9, "{flavor}: defect {defect}");
        }
    }

    #[test]
    fn recover_kernel_vacuum_is_zero() {
        let state = encode(&kernel1(1.0), InputFlavor::Thermal, 1e-14).unwrap();
        assert!(recover_kernel(&state).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn recover_kernel_squeezed_diag_block() {
        let state = encode(&kernel1(1.0), InputFlavor::Squeezed, 0.5).unwrap();
        let rec = recover_kernel(&state).unwrap();
        assert!((rec.get(0, 0).re - 0.5).abs() < 1e-9);
        assert!((rec.get(1, 1).re - 0.5).abs() < 1e-9);
        assert!(rec.get(0, 1).norm() < 1e-9);
    }

    #[test]
    fn uncertainty_defect_non_negative() {
        let k = RealSymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { -0.6 });
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            // thermal/squashed need PSD; shift the kernel for those
            let kk = if flavor == InputFlavor::Squeezed {
                k.clone()
            } else {
                RealSymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.6 })
            };
            let state = encode(&kk, flavor, 0.3).unwrap();
            let defect = state.uncertainty_defect().unwrap();
            assert!(defect >= -1e-9, "{flavor}: defect {defect}");
        }
    }

    #[test]
    fn mean_points_monotone_in_scale() {
        let lambdas = [0.7, 0.3];
        for flavor in [InputFlavor::Squeezed, InputFlavor::Thermal, InputFlavor::Squashed] {
            let hi = match flavor {
                InputFlavor::Squashed => 0.5 / 0.7,
                _ => 1.0 / 0.7,
            };
            let mut prev = 0.0;
            for step in 1..40 {
                let c = hi * (step as f64) / 41.0;
                let v = mean_points(&lambdas, flavor, c).unwrap();
                assert!(v > prev, "{flavor} not increasing at c={c}");
                prev = v;
            }
        }
    }
}
