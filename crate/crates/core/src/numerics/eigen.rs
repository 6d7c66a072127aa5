use num_complex::Complex64;

use crate::error::{Error, Result};

use super::complex::ComplexMatrix;
use super::real::{RealMatrix, RealSymMatrix};

/// Off-diagonal Frobenius tolerance, relative to the input norm.
const JACOBI_TOL: f64 = 1e-12;
/// Sweep cap for the cyclic Jacobi iteration.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted descending; `vectors` holds the matching
/// orthonormal eigenvectors as columns, so `A = Q diag(values) Q^T`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Runs plane rotations in row-cyclic order until the off-diagonal Frobenius
/// norm drops below `1e-12` relative to the input norm, with a hard cap of
/// 100 sweeps.
pub fn sym_eig(a: &RealSymMatrix) -> Result<Spectrum> {
    let n = a.dim();
    let mut m: Vec<f64> = a.raw().to_vec();
    let mut q = RealMatrix::identity(n);

    let norm: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * norm.max(f64::MIN_POSITIVE);

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = m[i * n + j];
                s += 2.0 * v * v;
            }
        }
        s.sqrt()
    };

    let mut residual = off(&m);
    let mut sweeps = 0;
    while residual > tol {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps, residual });
        }
        for p in 0..n.saturating_sub(1) {
            for qi in (p + 1)..n {
                let apq = m[p * n + qi];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[qi * n + qi] - m[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // columns p, q of A
                for i in 0..n {
                    let aip = m[i * n + p];
                    let aiq = m[i * n + qi];
                    m[i * n + p] = c * aip - s * aiq;
                    m[i * n + qi] = s * aip + c * aiq;
                }
                // rows p, q of A
                for j in 0..n {
                    let apj = m[p * n + j];
                    let aqj = m[qi * n + j];
                    m[p * n + j] = c * apj - s * aqj;
                    m[qi * n + j] = s * apj + c * aqj;
                }
                // exact zero where the rotation annihilates
                m[p * n + qi] = 0.0;
                m[qi * n + p] = 0.0;
                // accumulate Q
                for i in 0..n {
                    let vip = q.get(i, p);
                    let viq = q.get(i, qi);
                    q.set(i, p, c * vip - s * viq);
                    q.set(i, qi, s * vip + c * viq);
                }
            }
        }
        sweeps += 1;
        residual = off(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = RealMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, col, q.get(i, src));
        }
    }
    Ok(Spectrum { values, vectors })
}

/// Takagi factorization `B = U diag(lambda) U^T` of a real symmetric matrix.
///
/// Built on [`sym_eig`]: `lambda = |d|` and the unitary picks up a factor of
/// `i` on columns with negative eigenvalues. Singular values are returned
/// descending with matching columns.
pub fn takagi_real(b: &RealSymMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let spec = sym_eig(b)?;
    let n = b.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        spec.values[j].abs().partial_cmp(&spec.values[i].abs()).unwrap()
    });
    let lambdas: Vec<f64> = order.iter().map(|&i| spec.values[i].abs()).collect();
    let mut u = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let phase = if spec.values[src] >= 0.0 {
            Complex64::ONE
        } else {
            Complex64::I
        };
        for i in 0..n {
            u.set(i, col, phase * spec.vectors.get(i, src));
        }
    }
    Ok((lambdas, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(spec: &Spectrum, n: usize) -> RealSymMatrix {
        RealSymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| spec.vectors.get(i, k) * spec.values[k] * spec.vectors.get(j, k))
                .sum()
        })
    }

    #[test]
    fn identity_spectrum() {
        let spec = sym_eig(&RealSymMatrix::identity(3)).unwrap();
        assert_eq!(spec.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_input() {
        let mut a = RealSymMatrix::zeros(2);
        a.set_sym(0, 0, 2.0);
        a.set_sym(1, 1, -3.0);
        let spec = sym_eig(&a).unwrap();
        assert_eq!(spec.values, vec![2.0, -3.0]);
        assert!(spec.vectors.get(0, 0).abs() > 0.999);
        assert!(spec.vectors.get(1, 1).abs() > 0.999);
    }

    #[test]
    fn off_diagonal_two_by_two() {
        let mut a = RealSymMatrix::zeros(2);
        a.set_sym(0, 1, 1.0);
        let spec = sym_eig(&a).unwrap();
        assert!((spec.values[0] - 1.0).abs() < 1e-12);
        assert!((spec.values[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut seed = 7_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1_u64 << 53) as f64) - 0.5
        };
        for n in [1_usize, 2, 5, 13, 50] {
            let a = RealSymMatrix::from_fn(n, |_, _| 2.0 * next());
            let spec = sym_eig(&a).unwrap();
            let rec = reconstruct(&spec, n);
            let scale = a.max_abs().max(1e-300);
            let mut defect = 0.0_f64;
            let mut ortho = 0.0_f64;
            for i in 0..n {
                for j in 0..n {
                    defect = defect.max((rec.get(i, j) - a.get(i, j)).abs());
                    let dot: f64 = (0..n)
                        .map(|k| spec.vectors.get(k, i) * spec.vectors.get(k, j))
                        .sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    ortho = ortho.max((dot - target).abs());
                }
            }
            assert!(defect <= 1e-10 * scale, "n={n} reconstruction defect {defect}");
            assert!(ortho <= 1e-10, "n={n} orthonormality defect {ortho}");
            let sorted = spec.values.windows(2).all(|w| w[0] >= w[1]);
            assert!(sorted);
        }
    }

    #[test]
    fn takagi_phase_fix() {
        let mut b = RealSymMatrix::zeros(2);
        b.set_sym(0, 0, 1.0);
        b.set_sym(1, 1, -1.0);
        let (lambdas, u) = takagi_real(&b).unwrap();
        assert_eq!(lambdas, vec![1.0, 1.0]);
        // U diag(lambda) U^T must reproduce diag(1, -1)
        let rec = reconstruct_takagi(&lambdas, &u);
        assert!((rec.get(0, 0) - Complex64::ONE).norm() < 1e-12);
        assert!((rec.get(1, 1) + Complex64::ONE).norm() < 1e-12);
        assert!(rec.get(0, 1).norm() < 1e-12);
    }

    fn reconstruct_takagi(lambdas: &[f64], u: &ComplexMatrix) -> ComplexMatrix {
        let n = lambdas.len();
        let mut d = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            d.set(i, i, Complex64::new(lambdas[i], 0.0));
        }
        u.matmul(&d).matmul(&u.transpose())
    }

    #[test]
    fn takagi_psd_is_real() {
        let mut b = RealSymMatrix::zeros(2);
        b.set_sym(0, 0, 2.0);
        b.set_sym(0, 1, 0.5);
        b.set_sym(1, 1, 1.0);
        let (lambdas, u) = takagi_real(&b).unwrap();
        assert!(lambdas.iter().all(|&l| l >= 0.0));
        for i in 0..2 {
            for j in 0..2 {
                assert!(u.get(i, j).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn takagi_random_round_trip() {
        let mut seed = 99_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1_u64 << 53) as f64) - 0.5
        };
        let b = RealSymMatrix::from_fn(4, |_, _| next());
        let (lambdas, u) = takagi_real(&b).unwrap();
        let rec = reconstruct_takagi(&lambdas, &u);
        let mut defect = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                defect = defect.max((rec.get(i, j) - Complex64::new(b.get(i, j), 0.0)).norm());
            }
        }
        assert!(defect < 1e-10, "defect {defect}");
        // unitarity
        let gram = u.adjoint().matmul(&u);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
        assert!(lambdas.windows(2).all(|w| w[0] >= w[1]));
    }
}
