use num_complex::Complex64;

use crate::error::{Error, Result};

use super::real::{RealMatrix, RealSymMatrix};

/// Condition-estimate threshold above which inversion is refused.
const COND_LIMIT: f64 = 1e14;

/// Dense complex rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_sym(a: &RealSymMatrix) -> Self {
        let n = a.dim();
        Self::from_fn(n, n, |i, j| Complex64::new(a.get(i, j), 0.0))
    }

    pub fn from_real(a: &RealMatrix) -> Self {
        Self::from_fn(a.rows(), a.cols(), |i, j| Complex64::new(a.get(i, j), 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// Submatrix picking `rows`/`cols` in order; indices may repeat.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    /// Largest entry of `self - other` in absolute value.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).norm()))
    }

    /// Hermitian part `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()))
    }

    /// Determinant by LU elimination with partial pivoting.
    ///
    /// The empty product convention gives `det(0x0) = 1`; an exactly singular
    /// matrix returns 0.
    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Complex64::ONE);
        }
        let mut a = self.data.clone();
        let mut det = Complex64::ONE;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm_sqr();
            for r in (k + 1)..n {
                let v = a[r * n + k].norm_sqr();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Ok(Complex64::ZERO);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pivot;
                if factor == Complex64::ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let v = a[k * n + j];
                    a[r * n + j] -= factor * v;
                }
                a[r * n + k] = Complex64::ZERO;
            }
        }
        Ok(det)
    }

    /// Determinant of a Hermitian positive-definite matrix via an LDL^dagger
    /// factorization.
    ///
    /// Returns `None` when a pivot fails to be positive, which for Hermitian
    /// input certifies that the matrix is not positive definite. The caller
    /// is responsible for Hermiticity.
    pub fn ldl_det_hermitian(&self) -> Option<f64> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Some(1.0);
        }
        let mut l = vec![Complex64::ZERO; n * n];
        let mut d = vec![0.0_f64; n];
        let mut det = 1.0;
        for j in 0..n {
            let mut dj = self.get(j, j).re;
            for k in 0..j {
                dj -= l[j * n + k].norm_sqr() * d[k];
            }
            if !(dj > 0.0) {
                return None;
            }
            d[j] = dj;
            det *= dj;
            for i in (j + 1)..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k].conj() * d[k];
                }
                l[i * n + j] = v / dj;
            }
        }
        Some(det)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Refuses matrices whose pivot-ratio condition estimate exceeds 1e14.
    pub fn invert(&self) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "inverse of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = ComplexMatrix::identity(n);
        let mut max_piv = 0.0_f64;
        let mut min_piv = f64::INFINITY;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for r in (k + 1)..n {
                let v = a[r * n + k].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular { cond: f64::INFINITY });
            }
            max_piv = max_piv.max(best);
            min_piv = min_piv.min(best);
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                    inv.data.swap(k * n + j, piv * n + j);
                }
            }
            let pivot = a[k * n + k];
            let pinv = pivot.inv();
            for j in 0..n {
                a[k * n + j] *= pinv;
                inv.data[k * n + j] *= pinv;
            }
            for r in 0..n {
                if r == k {
                    continue;
                }
                let factor = a[r * n + k];
                if factor == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    let v = a[k * n + j];
                    a[r * n + j] -= factor * v;
                    let w = inv.data[k * n + j];
                    inv.data[r * n + j] -= factor * w;
                }
            }
        }
        let cond = if min_piv > 0.0 { max_piv / min_piv } else { f64::INFINITY };
        if cond > COND_LIMIT {
            return Err(Error::Singular { cond });
        }
        Ok(inv)
    }
}
