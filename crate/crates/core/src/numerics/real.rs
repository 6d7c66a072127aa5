use crate::error::{Error, Result};

/// Tolerance below which a nearly-symmetric input is accepted and averaged
/// with its transpose.
pub(crate) const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix, full row-major storage.
///
/// The symmetry invariant is maintained by construction: every mutator writes
/// both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on `i <= j` and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Accepts a square array that is symmetric to [`SYMMETRY_TOL`] relative
    /// to its largest entry; the stored matrix is the symmetric average.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged rows for symmetric matrix".into()));
        }
        let scale = rows
            .iter()
            .flat_map(|r| r.iter().map(|v| v.abs()))
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut defect = 0.0_f64;
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                defect = defect.max((rows[i][j] - rows[j][i]).abs());
                let v = 0.5 * (rows[i][j] + rows[j][i]);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric { defect, tol: SYMMETRY_TOL * scale });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.data
    }
}

/// Dense real rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Column `j` as a fresh vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_symmetrizes_small_defects() {
        let m = RealSymMatrix::from_rows(&[vec![1.0, 2.0 + 1e-13], vec![2.0, 3.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn from_rows_rejects_asymmetric() {
        let e = RealSymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 3.0]]);
        assert!(matches!(e, Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn set_sym_keeps_invariant() {
        let mut m = RealSymMatrix::zeros(3);
        m.set_sym(0, 2, 4.5);
        assert_eq!(m.get(2, 0), 4.5);
    }
}
