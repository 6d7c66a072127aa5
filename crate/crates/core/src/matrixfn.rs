//! Exact evaluators for the hafnian, permanent and Torontonian, plus the
//! row/column reduction that maps detection outcomes to kernel submatrices.
//!
//! All evaluators are exponential-time by nature and guarded by dimension
//! caps; the `_capped` variants let callers raise or lower the default.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Default dimension cap for [`hafnian`] (matrix side length).
pub const HAFNIAN_DIM_CAP: usize = 24;
/// Default dimension cap for [`permanent`].
pub const PERMANENT_DIM_CAP: usize = 20;
/// Default mode cap for [`torontonian`] (matrix side is twice this).
pub const TORONTONIAN_MODE_CAP: usize = 16;

/// Symmetry / Hermiticity tolerance relative to the largest entry.
const STRUCTURE_TOL: f64 = 1e-12;

/// Outcome-to-submatrix reduction.
///
/// Rows and columns with `pattern[i] == 0` are deleted; others are repeated
/// `pattern[i]` times. In `doubled` mode the input is `2m x 2m` and the index
/// pairs `(i, i+m)` are repeated together, preserving the two-block layout.
pub fn reduce(a: &ComplexMatrix, pattern: &[u32], doubled: bool) -> Result<ComplexMatrix> {
    let m = pattern.len();
    let expected = if doubled { 2 * m } else { m };
    if a.rows() != expected || a.cols() != expected {
        return Err(Error::DimensionMismatch(format!(
            "reduce: pattern of length {m} needs a {expected}x{expected} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let mut idx = Vec::new();
    for (i, &s) in pattern.iter().enumerate() {
        for _ in 0..s {
            idx.push(i);
        }
    }
    if doubled {
        let extra: Vec<usize> = idx.iter().map(|&i| i + m).collect();
        idx.extend(extra);
    }
    Ok(a.select(&idx, &idx))
}

fn symmetrize_checked(a: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    let mut out = a.clone();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((a.get(i, j) - a.get(j, i)).norm());
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    if defect > STRUCTURE_TOL * scale {
        return Err(Error::Asymmetric { defect, tol: STRUCTURE_TOL * scale });
    }
    let _ = what;
    Ok(out)
}

/// Hafnian of a symmetric matrix: the sum over all perfect matchings of
/// products of matched entries.
///
/// Conventions: `Haf` of the empty matrix is 1, and odd-dimension inputs
/// return 0 (no perfect matchings exist).
pub fn hafnian(a: &ComplexMatrix) -> Result<Complex64> {
    hafnian_capped(a, HAFNIAN_DIM_CAP)
}

/// [`hafnian`] with an explicit dimension cap.
///
/// Evaluation expands along the first remaining row and memoizes on the set
/// of surviving indices, giving `O(n 2^n)`-style cost in the worst case.
pub fn hafnian_capped(a: &ComplexMatrix, cap: usize) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "hafnian of {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Complex64::ONE);
    }
    if n % 2 == 1 {
        return Ok(Complex64::ZERO);
    }
    if n > cap {
        return Err(Error::CapExceeded { what: "hafnian", dim: n, cap });
    }
    let a = symmetrize_checked(a, "hafnian")?;
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut memo: HashMap<u64, Complex64> = HashMap::new();
    Ok(haf_mask(&a, full, &mut memo))
}

fn haf_mask(a: &ComplexMatrix, mask: u64, memo: &mut HashMap<u64, Complex64>) -> Complex64 {
    if mask == 0 {
        return Complex64::ONE;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let first = mask.trailing_zeros() as usize;
    let rest = mask & !(1u64 << first);
    let mut acc = Complex64::ZERO;
    let mut bits = rest;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let aij = a.get(first, j);
        if aij != Complex64::ZERO {
            acc += aij * haf_mask(a, rest & !(1u64 << j), memo);
        }
    }
    memo.insert(mask, acc);
    acc
}

/// Permanent via Ryser's inclusion-exclusion with Gray-code column updates,
/// `O(n 2^n)`.
pub fn permanent(a: &ComplexMatrix) -> Result<Complex64> {
    permanent_capped(a, PERMANENT_DIM_CAP)
}

/// [`permanent`] with an explicit dimension cap.
pub fn permanent_capped(a: &ComplexMatrix, cap: usize) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "permanent of {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Complex64::ONE);
    }
    if n > cap {
        return Err(Error::CapExceeded { what: "permanent", dim: n, cap });
    }
    let mut row_sums = vec![Complex64::ZERO; n];
    let mut total = Complex64::ZERO;
    let mut gray_prev: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ gray_prev).trailing_zeros() as usize;
        if gray & (1 << bit) != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += a.get(i, bit);
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= a.get(i, bit);
            }
        }
        gray_prev = gray;
        let product: Complex64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// Torontonian of a `2m x 2m` Hermitian matrix arising from a valid Gaussian
/// state:
///
/// ```text
/// Tor(O) = sum over Z subsets of {1..m} of (-1)^(m-|Z|) det(I - O_Z)^(-1/2)
/// ```
///
/// where `O_Z` keeps rows and columns `{i, i+m : i in Z}`. The sign is fixed
/// so that probabilities come out non-negative (single-mode thermal oracle).
pub fn torontonian(o: &ComplexMatrix) -> Result<f64> {
    torontonian_capped(o, TORONTONIAN_MODE_CAP)
}

/// [`torontonian`] with an explicit mode cap.
pub fn torontonian_capped(o: &ComplexMatrix, cap: usize) -> Result<f64> {
    if !o.is_square() || o.rows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "torontonian needs an even square matrix, got {}x{}",
            o.rows(),
            o.cols()
        )));
    }
    let m = o.rows() / 2;
    if m > cap {
        return Err(Error::CapExceeded { what: "torontonian", dim: m, cap });
    }
    let scale = o.max_abs().max(1.0);
    let herm_defect = o.max_abs_diff(&o.hermitian_part());
    if herm_defect > STRUCTURE_TOL * scale {
        return Err(Error::Asymmetric { defect: herm_defect, tol: STRUCTURE_TOL * scale });
    }
    let o = o.hermitian_part();

    // Kahan-compensated alternating sum so the result is independent of how a
    // caller might partition the subset range.
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut idx: Vec<usize> = Vec::with_capacity(2 * m);
    for z in 0u64..(1u64 << m) {
        idx.clear();
        for i in 0..m {
            if z & (1 << i) != 0 {
                idx.push(i);
            }
        }
        let k = idx.len();
        for i in 0..k {
            idx.push(idx[i] + m);
        }
        let oz = o.select(&idx, &idx);
        let Some(det) = ComplexMatrix::identity(2 * k).sub(&oz).ldl_det_hermitian() else {
            return Err(Error::InvalidState(format!(
                "I - O_Z not positive definite for Z = {:?}",
                &idx[..k]
            )));
        };
        let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign / det.sqrt();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}
