use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Finds `c` with `|f(c) - target| <= tol` for `f` strictly increasing on the
/// open interval `(lo, hi)`.
///
/// Endpoints are never evaluated, so `f` may diverge at `hi`. Non-finite
/// values returned by `f` are treated as overshoot. Errors if the target is
/// not attainable inside the bracket.
pub fn bisect_monotone(
    f: impl Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo < hi) || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "bad bracket or tolerance: lo={lo}, hi={hi}, tol={tol}"
        )));
    }
    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if (v - target).abs() <= tol {
            return Ok(mid);
        }
        if v.is_finite() && v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Unbracketed { target, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_function() {
        let c = bisect_monotone(|x| x, 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((c - 0.5).abs() < 1e-9);
    }

    #[test]
    fn square_root_of_two() {
        let c = bisect_monotone(|x| x * x, 2.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((c - 2.0_f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn pole_at_upper_end() {
        // diverges at hi = 1; still converges to f(c) = 10
        let c = bisect_monotone(|x| x / (1.0 - x), 10.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((c / (1.0 - c) - 10.0).abs() <= 1e-10);
    }

    #[test]
    fn unreachable_target_errors() {
        let e = bisect_monotone(|x| x, 5.0, 0.0, 1.0, 1e-12);
        assert!(matches!(e, Err(Error::Unbracketed { .. })));
    }
}
