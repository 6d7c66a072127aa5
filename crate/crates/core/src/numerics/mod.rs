//! Dense real/complex matrix primitives and scalar root finding.
//!
//! Everything here is pure and allocation-based: operations take inputs by
//! reference and return fresh matrices. No shared mutable state.

mod complex;
mod eigen;
mod real;
mod root;

pub use complex::ComplexMatrix;
pub use eigen::{sym_eig, takagi_real, Spectrum};
pub use real::{RealMatrix, RealSymMatrix};
pub use root::bisect_monotone;

pub(crate) mod special;
