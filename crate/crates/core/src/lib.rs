//! Point processes driven by Gaussian states.
//!
//! This crate implements the matrix point processes that arise from
//! photon-counting and threshold measurements of Gaussian states — hafnian,
//! Torontonian and permanental point processes — next to determinantal and
//! Poisson baselines, together with the machinery around them:
//!
//! * [`numerics`] — dense real/complex matrix primitives, a Jacobi
//!   eigensolver, the Takagi factorization and scalar root finding;
//! * [`matrixfn`] — exact hafnian, permanent and Torontonian evaluators and
//!   the outcome-to-submatrix reduction;
//! * [`encoding`] — embedding of kernel matrices into Gaussian states for
//!   squeezed, thermal and squashed inputs, with mean-point control;
//! * [`kernels`] — state spaces and kernel builders (RBF, density-rescaled,
//!   stock-correlation) plus CSV ingestion;
//! * [`samplers`] — exact samplers and probability evaluators for TPP, HPP,
//!   the quantum-inspired `O(m^2)` permanental sampler, DPP and PPP;
//! * [`stats`] — nearest-neighbour distances, Voronoi cell areas, marks,
//!   histograms and significance tests;
//! * [`apps`] — the two application pipelines: point-process-assisted
//!   k-means++ seeding and correlated-stock subset selection.
//!
//! Everything that samples takes an explicit [`rng::RngStream`]; identical
//! `(seed, stream)` pairs reproduce identical output on every platform.

pub mod apps;
pub mod encoding;
pub mod error;
pub mod kernels;
pub mod matrixfn;
pub mod numerics;
pub mod rng;
pub mod samplers;
pub mod stats;

pub use error::{Error, Result};
