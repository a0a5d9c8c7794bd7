//! Pseudo-spectral periodic-box solvers for the Maxwell-Landau-Lifshitz
//! (MLL), MHD and Hall-MHD systems, together with the machinery needed to
//! check their energy and helicity budgets numerically: local balance-law
//! densities, mollifier commutators and their anomalous-dissipation fields,
//! and Besov-type difference-quotient regularity estimators.
//!
//! Everything lives on the torus `[0, L)^3` sampled on `n^3` points with
//! `n` a power of two. Derivatives are exact Fourier multipliers; the
//! forward DFT is unscaled and the inverse divides by `n^3`.

pub mod besov;
pub mod calculus;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod hmhd;
pub mod init;
pub mod mll;
pub mod mollify;
pub mod run;
pub mod series;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ScalarField, TensorField, VectorField};
pub use grid::Grid;
