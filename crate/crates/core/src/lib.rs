//! Finite-scale computations for vector-valued measures and tensor product
//! measures on Hilbert spaces.
//!
//! The crate is organised by subject:
//!
//! - [`finite_algebra`]: atomic Boolean algebras, set partitions, rectangles.
//! - [`vector_measures`]: complex and vector measures, variation,
//!   semi-variation, control measures and squeezing witnesses.
//! - [`tensor_norms`]: cross norms on `C^m ⊗ C^n` and p-summing norms.
//! - [`hs_extension`]: orthogonal-measure constructions realising the
//!   Hilbert-Schmidt norm, the divergence witness for non-Hilbert-Schmidt
//!   operators and the spectral product-measure demo.
//! - [`khintchine`]: Rademacher functions and Khintchine constants.
//! - [`half_average`]: the half average subset selection and the sphere
//!   constants `C_d`.
//!
//! Every solver is deterministic given its seed.

pub mod config;
pub mod error;
pub mod finite_algebra;
pub mod half_average;
pub mod hs_extension;
pub mod khintchine;
pub mod linalg;
pub mod tensor_norms;
pub mod vector_measures;

pub use config::OptConfig;
pub use error::{Error, Result};
pub use finite_algebra::{AtomSet, FiniteAlgebra, ProductAlgebra};
pub use linalg::{CVector, OpMatrix, C64};
