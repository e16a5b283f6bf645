//! Exact computation of Eisenstein-series distributions on compact open
//! subsets of `M₂(A_f)` and of Manin symbol tables for `Γ₁(N)`.

pub mod arith;
pub mod bgtable;
pub mod bivariate;
pub mod cache;
pub mod cusp;
pub mod eisenstein;
pub mod error;
pub mod identities;
pub mod json;
pub mod mu;
pub mod opens;
pub mod qseries;

pub use arith::{Cyclotomic, Rational};
pub use error::{Error, Result};
