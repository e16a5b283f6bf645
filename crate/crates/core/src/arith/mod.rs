//! Exact coefficient arithmetic: rationals and cyclotomic fields.

pub mod cyclo;
pub mod linalg;
pub mod rational;

pub use cyclo::{euler_phi, Cyclotomic};
pub use rational::{bernoulli_numbers, binomial, factorial, Rational};
