//! Exact-arithmetic toolkit for Ehrhart theory of rational polytopes, plus the
//! dataset generation and small from-scratch ML models used by the
//! `ehrhart-lab` experiment runner.
//!
//! Everything geometric is computed over arbitrary-precision rationals: convex
//! hulls, lattice-point counts of dilations, quasi-polynomial fits, δ-vectors,
//! polar duals and Fano/weighted-projective constructions. Floating point only
//! enters at the ML boundary (feature matrices, PCA, SVC/SVR).

pub mod counting;
pub mod datagen;
pub mod ehrhart;
pub mod error;
pub mod geometry;
mod linalg;
pub mod ml;
pub mod toric;

pub use error::{Error, Result};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
