//! Optimal treatment assignment for randomized experiments whose outcomes
//! are correlated through a network.
//!
//! The crate is organized bottom-up:
//!
//! - [`netgen`]: networks, the self-loop-augmented adjacency algebra, and
//!   random graph generators.
//! - [`models`]: the natural-exponential-family outcome models (Normal-Normal
//!   and Poisson-Gamma), the hyper-prior, and outcome sampling.
//! - [`risk`]: contrast weights, closed-form MSE of the difference-in-means
//!   estimator, its decomposition, and integrated MSE.
//! - [`design`]: assignment strategies (annealing search, balanced and
//!   spectral-stratified baselines, brute force, point-prior procedure).
//! - [`simharness`]: seeded comparative studies, ANOVA, and reports.

pub mod design;
pub mod error;
pub mod models;
pub mod netgen;
pub mod risk;
pub mod seeds;
pub mod simharness;

pub use error::{Error, Result};
