//! Numerics for the fractional stochastic heat equation driven by Lévy
//! space-time white noise: stable heat kernels, Lévy measure conditions, tail
//! functionals, Poisson simulation of the mild solution, and integral tests.

pub mod config;
pub mod error;
pub mod growth;
pub mod kernel;
pub mod levy;
pub mod quad;
pub mod sim;
pub mod special;
pub mod tails;

pub use error::{Error, Result};
