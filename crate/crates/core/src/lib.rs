//! Simulation and moment analysis for the stochastic heat and wave
//! equations driven by space-time white noise.

pub mod analysis;
pub mod error;
pub mod kernels;
pub mod noise;
pub mod quad;
pub mod solvers;
pub mod space;
pub mod verification;

pub use error::{Error, Result};
