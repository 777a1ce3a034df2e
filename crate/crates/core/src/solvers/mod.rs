//! Solution paths of the stochastic heat and wave equations, and the
//! deterministic second-moment equations they satisfy when `sigma` is linear.

mod field;
mod heat;
mod initial;
mod picard;
mod sigma;
mod volterra;
mod wave;
mod wave_energy;

pub use field::Field;
pub use heat::{heat_em_path_max, solve_heat_em, HeatProblem};
pub use initial::InitialData;
pub use picard::{solve_heat_picard, Path, PicardResult, PicardScheme};
pub use sigma::{sigma_constants, SigmaSpec};
pub use volterra::{
    moment_slope, solve_heat_moment_volterra, MomentProblem, MomentSolution, VolterraKernel,
    DEFAULT_SPACE_CELLS, DEFAULT_TIME_STEPS,
};
pub use wave::{solve_wave_em, wave_em_path_max, Velocity, WaveProblem};
pub use wave_energy::{default_wave_steps, solve_wave_energy_volterra, wave_energy_path, WaveEnergy};

use crate::error::Result;
use crate::noise::GridSpec;

/// Time-step indices of the requested snapshot times.
pub(crate) fn snapshot_steps(spec: &GridSpec, times: &[f64]) -> Result<Vec<usize>> {
    times.iter().map(|&t| spec.step_of(t)).collect()
}
