//! Energy estimates, excitation-index fits and the closed-form bounds they
//! are checked against.

mod bounds;
mod convolution;
mod energy;
mod fit;
mod renewal;
mod sandwich;

pub use bounds::{
    bound_heat_dirichlet, bound_heat_neumann, bound_moment_apriori, bound_prop_energy, bound_wave,
    bound_wave_upper_closed, dirichlet_mode_lower, log_moment_apriori, moment_apriori_set,
    neumann_log_upper, wave_a2, BoundParams, BoundSet, NeumannData, RateBound, Theorem,
};
pub use convolution::{
    autocorrelation, convolution_bound, empirical_a1, h_function, window_integral,
    ConvolutionBoundResult,
};
pub use energy::{
    estimate_energy_mc, map_replicates, EnergyCurve, EnergyPoint, McSettings, Method, SolverRun,
};
pub use fit::{fit_excitation_index, fit_points, IndexFit, MIN_FIT_POINTS};
pub use renewal::{renewal_series_heat, renewal_series_wave, RenewalSum, WaveRenewal};
pub use sandwich::{
    Model, Sandwich, SandwichModel, SandwichSettings, Verdict, LOWER_SLACK, MC_SIGMAS,
};
