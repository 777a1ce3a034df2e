use rayon::prelude::*;

use crate::error::{config, Error, Result};
use crate::noise::{sample_noise, GridSpec};
use crate::solvers::{
    heat_em_path_max, solve_heat_em, solve_heat_picard, solve_wave_em, wave_em_path_max, Field,
    HeatProblem, WaveProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mc,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Oracle => "oracle",
        }
    }
}

/// One estimate of `E_t(lambda) = sqrt(E ||u_t||^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    pub t: f64,
    pub lambda: f64,
    pub energy: f64,
    pub stderr: f64,
    pub method: Method,
    pub replicates: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyCurve {
    entries: Vec<EnergyPoint>,
}

impl EnergyCurve {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an oracle value (zero standard error).
    pub fn push_oracle(&mut self, t: f64, lambda: f64, energy: f64) {
        self.entries.push(EnergyPoint {
            t,
            lambda,
            energy,
            stderr: 0.0,
            method: Method::Oracle,
            replicates: 0,
        });
    }

    pub fn push(&mut self, point: EnergyPoint) {
        self.entries.push(point);
    }

    pub fn extend(&mut self, other: EnergyCurve) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[EnergyPoint] {
        &self.entries
    }

    /// Entries at time `t` (to a relative 1e-12).
    pub fn at_time(&self, t: f64) -> Vec<EnergyPoint> {
        self.entries
            .iter()
            .filter(|p| (p.t - t).abs() <= 1e-12 * t.abs().max(1.0))
            .copied()
            .collect()
    }

    /// Sorts into time-major, then lambda, order.
    pub fn sort(&mut self) {
        self.entries
            .sort_by(|a, b| a.t.total_cmp(&b.t).then(a.lambda.total_cmp(&b.lambda)));
    }
}

/// A solver configuration whose replicates differ only in their noise.
#[derive(Debug, Clone)]
pub enum SolverRun {
    HeatEm(HeatProblem),
    HeatPicard { problem: HeatProblem, iterations: usize },
    WaveEm(WaveProblem),
}

impl SolverRun {
    pub fn spec(&self) -> GridSpec {
        match self {
            SolverRun::HeatEm(p) | SolverRun::HeatPicard { problem: p, .. } => p.spec,
            SolverRun::WaveEm(p) => p.spec,
        }
    }

    /// Checks stability conditions without running anything.
    pub fn validate(&self) -> Result<()> {
        match self {
            SolverRun::HeatEm(p) | SolverRun::HeatPicard { problem: p, .. } => {
                p.check_stability()
            }
            SolverRun::WaveEm(p) => p.check_cfl(),
        }
    }

    /// Solution fields of one replicate at the requested times.
    pub fn fields(&self, lambda: f64, seed: u64, replicate: u64, times: &[f64]) -> Result<Vec<Field>> {
        let noise = sample_noise(self.spec(), seed, replicate);
        match self {
            SolverRun::HeatEm(p) => solve_heat_em(p, lambda, &noise, times),
            SolverRun::HeatPicard {
                problem,
                iterations,
            } => Ok(solve_heat_picard(problem, lambda, &noise, *iterations, times)?.fields),
            SolverRun::WaveEm(p) => solve_wave_em(p, lambda, &noise, times),
        }
    }

    /// Largest value over the whole space-time path of one replicate.
    pub fn path_max(&self, lambda: f64, seed: u64, replicate: u64) -> Result<f64> {
        let noise = sample_noise(self.spec(), seed, replicate);
        match self {
            SolverRun::HeatEm(p) => heat_em_path_max(p, lambda, &noise),
            SolverRun::HeatPicard {
                problem,
                iterations,
            } => {
                let all: Vec<f64> = (0..=problem.spec.nt()).map(|n| problem.spec.time(n)).collect();
                let r = solve_heat_picard(problem, lambda, &noise, *iterations, &all)?;
                Ok(r.fields.iter().map(Field::max).fold(f64::NEG_INFINITY, f64::max))
            }
            SolverRun::WaveEm(p) => wave_em_path_max(p, lambda, &noise),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub replicates: u64,
    pub seed: u64,
    /// Worker threads; 0 lets the thread pool decide.
    pub workers: usize,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `task` for replicates `0..count` on the pool and returns the results
/// in replicate order.
pub fn map_replicates<T, F>(count: u64, workers: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    pool(workers)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|r| {
                task(r).map_err(|e| Error::Replicate {
                    replicate: r,
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

/// Monte Carlo energy at each time in `times`. The per-replicate squared
/// norms are reduced in replicate order, so the result does not depend on
/// the worker count.
pub fn estimate_energy_mc(
    run: &SolverRun,
    times: &[f64],
    lambda: f64,
    settings: McSettings,
) -> Result<EnergyCurve> {
    if settings.replicates < 2 {
        return config("Monte Carlo needs at least 2 replicates");
    }
    run.validate()?;
    for &t in times {
        run.spec().step_of(t)?;
    }
    let norms = map_replicates(settings.replicates, settings.workers, |r| {
        let fields = run.fields(lambda, settings.seed, r, times)?;
        Ok(fields.iter().map(Field::l2_norm_sq).collect::<Vec<f64>>())
    })?;
    let count = settings.replicates as f64;
    let mut curve = EnergyCurve::new();
    for (k, &t) in times.iter().enumerate() {
        let mean = norms.iter().map(|v| v[k]).sum::<f64>() / count;
        let var = norms.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / (count - 1.0);
        let energy = mean.sqrt();
        let stderr = if mean > 0.0 {
            (var / count).sqrt() / (2.0 * energy)
        } else {
            0.0
        };
        curve.push(EnergyPoint {
            t,
            lambda,
            energy,
            stderr,
            method: Method::Mc,
            replicates: settings.replicates,
        });
    }
    Ok(curve)
}
