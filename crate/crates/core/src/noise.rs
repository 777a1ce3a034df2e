//! Discretized space-time white noise.
//!
//! A [`NoiseGrid`] holds the white-noise integral over every cell of a
//! rectangular space-time grid: entry `(n, i)` is the noise mass of
//! `[t_n, t_{n+1}] x [x_i, x_{i+1}]`, an independent `Normal(0, dt * dx)`
//! variable. Solvers divide by the cell size themselves, so one grid drives
//! the heat and the wave schemes alike.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{config, Result};

/// A uniform space-time grid: `nx` cells over a spatial interval of length
/// `length` starting at `origin`, and `nt` steps over `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    origin: f64,
    length: f64,
    horizon: f64,
    nx: usize,
    nt: usize,
}

impl GridSpec {
    /// Grid over `[0, length] x [0, horizon]`.
    pub fn new(length: f64, horizon: f64, nx: usize, nt: usize) -> Result<Self> {
        Self::with_origin(0.0, length, horizon, nx, nt)
    }

    /// Grid over `[-half_width, half_width] x [0, horizon]`.
    pub fn centered(half_width: f64, horizon: f64, nx: usize, nt: usize) -> Result<Self> {
        Self::with_origin(-half_width, 2.0 * half_width, horizon, nx, nt)
    }

    pub fn with_origin(
        origin: f64,
        length: f64,
        horizon: f64,
        nx: usize,
        nt: usize,
    ) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return config(format!("domain length must be positive, got {length}"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return config(format!("time horizon must be positive, got {horizon}"));
        }
        if !origin.is_finite() {
            return config("grid origin must be finite");
        }
        if nx < 2 {
            return config(format!("need at least 2 spatial cells, got nx={nx}"));
        }
        if nt < 1 {
            return config(format!("need at least 1 time step, got nt={nt}"));
        }
        Ok(Self {
            origin,
            length,
            horizon,
            nx,
            nt,
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    /// Position of grid node `i` (`0..=nx`).
    pub fn node(&self, i: usize) -> f64 {
        if i == self.nx {
            self.origin + self.length
        } else {
            self.origin + i as f64 * self.dx()
        }
    }

    /// Time of step `n` (`0..=nt`).
    pub fn time(&self, n: usize) -> f64 {
        if n == self.nt {
            self.horizon
        } else {
            n as f64 * self.dt()
        }
    }

    /// Step index whose time matches `t` to within a millionth of a step.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt();
        let n = x.round();
        if !(0.0..=self.nt as f64).contains(&n) || (x - n).abs() > 1e-6 {
            return config(format!(
                "time {t} is not on the grid (dt={}, horizon={})",
                self.dt(),
                self.horizon
            ));
        }
        Ok(n as usize)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.nt
    }
}

/// White-noise cell integrals for one replicate.
#[derive(Debug, Clone)]
pub struct NoiseGrid {
    spec: GridSpec,
    seed: u64,
    replicate: u64,
    increments: Vec<f64>,
}

impl NoiseGrid {
    /// Noise identically zero; drives the deterministic (noise-free) runs.
    pub fn quiet(spec: GridSpec) -> Self {
        Self {
            spec,
            seed: 0,
            replicate: 0,
            increments: vec![0.0; spec.cell_count()],
        }
    }

    /// Wraps precomputed increments (row-major, `nt` rows of `nx`).
    pub fn from_increments(spec: GridSpec, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != spec.cell_count() {
            return config(format!(
                "expected {} increments, got {}",
                spec.cell_count(),
                increments.len()
            ));
        }
        Ok(Self {
            spec,
            seed: 0,
            replicate: 0,
            increments,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Row of `nx` increments for time step `n`.
    pub fn row(&self, n: usize) -> &[f64] {
        let nx = self.spec.nx;
        &self.increments[n * nx..(n + 1) * nx]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.increments[n * self.spec.nx + i]
    }
}

/// Draws the noise for `(seed, replicate)`.
///
/// Each replicate reads its own ChaCha8 stream (key from `seed`, stream id
/// `replicate`), so replicates can be generated in any order, on any
/// thread, and come out bit-identical.
pub fn sample_noise(spec: GridSpec, seed: u64, replicate: u64) -> NoiseGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let scale = (spec.dt() * spec.dx()).sqrt();
    let increments = (0..spec.cell_count())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    NoiseGrid {
        spec,
        seed,
        replicate,
        increments,
    }
}

/// Total noise mass of the grid; `Normal(0, length * horizon)` for sampled
/// grids.
pub fn noise_mass(grid: &NoiseGrid) -> f64 {
    grid.increments.iter().sum()
}
