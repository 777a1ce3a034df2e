use crate::error::{config, domain, Result};
use crate::kernels::{Boundary, KernelParams};
use crate::noise::{GridSpec, NoiseGrid};
use crate::space::SpaceGrid;

use super::{snapshot_steps, Field, InitialData, SigmaSpec};

/// Heat equation `du = D u'' dt + lambda sigma(u) dW` on `[0, L]`.
///
/// Dirichlet problems live on the `nx + 1` grid nodes with both end values
/// pinned at zero. Neumann problems live on the `nx` cell centres with
/// mirrored ghost values, so the zero-flux condition holds at the walls.
#[derive(Debug, Clone)]
pub struct HeatProblem {
    pub spec: GridSpec,
    pub boundary: Boundary,
    pub sigma: SigmaSpec,
    pub u0: InitialData,
    pub diffusion: f64,
}

impl HeatProblem {
    pub fn new(
        spec: GridSpec,
        boundary: Boundary,
        sigma: SigmaSpec,
        u0: InitialData,
        diffusion: f64,
    ) -> Result<Self> {
        if spec.origin() != 0.0 {
            return config("heat problems are posed on [0, L]");
        }
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return config(format!("diffusion must be positive, got {diffusion}"));
        }
        Ok(Self {
            spec,
            boundary,
            sigma,
            u0,
            diffusion,
        })
    }

    pub fn length(&self) -> f64 {
        self.spec.length()
    }

    pub fn space_grid(&self) -> SpaceGrid {
        let (l, nx) = (self.spec.length(), self.spec.nx());
        match self.boundary {
            Boundary::Dirichlet => SpaceGrid::nodes(l, nx),
            Boundary::Neumann => SpaceGrid::cell_centers(l, nx),
        }
        .expect("grid spec already validated")
    }

    /// Kernel of the unit-diffusion Laplacian; evaluate it at `diffusion * t`.
    pub fn kernel(&self) -> KernelParams {
        KernelParams::new(self.spec.length(), self.boundary).expect("length already validated")
    }

    /// Explicit-scheme stability ratio `D dt / dx^2`; must not exceed 1/2.
    pub fn mesh_ratio(&self) -> f64 {
        self.diffusion * self.spec.dt() / self.spec.dx().powi(2)
    }

    pub fn check_stability(&self) -> Result<()> {
        let r = self.mesh_ratio();
        if r > 0.5 * (1.0 + 1e-12) {
            return config(format!(
                "explicit scheme unstable: D*dt/dx^2 = {r:.6} exceeds 1/2 (dt={}, dx={})",
                self.spec.dt(),
                self.spec.dx()
            ));
        }
        Ok(())
    }

    /// Smallest `nt` with `D dt / dx^2 <= ratio`.
    pub fn steps_for_ratio(length: f64, horizon: f64, nx: usize, diffusion: f64, ratio: f64) -> usize {
        let dx = length / nx as f64;
        let dt_max = ratio * dx * dx / diffusion;
        ((horizon / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

/// Noise column feeding grid point `i`, or `None` for a pinned wall node.
#[inline]
pub(crate) fn noise_column(boundary: Boundary, nx: usize, i: usize) -> Option<usize> {
    match boundary {
        Boundary::Dirichlet => (i > 0 && i < nx).then_some(i),
        Boundary::Neumann => Some(i),
    }
}

/// Euler–Maruyama finite-difference scheme. Returns the solution at each
/// requested time (which must lie on the time grid), in the given order.
pub fn solve_heat_em(
    problem: &HeatProblem,
    lambda: f64,
    noise: &NoiseGrid,
    times: &[f64],
) -> Result<Vec<Field>> {
    let spec = problem.spec;
    let steps = snapshot_steps(&spec, times)?;
    let grid = problem.space_grid();
    let last = steps.iter().copied().max().unwrap_or(0);
    let mut out: Vec<Option<Field>> = vec![None; steps.len()];
    run_heat_em(problem, lambda, noise, last, |n, u| {
        for (slot, &s) in out.iter_mut().zip(&steps) {
            if s == n {
                *slot = Some(Field {
                    t: spec.time(n),
                    grid: grid.clone(),
                    values: u.to_vec(),
                });
            }
        }
    })?;
    Ok(out.into_iter().map(|f| f.expect("every step recorded")).collect())
}

/// Largest value taken by the Euler–Maruyama solution over the whole
/// space-time grid.
pub fn heat_em_path_max(problem: &HeatProblem, lambda: f64, noise: &NoiseGrid) -> Result<f64> {
    let mut top = f64::NEG_INFINITY;
    run_heat_em(problem, lambda, noise, problem.spec.nt(), |_, u| {
        top = u.iter().copied().fold(top, f64::max);
    })?;
    Ok(top)
}

fn run_heat_em<F: FnMut(usize, &[f64])>(
    problem: &HeatProblem,
    lambda: f64,
    noise: &NoiseGrid,
    last: usize,
    mut observe: F,
) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    let spec = problem.spec;
    if *noise.spec() != spec {
        return config("noise grid does not match the problem grid");
    }
    problem.check_stability()?;
    let grid = problem.space_grid();
    let (nx, dx) = (spec.nx(), spec.dx());
    let r = problem.mesh_ratio();
    let gain = lambda / dx;

    let mut u = problem.u0.sample(&grid);
    if problem.boundary == Boundary::Dirichlet {
        u[0] = 0.0;
        u[nx] = 0.0;
    }
    observe(0, &u);
    let mut next = u.clone();
    let m = u.len();
    for n in 0..last {
        let row = noise.row(n);
        for i in 0..m {
            let Some(col) = noise_column(problem.boundary, nx, i) else {
                next[i] = 0.0;
                continue;
            };
            let left = if i == 0 { u[0] } else { u[i - 1] };
            let right = if i + 1 == m { u[m - 1] } else { u[i + 1] };
            let lap = left - 2.0 * u[i] + right;
            next[i] = u[i] + r * lap + gain * problem.sigma.eval(u[i]) * row[col];
        }
        std::mem::swap(&mut u, &mut next);
        if u.iter().any(|v| !v.is_finite()) {
            return domain(format!("solution blew up at step {}", n + 1));
        }
        observe(n + 1, &u);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_noise;
    use std::f64::consts::PI;

    fn pam(nx: usize, nt: usize, horizon: f64) -> HeatProblem {
        HeatProblem::new(
            GridSpec::new(1.0, horizon, nx, nt).unwrap(),
            Boundary::Dirichlet,
            SigmaSpec::linear(1.0).unwrap(),
            InitialData::Sine,
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_decay_matches_exact() {
        let p = pam(200, 10_000, 0.1);
        let noise = NoiseGrid::quiet(p.spec);
        let f = solve_heat_em(&p, 0.0, &noise, &[0.1]).unwrap();
        let decay = (-PI * PI * 0.1 / 2.0).exp();
        let err = f[0]
            .points()
            .iter()
            .zip(&f[0].values)
            .map(|(x, v)| (v - (PI * x).sin() * decay).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let spec = GridSpec::new(1.0, 0.1, 20, 200).unwrap();
        for b in [Boundary::Dirichlet, Boundary::Neumann] {
            let p = HeatProblem::new(
                spec,
                b,
                SigmaSpec::linear(1.0).unwrap(),
                InitialData::constant(0.0).unwrap(),
                1.0,
            )
            .unwrap();
            let noise = sample_noise(spec, 3, 0);
            let f = solve_heat_em(&p, 2.0, &noise, &[0.05, 0.1]).unwrap();
            assert!(f.iter().all(|f| f.values.iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn neumann_keeps_constants() {
        let spec = GridSpec::new(1.0, 0.2, 16, 200).unwrap();
        let p = HeatProblem::new(
            spec,
            Boundary::Neumann,
            SigmaSpec::linear(1.0).unwrap(),
            InitialData::constant(1.5).unwrap(),
            1.0,
        )
        .unwrap();
        let f = solve_heat_em(&p, 0.0, &NoiseGrid::quiet(spec), &[0.2]).unwrap();
        assert!(f[0].values.iter().all(|&v| (v - 1.5).abs() < 1e-14));
        assert!((f[0].l2_norm_sq() - 2.25).abs() < 1e-13);
    }

    #[test]
    fn refuses_unstable_steps() {
        let p = pam(100, 100, 1.0);
        let err = solve_heat_em(&p, 0.0, &NoiseGrid::quiet(p.spec), &[1.0]).unwrap_err();
        assert!(err.to_string().contains("unstable"));
        let nt = HeatProblem::steps_for_ratio(1.0, 1.0, 100, 0.5, 0.5);
        assert!(pam(100, nt, 1.0).check_stability().is_ok());
        assert!(pam(100, nt - 1, 1.0).check_stability().is_err());
    }

    #[test]
    fn snapshots_follow_request_order() {
        let p = pam(20, 100, 0.1);
        let noise = sample_noise(p.spec, 1, 0);
        let f = solve_heat_em(&p, 1.0, &noise, &[0.1, 0.0, 0.05]).unwrap();
        assert_eq!(f[0].t, 0.1);
        assert_eq!(f[1].t, 0.0);
        assert_eq!(f[2].t, 0.05);
        assert!(solve_heat_em(&p, 1.0, &noise, &[0.0123]).is_err());
    }

    #[test]
    fn refinement_rate_is_second_order() {
        // lambda = 0 error against the exact decay, fixed mesh ratio
        let err = |nx: usize| {
            let nt = HeatProblem::steps_for_ratio(1.0, 0.1, nx, 0.5, 0.25);
            let p = pam(nx, nt, 0.1);
            let f = solve_heat_em(&p, 0.0, &NoiseGrid::quiet(p.spec), &[0.1]).unwrap();
            let decay = (-PI * PI * 0.1 / 2.0).exp();
            f[0].points()
                .iter()
                .zip(&f[0].values)
                .map(|(x, v)| (v - (PI * x).sin() * decay).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(20), err(40));
        assert!((e1 / e2).log2() >= 1.8, "{e1} {e2}");
    }
}
