use crate::error::{config, domain, Error, Result};
use crate::kernels::{semigroup_apply, Boundary, KernelParams};
use crate::quad::{adaptive, GaussLegendre};
use crate::space::SpaceGrid;

use super::{sigma_constants, InitialData, SigmaSpec};

pub const DEFAULT_SPACE_CELLS: usize = 32;
pub const DEFAULT_TIME_STEPS: usize = 200;

/// Second-moment equation of the heat problem with `|sigma(z)| = c |z|`:
///
/// `f_t(x) = (P_t u_0)(x)^2 + (lambda c)^2 int_0^t int_0^L p_{t-s}(x, y)^2 f_s(y) dy ds`.
#[derive(Debug, Clone)]
pub struct MomentProblem {
    pub length: f64,
    pub boundary: Boundary,
    pub diffusion: f64,
    pub u0: InitialData,
    pub horizon: f64,
    pub space_cells: usize,
    pub time_steps: usize,
}

impl MomentProblem {
    pub fn new(
        length: f64,
        boundary: Boundary,
        diffusion: f64,
        u0: InitialData,
        horizon: f64,
    ) -> Result<Self> {
        let p = Self {
            length,
            boundary,
            diffusion,
            u0,
            horizon,
            space_cells: DEFAULT_SPACE_CELLS,
            time_steps: DEFAULT_TIME_STEPS,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_resolution(mut self, space_cells: usize, time_steps: usize) -> Result<Self> {
        self.space_cells = space_cells;
        self.time_steps = time_steps;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return config(format!("domain length must be positive, got {}", self.length));
        }
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            return config(format!("diffusion must be positive, got {}", self.diffusion));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return config(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.space_cells < 2 || self.time_steps < 1 {
            return config("oracle grid needs at least 2 cells and 1 time step");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.time_steps as f64
    }
}

/// The lambda-independent part of the discretized moment equation.
///
/// Space: piecewise linear in `y` on a uniform node grid. Time: linear in
/// `s` on each step. On the last step the squared kernel concentrates at
/// `y = x` and the spatial integral is replaced by the identity
/// `int p_r(x, y)^2 dy = p_{2r}(x, x)`, with the `r^{-1/2}` singularity
/// integrated exactly after the substitution `r = u^2`.
#[derive(Debug, Clone)]
pub struct VolterraKernel {
    problem: MomentProblem,
    grid: SpaceGrid,
    free: Vec<Vec<f64>>,
    /// Weight of `f_n(x_i)` and of `f_{n-1}(x_i)` from the last step.
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// For lag `d >= 1`, the weights of `f_{n-d}` and `f_{n-d-1}`, row-major.
    newer: Vec<Vec<f64>>,
    older: Vec<Vec<f64>>,
}

impl VolterraKernel {
    pub fn new(problem: &MomentProblem) -> Result<Self> {
        problem.validate()?;
        let grid = SpaceGrid::nodes(problem.length, problem.space_cells)?;
        let params = KernelParams::new(problem.length, problem.boundary)?;
        let d = problem.diffusion;
        let k = problem.dt();
        let n = problem.time_steps;
        let m = grid.len();
        let points = grid.points();

        let u0 = problem.u0.sample(&grid);
        let mut free = Vec::with_capacity(n + 1);
        for step in 0..=n {
            let pt = semigroup_apply(&params, d * k * step as f64, &grid, &u0)?;
            free.push(pt.iter().map(|v| v * v).collect());
        }

        let mut alpha = vec![0.0; m];
        let mut beta = vec![0.0; m];
        for (i, &x) in points.iter().enumerate() {
            let diag = |u: f64, w: &dyn Fn(f64) -> f64| {
                if u == 0.0 {
                    return 0.0;
                }
                let r = u * u;
                2.0 * u * params.at(2.0 * d * r).map(|kt| kt.eval(x, x)).unwrap_or(0.0) * w(r)
            };
            let tol = 1e-14;
            alpha[i] = adaptive(&|u| diag(u, &|r| 1.0 - r / k), 0.0, k.sqrt(), tol);
            beta[i] = adaptive(&|u| diag(u, &|r| r / k), 0.0, k.sqrt(), tol);
        }

        let h = grid.h();
        let space_rule = GaussLegendre::new(5);
        let (fine_rule, coarse_rule) = (GaussLegendre::new(6), GaussLegendre::new(4));
        let mut newer = Vec::with_capacity(n.saturating_sub(1));
        let mut older = Vec::with_capacity(n.saturating_sub(1));
        let mut s_tau = vec![0.0; m * m];
        for lag in 1..n {
            let (lo, hi) = (lag as f64 * k, (lag + 1) as f64 * k);
            let spread = (d * lo).sqrt();
            let sub = ((h / (0.5 * spread)).ceil() as usize).max(1);
            let rule = if lag < 4 { &fine_rule } else { &coarse_rule };
            let mut a_mat = vec![0.0; m * m];
            let mut b_mat = vec![0.0; m * m];
            for (tau, wt) in rule.mapped(lo, hi) {
                squared_kernel_hats(&params, d * tau, &grid, &points, sub, &space_rule, &mut s_tau)?;
                let (wa, wb) = (wt * (hi - tau) / k, wt * (tau - lo) / k);
                for ((a, b), s) in a_mat.iter_mut().zip(b_mat.iter_mut()).zip(&s_tau) {
                    *a += wa * s;
                    *b += wb * s;
                }
            }
            newer.push(a_mat);
            older.push(b_mat);
        }
        Ok(Self {
            problem: problem.clone(),
            grid,
            free,
            alpha,
            beta,
            newer,
            older,
        })
    }

    pub fn problem(&self) -> &MomentProblem {
        &self.problem
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    /// Solves for `f` given the effective noise strength `lambda * c`.
    pub fn solve(&self, strength: f64) -> Result<MomentSolution> {
        if !(strength.is_finite() && strength >= 0.0) {
            return domain(format!("noise strength must be finite and >= 0, got {strength}"));
        }
        let c2 = strength * strength;
        let m = self.grid.len();
        let n = self.problem.time_steps;
        let mut f: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        f.push(self.free[0].clone());
        for step in 1..=n {
            let mut row = vec![0.0; m];
            for i in 0..m {
                let mut acc = self.beta[i] * f[step - 1][i];
                for lag in 1..step {
                    let r = i * m..(i + 1) * m;
                    let (a, b) = (&self.newer[lag - 1][r.clone()], &self.older[lag - 1][r]);
                    let (fa, fb) = (&f[step - lag], &f[step - lag - 1]);
                    acc += a.iter().zip(fa).map(|(w, v)| w * v).sum::<f64>()
                        + b.iter().zip(fb).map(|(w, v)| w * v).sum::<f64>();
                }
                let denom = 1.0 - c2 * self.alpha[i];
                if denom <= 0.0 {
                    return config(format!(
                        "oracle time step too coarse for lambda*c = {strength}; increase oracle.time_steps"
                    ));
                }
                row[i] = (self.free[step][i] + c2 * acc) / denom;
            }
            if row.iter().any(|v| !v.is_finite()) {
                return domain(format!("second moment overflowed at step {step}"));
            }
            f.push(row);
        }
        Ok(MomentSolution {
            grid: self.grid.clone(),
            dt: self.problem.dt(),
            values: f,
        })
    }
}

/// `S(i, j) = int p_tau(x_i, y)^2 hat_j(y) dy` by Gauss–Legendre on `sub`
/// panels per cell.
fn squared_kernel_hats(
    params: &KernelParams,
    tau: f64,
    grid: &SpaceGrid,
    points: &[f64],
    sub: usize,
    rule: &GaussLegendre,
    out: &mut [f64],
) -> Result<()> {
    let kt = params.at(tau)?;
    let m = points.len();
    let h = grid.h();
    out.iter_mut().for_each(|v| *v = 0.0);
    for c in 0..grid.cells() {
        let (a, b) = (grid.edge(c), grid.edge(c + 1));
        let w = (b - a) / sub as f64;
        for s in 0..sub {
            let (pa, pb) = (a + s as f64 * w, a + (s + 1) as f64 * w);
            for (y, wy) in rule.mapped(pa, pb) {
                let (left, right) = ((b - y) / h, (y - a) / h);
                for (i, &x) in points.iter().enumerate() {
                    let v = kt.eval(x, y);
                    let q = wy * v * v;
                    out[i * m + c] += q * left;
                    out[i * m + c + 1] += q * right;
                }
            }
        }
    }
    Ok(())
}

/// `f_t(x) = E u_t(x)^2` on the oracle grid.
#[derive(Debug, Clone)]
pub struct MomentSolution {
    pub grid: SpaceGrid,
    pub dt: f64,
    /// `values[n][i]` at time `n dt` and node `i`.
    pub values: Vec<Vec<f64>>,
}

impl MomentSolution {
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let n = x.round();
        if !(0.0..self.values.len() as f64).contains(&n) || (x - n).abs() > 1e-6 {
            return config(format!("time {t} is not on the oracle grid (dt={})", self.dt));
        }
        Ok(n as usize)
    }

    pub fn at(&self, t: f64) -> Result<&[f64]> {
        Ok(&self.values[self.step_of(t)?])
    }

    /// `int f_t(x) dx = E ||u_t||^2`.
    pub fn energy_sq(&self, t: f64) -> Result<f64> {
        Ok(self.grid.integrate(self.at(t)?))
    }
}

/// Slope `c` with `|sigma(z)| = c |z|`, the only case where the second
/// moment closes.
pub fn moment_slope(sigma: &SigmaSpec) -> Result<f64> {
    let (ell, lip) = sigma_constants(sigma);
    if (lip - ell).abs() > 1e-12 * lip.max(1.0) {
        return Err(Error::Unsupported(format!(
            "second-moment oracle needs |sigma(z)| = c|z|; this sigma has ell={ell}, lip={lip}"
        )));
    }
    Ok(lip)
}

/// Solves the heat second-moment equation for one `lambda`. For sweeps,
/// build a [`VolterraKernel`] once and call [`VolterraKernel::solve`].
pub fn solve_heat_moment_volterra(
    problem: &MomentProblem,
    sigma: &SigmaSpec,
    lambda: f64,
) -> Result<MomentSolution> {
    let c = moment_slope(sigma)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    VolterraKernel::new(problem)?.solve(lambda * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::diagonal_double_time;
    use std::f64::consts::{E, PI};

    fn neumann(horizon: f64, cells: usize, steps: usize) -> MomentProblem {
        MomentProblem::new(1.0, Boundary::Neumann, 1.0, InitialData::constant(1.0).unwrap(), horizon)
            .unwrap()
            .with_resolution(cells, steps)
            .unwrap()
    }

    #[test]
    fn hat_weights_sum_to_diagonal() {
        let p = neumann(0.1, 16, 10);
        let grid = SpaceGrid::nodes(1.0, 16).unwrap();
        let params = KernelParams::new(1.0, Boundary::Neumann).unwrap();
        let m = grid.len();
        let mut s = vec![0.0; m * m];
        let tau = 0.01;
        squared_kernel_hats(&params, tau, &grid, &grid.points(), 4, &GaussLegendre::new(5), &mut s)
            .unwrap();
        for i in 0..m {
            let row: f64 = s[i * m..(i + 1) * m].iter().sum();
            let want = diagonal_double_time(&params, tau, grid.point(i)).unwrap();
            assert!((row - want).abs() < 1e-9 * want, "{i}");
        }
        assert_eq!(p.dt(), 0.01);
    }

    #[test]
    fn quiet_moment_is_squared_semigroup() {
        let p = MomentProblem::new(1.0, Boundary::Dirichlet, 0.5, InitialData::Sine, 0.2)
            .unwrap()
            .with_resolution(32, 20)
            .unwrap();
        let sol = solve_heat_moment_volterra(&p, &SigmaSpec::linear(1.0).unwrap(), 0.0).unwrap();
        let decay = (-PI * PI * 0.2 / 2.0).exp();
        for (x, f) in sol.grid.points().iter().zip(sol.at(0.2).unwrap()) {
            assert!((f - ((PI * x).sin() * decay).powi(2)).abs() < 2e-6);
        }
        let e = sol.energy_sq(0.2).unwrap();
        assert!((e - 0.5 * decay * decay).abs() < 1e-6);
    }

    #[test]
    fn constant_data_exceeds_renewal_series() {
        let p = neumann(0.5, 32, 200);
        let sol = solve_heat_moment_volterra(&p, &SigmaSpec::linear(1.0).unwrap(), 2.0).unwrap();
        let e = sol.energy_sq(0.5).unwrap();
        let x = 16.0 * 0.5 / (4.0 * PI * E);
        let mut term = 1.0;
        let mut partial = 0.0;
        for j in 1..=30 {
            term *= x / j as f64;
            partial += term;
            assert!(e >= partial, "J={j}");
        }
    }

    #[test]
    fn monotone_in_lambda() {
        let kernel = VolterraKernel::new(&neumann(0.3, 16, 60)).unwrap();
        let mut prev = 0.0;
        for lambda in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let e = kernel.solve(lambda).unwrap().energy_sq(0.3).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn converges_under_refinement() {
        let e = |cells, steps| {
            solve_heat_moment_volterra(&neumann(0.3, cells, steps), &SigmaSpec::linear(1.0).unwrap(), 1.0)
                .unwrap()
                .energy_sq(0.3)
                .unwrap()
        };
        let coarse = e(16, 60);
        let fine = e(32, 240);
        assert!((coarse - fine).abs() < 2e-3 * fine, "{coarse} {fine}");
    }

    #[test]
    fn rejects_nonlinear_sigma() {
        let s = SigmaSpec::piecewise(vec![(-1.0, -1.0), (1.0, 1.0)], 0.5, 0.5).unwrap();
        let err = solve_heat_moment_volterra(&neumann(0.1, 8, 10), &s, 1.0).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let abs = SigmaSpec::piecewise(vec![(0.0, 0.0)], -2.0, 2.0).unwrap();
        assert_eq!(moment_slope(&abs).unwrap(), 2.0);
    }
}
